#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "entrofin/entrofin.hpp"

using namespace entrofin;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return ENTROFIN_CLI_PATH; }

struct RunOutput {
    int exit_code = -1;
    std::string out;
};

RunOutput run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out_file = dir / "stdout.txt";
    const std::string cmd = std::string(cli_path()) + " " + args + " > " + out_file.string() +
                            " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    RunOutput r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("entrofin_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_pair_csv(const fs::path& dir, double rho, std::size_t n, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::bivariate_gaussian;
    cfg.n = n;
    cfg.seed = seed;
    cfg.params["rho"] = rho;
    const auto series = generate(cfg);
    std::vector<PriceSeries> prices;
    for (const auto& s : series) prices.push_back(prices_from_returns(s, "2000-01-03"));
    const fs::path file = dir / "pair.csv";
    write_prices_wide(file.string(), prices);
    return file;
}

fs::path write_universe_csv(const fs::path& dir, std::size_t n, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::one_factor_universe;
    cfg.n = n;
    cfg.seed = seed;
    cfg.params["n_assets"] = 6;
    cfg.params["sigma_m"] = 0.012;
    cfg.params["beta_min"] = 0.5;
    cfg.params["beta_max"] = 1.5;
    const auto series = generate(cfg);
    std::vector<PriceSeries> prices;
    for (const auto& s : series) prices.push_back(prices_from_returns(s, "2000-01-03"));
    const fs::path file = dir / "universe.csv";
    write_prices_wide(file.string(), prices);
    return file;
}

} // namespace

TEST_CASE("help exits zero, bad usage exits two") {
    const auto dir = fresh_dir("usage");
    CHECK(run_cli("--help", dir).exit_code == 0);
    CHECK(run_cli("analyze --help", dir).exit_code == 0);
    CHECK(run_cli("frobnicate", dir).exit_code == 2);
    CHECK(run_cli("mi --no-such-flag", dir).exit_code == 2);
    CHECK(run_cli("", dir).exit_code == 2); // a subcommand is required
}

TEST_CASE("mi subcommand matches the library bit for bit") {
    const auto dir = fresh_dir("mi");
    const auto input = write_pair_csv(dir, 0.6, 2000, 17);
    const auto r = run_cli("mi --input " + input.string() + " --cols X,Y", dir);
    REQUIRE(r.exit_code == 0);
    const auto j = ordered_json::parse(r.out);

    const auto prices = load_prices(input.string(), CsvFormat::wide_format);
    auto [x, y] = align(log_returns(prices[0]), log_returns(prices[1]));
    const auto [adaptive, tree] = mutual_information_adaptive(x, y);
    const auto grid = mutual_information_grid(x, y, 0);
    CHECK(j["mi_adaptive"].get<double>() == j12(adaptive.value).get<double>());
    CHECK(j["mi_grid"].get<double>() == j12(grid.value).get<double>());
    CHECK(j["lambda"].get<double>() == j12(global_correlation(adaptive)).get<double>());
    CHECK(j["n"].get<std::size_t>() == x.n());
}

TEST_CASE("mi tree dump is valid JSON with consistent counts") {
    const auto dir = fresh_dir("tree");
    const auto input = write_pair_csv(dir, 0.8, 3000, 18);
    const fs::path tree_file = dir / "tree.json";
    const auto r = run_cli("mi --input " + input.string() + " --cols X,Y --dump-tree " +
                               tree_file.string(),
                           dir);
    REQUIRE(r.exit_code == 0);
    const auto j = ordered_json::parse(std::ifstream(tree_file));
    CHECK(j["n"] == 3000);
    CHECK(j["root"]["count"] == 3000);
    // children tile the parent: counts add up
    std::function<void(const ordered_json&)> walk = [&](const ordered_json& cell) {
        if (cell["children"].empty()) return;
        std::size_t sum = 0;
        for (const auto& ch : cell["children"]) sum += ch["count"].get<std::size_t>();
        CHECK(sum == cell["count"].get<std::size_t>());
        for (const auto& ch : cell["children"]) walk(ch);
    };
    walk(j["root"]);
}

TEST_CASE("entropy market-model diagnostics and diversify smoke") {
    const auto dir = fresh_dir("smoke");
    const auto input = write_universe_csv(dir, 800, 19);

    auto r = run_cli("entropy --input " + input.string() + " --col A03", dir);
    REQUIRE(r.exit_code == 0);
    auto j = ordered_json::parse(r.out);
    CHECK(j["entropy"]["value"].is_number());

    r = run_cli("market-model --input " + input.string() + " --ticker A03 --benchmark MKT", dir);
    REQUIRE(r.exit_code == 0);
    j = ordered_json::parse(r.out);
    CHECK(j["beta"].is_number());
    CHECK(j["systematic_share"].get<double>() <= 1.0);

    r = run_cli("diagnostics --input " + input.string() + " --ticker A03 --benchmark MKT "
                "--paths-csv " + (dir / "paths.csv").string(),
                dir);
    REQUIRE(r.exit_code == 0);
    j = ordered_json::parse(r.out);
    CHECK(j["tests"].size() == 3);
    CHECK(fs::exists(dir / "paths.csv"));

    r = run_cli("diversify --input " + input.string() + " --max-k 4 --replications 10", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.rfind("k,avg_std,avg_entropy", 0) == 0);

    // unknown ticker is a config problem
    r = run_cli("entropy --input " + input.string() + " --col NOPE", dir);
    CHECK(r.exit_code == 2);
}

TEST_CASE("synth writes a parseable fixture") {
    const auto dir = fresh_dir("synth");
    const fs::path out = dir / "fixture.csv";
    const auto r = run_cli("synth --kind one_factor_universe --n 400 --seed 5 "
                           "--param n_assets=3 --param sigma_m=0.01 --output " + out.string(),
                           dir);
    REQUIRE(r.exit_code == 0);
    const auto prices = load_prices(out.string(), CsvFormat::wide_format);
    CHECK(prices.size() == 4); // MKT + 3 assets
    CHECK(prices[0].prices.size() == 401);

    CHECK(run_cli("synth --kind nope --n 10 --output x.csv", dir).exit_code == 2);
    CHECK(run_cli("synth --kind ar1 --n 10 --param phi=2 --output " +
                      (dir / "bad.csv").string(),
                  dir).exit_code == 2);
}

TEST_CASE("analyze end to end with a config file") {
    const auto dir = fresh_dir("analyze");
    const auto input = write_universe_csv(dir, 700, 20);
    const fs::path conf = dir / "run.toml";
    {
        std::ofstream c(conf);
        c << "input = \"" << input.string() << "\"\n"
          << "benchmark = \"MKT\"\n"
          << "output = \"" << (dir / "out").string() << "\"\n"
          << "diversify = true\n"
          << "replications = 10\n"
          << "bins = 7\n"
          << "seed = 21\n";
    }
    const auto r = run_cli("analyze --config " + conf.string(), dir);
    REQUIRE(r.exit_code == 0);
    for (const char* f :
         {"report.json", "fig1.csv", "fig2.csv", "diagnostics.csv", "diversification.csv"}) {
        CHECK(fs::exists(dir / "out" / f));
    }
    auto j = ordered_json::parse(std::ifstream(dir / "out" / "report.json"));
    CHECK(j["histogram"]["bins"] == 7);

    // flags override the config file
    const auto r2 = run_cli("analyze --config " + conf.string() + " --bins 9 --output " +
                                (dir / "out2").string(),
                            dir);
    REQUIRE(r2.exit_code == 0);
    j = ordered_json::parse(std::ifstream(dir / "out2" / "report.json"));
    CHECK(j["histogram"]["bins"] == 9);
}

TEST_CASE("the environment variable supplies the default output directory") {
    const auto dir = fresh_dir("envout");
    const auto input = write_universe_csv(dir, 500, 22);
    const std::string cmd = std::string("ENTROFIN_OUTPUT_DIR=") + (dir / "envdir").string() +
                            " " + cli_path() + " analyze --input " + input.string() +
                            " --benchmark MKT > " + (dir / "o").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir / "envdir" / "report.json"));
}

TEST_CASE("analyze with a missing benchmark exits 2 and writes nothing") {
    const auto dir = fresh_dir("nobench");
    const auto input = write_universe_csv(dir, 400, 21);
    const auto r = run_cli("analyze --input " + input.string() + " --benchmark NOPE --output " +
                               (dir / "out").string(),
                           dir);
    CHECK(r.exit_code == 2);
    CHECK_FALSE(fs::exists(dir / "out" / "report.json"));
    CHECK_FALSE(fs::exists(dir / "out" / "fig1.csv"));
}

TEST_CASE("analyze maps runtime failures to exit 1") {
    const auto dir = fresh_dir("badfile");
    const fs::path bad = dir / "bad.csv";
    std::ofstream(bad) << "date,A\n2001-01-01,not_a_number\n";
    const auto r = run_cli("analyze --input " + bad.string() + " --benchmark A --output " +
                               (dir / "out").string(),
                           dir);
    CHECK(r.exit_code == 1);
}

