#pragma once

#include "entrofin/csv.hpp"
#include "entrofin/diagnostics.hpp"
#include "entrofin/entropy.hpp"
#include "entrofin/errors.hpp"
#include "entrofin/histogram.hpp"
#include "entrofin/market_model.hpp"
#include "entrofin/mutual_information.hpp"
#include "entrofin/numeric.hpp"
#include "entrofin/portfolio.hpp"
#include "entrofin/report.hpp"
#include "entrofin/series.hpp"
#include "entrofin/synth.hpp"
