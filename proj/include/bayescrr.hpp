#pragma once

#include "bayescrr/baselines.hpp"
#include "bayescrr/diagnostics.hpp"
#include "bayescrr/io.hpp"
#include "bayescrr/mcmc.hpp"
#include "bayescrr/propagation.hpp"
#include "bayescrr/report.hpp"
#include "bayescrr/rolling.hpp"
#include "bayescrr/series.hpp"
#include "bayescrr/stats.hpp"
#include "bayescrr/tree.hpp"
#include "bayescrr/utility.hpp"
