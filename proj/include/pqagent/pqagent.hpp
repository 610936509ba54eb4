#pragma once

#include "pqagent/error.hpp"
#include "pqagent/normal.hpp"
#include "pqagent/quadrature.hpp"
#include "pqagent/stats.hpp"
#include "pqagent/dists.hpp"
#include "pqagent/service.hpp"
#include "pqagent/analytic.hpp"
#include "pqagent/optimize.hpp"
#include "pqagent/routing.hpp"
#include "pqagent/incentives.hpp"
#include "pqagent/sim.hpp"
#include "pqagent/csv.hpp"
#include "pqagent/experiments.hpp"
