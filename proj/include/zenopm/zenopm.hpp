#pragma once

#include "zenopm/analytic.hpp"
#include "zenopm/model.hpp"
#include "zenopm/montecarlo.hpp"
#include "zenopm/oracle.hpp"
#include "zenopm/parallel.hpp"
#include "zenopm/rng.hpp"
#include "zenopm/stats.hpp"
#include "zenopm/sweep.hpp"
#include "zenopm/version.hpp"
