#pragma once

#include "nomapair/baselines.hpp"
#include "nomapair/bench.hpp"
#include "nomapair/conic/program.hpp"
#include "nomapair/conic/solver.hpp"
#include "nomapair/conic/subproblem.hpp"
#include "nomapair/metrics.hpp"
#include "nomapair/parallel.hpp"
#include "nomapair/rng.hpp"
#include "nomapair/sca.hpp"
#include "nomapair/scenario.hpp"
#include "nomapair/surrogate.hpp"
