#pragma once

#include "kcm/core.hpp"
#include "kcm/errors.hpp"
#include "kcm/experiments.hpp"
#include "kcm/fenwick.hpp"
#include "kcm/numeric.hpp"
#include "kcm/oracle.hpp"
#include "kcm/rng.hpp"
#include "kcm/sampler.hpp"
#include "kcm/statistics.hpp"
#include "kcm/stats_math.hpp"
#include "kcm/step_law.hpp"
#include "kcm/strategies.hpp"
#include "kcm/verify.hpp"
