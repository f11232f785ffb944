#pragma once

// Umbrella header for the whole library.

#include "kdif/analyze.hpp"
#include "kdif/bootstrap.hpp"
#include "kdif/data.hpp"
#include "kdif/kernel.hpp"
#include "kdif/logistic.hpp"
#include "kdif/math.hpp"
#include "kdif/mc.hpp"
#include "kdif/method.hpp"
#include "kdif/parallel.hpp"
#include "kdif/rng.hpp"
#include "kdif/simulation.hpp"
#include "kdif/statistic.hpp"
#include "kdif/support.hpp"
