#pragma once

// Umbrella header for the Pearson Type VII location-estimation library.

#include "pvii/distribution.hpp"
#include "pvii/experiments.hpp"
#include "pvii/likelihood.hpp"
#include "pvii/quadrature.hpp"
#include "pvii/report.hpp"
#include "pvii/rng.hpp"
#include "pvii/special_functions.hpp"
#include "pvii/theory.hpp"
