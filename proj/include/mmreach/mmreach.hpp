#pragma once

// Umbrella header: interval reachability for neural ODEs via mixed-monotone
// embeddings (continuous-time and sampled-data), with a Monte-Carlo oracle
// and projection-tightness metrics.

#include "mmreach/embedding.hpp"
#include "mmreach/errors.hpp"
#include "mmreach/integrate.hpp"
#include "mmreach/interval.hpp"
#include "mmreach/jacobian_bounds.hpp"
#include "mmreach/model.hpp"
#include "mmreach/oracle.hpp"
#include "mmreach/parallel.hpp"
#include "mmreach/reach.hpp"
#include "mmreach/sampling.hpp"
#include "mmreach/scenario.hpp"
#include "mmreach/tube.hpp"
