#pragma once

#include "linalg.hpp"
#include "rng.hpp"
#include "targets.hpp"
#include "precompute.hpp"
#include "split_potential.hpp"
#include "integrators.hpp"
#include "sampler.hpp"
#include "diagnostics.hpp"
#include "model_analysis.hpp"
#include "experiment.hpp"
