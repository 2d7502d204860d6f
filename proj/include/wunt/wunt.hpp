#pragma once

#include "wunt/basis.hpp"
#include "wunt/common.hpp"
#include "wunt/dataset.hpp"
#include "wunt/estimator.hpp"
#include "wunt/kernels.hpp"
#include "wunt/logistic.hpp"
#include "wunt/partition.hpp"
#include "wunt/rng.hpp"
#include "wunt/sim.hpp"
#include "wunt/smoothing.hpp"
#include "wunt/transformer.hpp"
#include "wunt/warmup.hpp"
