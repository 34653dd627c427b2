#pragma once

#include "patchy/canonical.hpp"
#include "patchy/datasets.hpp"
#include "patchy/error.hpp"
#include "patchy/generators.hpp"
#include "patchy/graph.hpp"
#include "patchy/grid_check.hpp"
#include "patchy/labeling.hpp"
#include "patchy/labeling_eval.hpp"
#include "patchy/nn/checkpoint.hpp"
#include "patchy/nn/cnn.hpp"
#include "patchy/nn/optim.hpp"
#include "patchy/nn/train.hpp"
#include "patchy/receptive_field.hpp"
#include "patchy/rng.hpp"
#include "patchy/tensor_io.hpp"

namespace patchy {

inline constexpr const char* version = "0.1.0";

}  // namespace patchy
