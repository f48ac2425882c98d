#pragma once

#include "kamc/baseline.hpp"
#include "kamc/combinatorics.hpp"
#include "kamc/determinant.hpp"
#include "kamc/error.hpp"
#include "kamc/exterior.hpp"
#include "kamc/matrix.hpp"
#include "kamc/random.hpp"
#include "kamc/nn/jacobian.hpp"
#include "kamc/nn/mlp.hpp"
#include "kamc/nn/train.hpp"
#include "kamc/training/interleave.hpp"
#include "kamc/training/mc_objective.hpp"
#include "kamc/ka/embedding.hpp"
#include "kamc/ka/outer.hpp"
#include "kamc/ka/staircase.hpp"
#include "kamc/ka/target.hpp"
#include "kamc/io/csv.hpp"
#include "kamc/io/json.hpp"
