// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sparsetrim/checkpoint.hpp"
#include "sparsetrim/cost_model.hpp"
#include "sparsetrim/error.hpp"
#include "sparsetrim/matrix.hpp"
#include "sparsetrim/pruning.hpp"
#include "sparsetrim/sgl_loss.hpp"
#include "sparsetrim/synth.hpp"
#include "sparsetrim/text_normalizer.hpp"
#include "sparsetrim/toy_trainer.hpp"
#include "sparsetrim/weight_stats.hpp"
#include "sparsetrim/wer.hpp"
