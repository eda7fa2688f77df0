// include/alsed/training.hpp

// Copyright 2026  The alsed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ALSED_TRAINING_HPP_
#define ALSED_TRAINING_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "alsed/error.hpp"
#include "alsed/sed_model.hpp"

namespace alsed {

struct TrainingSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 8;  // recordings per mini-batch
  int max_epochs = 200;
  int min_epochs = 10;
  int patience = 10;
  double validation_fraction = 1.0 / 3.0;
  double initial_class_bias = 0.0;
  double class_weight_init_scale = 1.0;
  double weight_decay = 0.0;  // L2 on weight matrices, added to the batch gradient
};

struct TrainingHistory {
  std::vector<double> train_loss;  // per epoch, mean per training region
  std::vector<double> validation_loss;
  int best_epoch = -1;
  int train_regions = 0;
  int validation_regions = 0;
};

/// Adaptive-moment optimizer state over a parameter set.
template <typename Scalar>
class Adam {
 public:
  Adam(const SedDims& dims, const TrainingSettings& s)
      : settings_(s),
        first_(SedParameters<Scalar>::zeros(dims)),
        second_(SedParameters<Scalar>::zeros(dims)) {}

  void step(SedParameters<Scalar>& params, const SedParameters<Scalar>& gradient) {
    ++t_;
    const double b1 = settings_.beta1, b2 = settings_.beta2;
    const auto c1 = static_cast<Scalar>(1.0 - std::pow(b1, t_));
    const auto c2 = static_cast<Scalar>(1.0 - std::pow(b2, t_));
    const auto lr = static_cast<Scalar>(settings_.learning_rate);
    const auto eps = static_cast<Scalar>(settings_.epsilon);
    auto p = params.blocks();
    auto g = gradient.blocks();
    auto m = first_.blocks();
    auto v = second_.blocks();
    for (std::size_t i = 0; i < SedParameters<Scalar>::kBlocks; ++i) {
      m[i] = Scalar(b1) * m[i] + Scalar(1 - b1) * g[i];
      v[i] = Scalar(b2) * v[i] + Scalar(1 - b2) * g[i].cwiseAbs2();
      p[i].array() -= lr * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + eps);
    }
  }

 private:
  TrainingSettings settings_;
  SedParameters<Scalar> first_;
  SedParameters<Scalar> second_;
  int t_ = 0;
};

/// Splits labeled regions 2/3 train, 1/3 validation at region granularity.
/// With fewer than three regions everything is used for training and the
/// training loss stands in for the validation loss.
struct RegionSplit {
  std::vector<TrainingExample> train;
  std::vector<TrainingExample> validation;
  int train_regions = 0;
  int validation_regions = 0;
};

RegionSplit split_regions(std::span<const TrainingExample> examples, double validation_fraction,
                          std::mt19937_64& rng);

template <typename Scalar>
double total_loss(const SedModel<Scalar>& model, std::span<const TrainingExample> examples,
                  LabelMode mode) {
  double loss = 0.0;
  for (const auto& ex : examples) loss += example_loss<Scalar>(model, ex, mode, nullptr);
  return loss;
}

/// Re-initializes `model` from `seed`, then optimizes it with mini-batches of
/// recordings and early stopping on the validation loss. The parameters of the
/// best validation epoch are kept.
template <typename Scalar>
TrainingHistory train(SedModel<Scalar>& model, std::span<const TrainingExample> examples,
                      LabelMode mode, const TrainingSettings& settings, std::uint64_t seed) {
  std::size_t n_regions = 0;
  for (const auto& ex : examples) n_regions += ex.regions.size();
  if (n_regions == 0) throw InputError("training needs at least one annotated region");

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x7a11u};
  std::mt19937_64 rng(seq);
  initialize_parameters(model, rng(), settings.initial_class_bias,
                        settings.class_weight_init_scale);
  RegionSplit split = split_regions(examples, settings.validation_fraction, rng);
  const bool has_validation = split.validation_regions > 0;

  TrainingHistory history;
  history.train_regions = split.train_regions;
  history.validation_regions = split.validation_regions;

  Adam<Scalar> adam(model.dims, settings);
  SedParameters<Scalar> gradient = SedParameters<Scalar>::zeros(model.dims);
  SedParameters<Scalar> best = model.params;
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;

  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(std::max(1, settings.batch_size));

  for (int epoch = 0; epoch < settings.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size(); b += batch) {
      gradient.set_zero();
      const std::size_t e = std::min(order.size(), b + batch);
      double batch_loss = 0.0;
      for (std::size_t i = b; i < e; ++i)
        batch_loss += example_loss<Scalar>(model, split.train[order[i]], mode, &gradient);
      if (!std::isfinite(batch_loss) || !gradient.all_finite())
        throw Error("non-finite training loss at epoch " + std::to_string(epoch));
      const auto scale = static_cast<Scalar>(1.0 / static_cast<double>(e - b));
      for (auto blk : gradient.blocks()) blk *= scale;
      if (settings.weight_decay > 0.0) {
        const auto wd = static_cast<Scalar>(settings.weight_decay);
        gradient.hidden_weight += wd * model.params.hidden_weight;
        gradient.class_weight += wd * model.params.class_weight;
        gradient.attention_weight += wd * model.params.attention_weight;
      }
      adam.step(model.params, gradient);
      epoch_loss += batch_loss;
    }
    history.train_loss.push_back(epoch_loss / split.train_regions);

    const double val = has_validation
                           ? total_loss(model, split.validation, mode) / split.validation_regions
                           : total_loss(model, split.train, mode) / split.train_regions;
    if (!std::isfinite(val)) throw Error("non-finite validation loss at epoch " + std::to_string(epoch));
    history.validation_loss.push_back(val);
    if (val < best_loss) {
      best_loss = val;
      best = model.params;
      history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= settings.patience && epoch + 1 >= settings.min_epochs) {
      break;
    }
  }
  model.params = std::move(best);
  return history;
}

}  // namespace alsed

#endif  // ALSED_TRAINING_HPP_
