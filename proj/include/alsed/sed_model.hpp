// include/alsed/sed_model.hpp

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

// Attention-pooled frame classifier.
//
// Each frame t is represented by the embeddings at offsets -c..+c (indices
// clamped to the sequence), mapped through one ReLU hidden layer, then two
// heads: class probabilities p_t = logistic(Wc h_t + bc) and positive pooling
// weights w_t = exp(clip(Wa h_t + ba, -10, 10)). A region [s, e) is scored by
// the per-class weighted average o = sum w_i p_i / sum w_i.

#ifndef ALSED_SED_MODEL_HPP_
#define ALSED_SED_MODEL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "alsed/binary_io.hpp"
#include "alsed/error.hpp"
#include "alsed/labels.hpp"

namespace alsed {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kAttentionClip = 10.0;
inline constexpr double kProbabilityClip = 1e-7;

struct SedDims {
  int context = 2;
  int input_dim = 256;
  int hidden = 64;
  int classes = 1;

  int stacked_dim() const { return (2 * context + 1) * input_dim; }
  friend bool operator==(const SedDims&, const SedDims&) = default;
};

template <typename Scalar>
struct SedParameters {
  MatrixX<Scalar> hidden_weight;     // H x (2c+1)D
  VectorX<Scalar> hidden_bias;       // H
  MatrixX<Scalar> class_weight;      // C x H
  VectorX<Scalar> class_bias;        // C
  MatrixX<Scalar> attention_weight;  // C x H
  VectorX<Scalar> attention_bias;    // C

  static constexpr std::size_t kBlocks = 6;

  static SedParameters zeros(const SedDims& d) {
    SedParameters p;
    p.hidden_weight = MatrixX<Scalar>::Zero(d.hidden, d.stacked_dim());
    p.hidden_bias = VectorX<Scalar>::Zero(d.hidden);
    p.class_weight = MatrixX<Scalar>::Zero(d.classes, d.hidden);
    p.class_bias = VectorX<Scalar>::Zero(d.classes);
    p.attention_weight = MatrixX<Scalar>::Zero(d.classes, d.hidden);
    p.attention_bias = VectorX<Scalar>::Zero(d.classes);
    return p;
  }

  /// Flat views of every block in declaration (and checkpoint) order.
  std::array<Eigen::Map<VectorX<Scalar>>, kBlocks> blocks() {
    return {flat(hidden_weight), flat(hidden_bias), flat(class_weight),
            flat(class_bias),    flat(attention_weight), flat(attention_bias)};
  }
  std::array<Eigen::Map<const VectorX<Scalar>>, kBlocks> blocks() const {
    return {flat(hidden_weight), flat(hidden_bias), flat(class_weight),
            flat(class_bias),    flat(attention_weight), flat(attention_bias)};
  }

  Eigen::Index size() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks()) n += b.size();
    return n;
  }

  bool all_finite() const {
    for (const auto& b : blocks())
      if (!b.allFinite()) return false;
    return true;
  }

  void set_zero() {
    for (auto b : blocks()) b.setZero();
  }

  template <typename Other>
  SedParameters<Other> cast() const {
    return {hidden_weight.template cast<Other>(),   hidden_bias.template cast<Other>(),
            class_weight.template cast<Other>(),    class_bias.template cast<Other>(),
            attention_weight.template cast<Other>(), attention_bias.template cast<Other>()};
  }

 private:
  template <typename M>
  static Eigen::Map<VectorX<Scalar>> flat(M& m) {
    return {m.data(), m.size()};
  }
  template <typename M>
  static Eigen::Map<const VectorX<Scalar>> flat(const M& m) {
    return {m.data(), m.size()};
  }
};

template <typename Scalar>
struct SedModel {
  SedDims dims;
  std::vector<std::string> class_names;
  SedParameters<Scalar> params;

  SedModel() = default;
  SedModel(const SedDims& d, std::vector<std::string> names)
      : dims(d), class_names(std::move(names)), params(SedParameters<Scalar>::zeros(d)) {
    if (static_cast<int>(class_names.size()) != d.classes)
      throw InputError("class list size does not match model classes");
  }

  template <typename Other>
  SedModel<Other> cast() const {
    SedModel<Other> m;
    m.dims = dims;
    m.class_names = class_names;
    m.params = params.template cast<Other>();
    return m;
  }
};

/// Scaled-uniform (Glorot) weights, zero biases except the class bias, which
/// starts at `class_bias`. Class-head weights are multiplied by
/// `class_weight_scale`.
template <typename Scalar>
void initialize_parameters(SedModel<Scalar>& model, std::uint64_t seed, double class_bias = 0.0,
                           double class_weight_scale = 1.0) {
  std::mt19937_64 rng(seed);
  auto fill = [&rng](MatrixX<Scalar>& w) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(u(rng));
  };
  auto& p = model.params;
  p = SedParameters<Scalar>::zeros(model.dims);
  fill(p.hidden_weight);
  fill(p.class_weight);
  fill(p.attention_weight);
  p.class_weight *= static_cast<Scalar>(class_weight_scale);
  p.class_bias.setConstant(static_cast<Scalar>(class_bias));
}

/// Rows [begin, end) of the context-stacked input. Offsets are clamped to
/// [0, frames.rows()).
template <typename Scalar>
MatrixX<Scalar> stacked_input(const RowMatrixXf& frames, int context, Eigen::Index begin,
                              Eigen::Index end) {
  const Eigen::Index T = frames.rows();
  const Eigen::Index D = frames.cols();
  MatrixX<Scalar> x(end - begin, (2 * context + 1) * D);
  for (Eigen::Index t = begin; t < end; ++t)
    for (int k = -context; k <= context; ++k) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t + k, 0, T - 1);
      x.block(t - begin, (k + context) * D, 1, D) = frames.row(src).template cast<Scalar>();
    }
  return x;
}

/// Activations kept for backpropagation.
template <typename Scalar>
struct ForwardPass {
  MatrixX<Scalar> input;           // n x (2c+1)D
  MatrixX<Scalar> pre_activation;  // n x H
  MatrixX<Scalar> hidden;          // n x H
  MatrixX<Scalar> probability;     // n x C, p_t
  MatrixX<Scalar> attention_score; // n x C, before clipping
  MatrixX<Scalar> weight;          // n x C, w_t
};

template <typename Scalar>
ForwardPass<Scalar> forward_frames(const SedModel<Scalar>& model, const RowMatrixXf& frames,
                                   Eigen::Index begin, Eigen::Index end) {
  if (frames.cols() != model.dims.input_dim)
    throw InputError("embedding dimension does not match the model");
  if (begin < 0 || end > frames.rows() || begin >= end)
    throw InputError("frame range outside the sequence");
  const auto& p = model.params;
  ForwardPass<Scalar> f;
  f.input = stacked_input<Scalar>(frames, model.dims.context, begin, end);
  f.pre_activation.noalias() = f.input * p.hidden_weight.transpose();
  f.pre_activation.rowwise() += p.hidden_bias.transpose();
  f.hidden = f.pre_activation.cwiseMax(Scalar(0));

  f.probability.noalias() = f.hidden * p.class_weight.transpose();
  f.probability.rowwise() += p.class_bias.transpose();
  f.probability = (Scalar(1) + (-f.probability.array()).exp()).inverse().matrix();

  f.attention_score.noalias() = f.hidden * p.attention_weight.transpose();
  f.attention_score.rowwise() += p.attention_bias.transpose();
  const auto clip = static_cast<Scalar>(kAttentionClip);
  f.weight = f.attention_score.cwiseMax(-clip).cwiseMin(clip).array().exp().matrix();
  return f;
}

template <typename Scalar>
struct FrameOutputs {
  MatrixX<Scalar> probability;  // T x C
  MatrixX<Scalar> weight;       // T x C
};

template <typename Scalar>
FrameOutputs<Scalar> forward(const SedModel<Scalar>& model, const RowMatrixXf& frames) {
  auto f = forward_frames(model, frames, 0, frames.rows());
  return {std::move(f.probability), std::move(f.weight)};
}

/// Weighted average of frame probabilities over rows [begin, end).
template <typename Scalar>
VectorX<Scalar> attention_pool(const MatrixX<Scalar>& probability, const MatrixX<Scalar>& weight,
                               Eigen::Index begin, Eigen::Index end) {
  if (begin < 0 || end > probability.rows() || begin >= end)
    throw InputError("attention pooling needs a non-empty region inside the sequence");
  const auto w = weight.middleRows(begin, end - begin);
  const auto p = probability.middleRows(begin, end - begin);
  return (w.cwiseProduct(p).colwise().sum().array() / w.colwise().sum().array())
      .matrix()
      .transpose();
}

/// Binary cross-entropy summed over classes, prediction clipped to
/// [1e-7, 1 - 1e-7].
template <typename Scalar>
Scalar weak_loss(const Eigen::Ref<const VectorX<Scalar>>& pooled,
                 const Eigen::Ref<const Eigen::VectorXd>& target) {
  const double lo = kProbabilityClip, hi = 1.0 - kProbabilityClip;
  double loss = 0.0;
  for (Eigen::Index k = 0; k < pooled.size(); ++k) {
    const double o = std::clamp(static_cast<double>(pooled[k]), lo, hi);
    loss -= target[k] * std::log(o) + (1.0 - target[k]) * std::log(1.0 - o);
  }
  return static_cast<Scalar>(loss);
}

enum class LabelMode { kWeak, kStrong };

/// Annotated frame interval [start, end) with target vector.
struct LabeledRegion {
  Eigen::Index start = 0;
  Eigen::Index end = 0;
  Eigen::VectorXd target;
};

/// One training input: a full recording (or a truncated slice of it) with the
/// regions that carry labels.
struct TrainingExample {
  std::string recording_id;
  std::shared_ptr<const RowMatrixXf> frames;
  std::vector<LabeledRegion> regions;
};

/// Loss of one example and, when `gradient` is non-null, its gradient added
/// into `gradient`. Weak mode: sum over regions of BCE(attention_pool, target).
/// Strong mode: sum over region frames of BCE(p_t, target); the attention head
/// is not used. Only region frames are evaluated; frames outside regions
/// influence the loss only through the context window.
template <typename Scalar>
double example_loss(const SedModel<Scalar>& model, const TrainingExample& example,
                    LabelMode mode, SedParameters<Scalar>* gradient) {
  const auto& p = model.params;
  const int C = model.dims.classes;
  const double lo = kProbabilityClip, hi = 1.0 - kProbabilityClip;
  double loss = 0.0;

  for (const auto& region : example.regions) {
    if (region.target.size() != C) throw InputError("target size does not match classes");
    auto f = forward_frames(model, *example.frames, region.start, region.end);
    const Eigen::Index n = region.end - region.start;
    MatrixX<Scalar> d_logit = MatrixX<Scalar>::Zero(n, C);
    MatrixX<Scalar> d_score = MatrixX<Scalar>::Zero(n, C);

    if (mode == LabelMode::kWeak) {
      for (int k = 0; k < C; ++k) {
        double wsum = 0.0, wp = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          wsum += static_cast<double>(f.weight(i, k));
          wp += static_cast<double>(f.weight(i, k)) * static_cast<double>(f.probability(i, k));
        }
        const double o = wp / wsum;
        const double tau = region.target[k];
        const double oc = std::clamp(o, lo, hi);
        loss -= tau * std::log(oc) + (1.0 - tau) * std::log(1.0 - oc);
        if (!gradient || o <= lo || o >= hi) continue;
        const double d_o = -tau / o + (1.0 - tau) / (1.0 - o);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double w = f.weight(i, k), pr = f.probability(i, k);
          d_logit(i, k) = static_cast<Scalar>(d_o * w / wsum * pr * (1.0 - pr));
          const double a = f.attention_score(i, k);
          if (a > -kAttentionClip && a < kAttentionClip)
            d_score(i, k) = static_cast<Scalar>(d_o * (pr - o) / wsum * w);
        }
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i)
        for (int k = 0; k < C; ++k) {
          const double pr = f.probability(i, k);
          const double tau = region.target[k];
          const double pc = std::clamp(pr, lo, hi);
          loss -= tau * std::log(pc) + (1.0 - tau) * std::log(1.0 - pc);
          if (gradient && pr > lo && pr < hi) d_logit(i, k) = static_cast<Scalar>(pr - tau);
        }
    }

    if (!gradient) continue;
    auto& g = *gradient;
    g.class_weight.noalias() += d_logit.transpose() * f.hidden;
    g.class_bias += d_logit.colwise().sum().transpose();
    MatrixX<Scalar> d_hidden = d_logit * p.class_weight;
    if (mode == LabelMode::kWeak) {
      g.attention_weight.noalias() += d_score.transpose() * f.hidden;
      g.attention_bias += d_score.colwise().sum().transpose();
      d_hidden.noalias() += d_score * p.attention_weight;
    }
    const MatrixX<Scalar> d_pre =
        (f.pre_activation.array() > Scalar(0)).template cast<Scalar>() * d_hidden.array();
    g.hidden_weight.noalias() += d_pre.transpose() * f.input;
    g.hidden_bias += d_pre.colwise().sum().transpose();
  }
  return loss;
}

/// Per class: binarize p > 0.5, fill inactive gaps shorter than min_gap_s,
/// then drop active runs shorter than min_length_s. Returns [start, end)
/// frame runs.
std::vector<std::pair<Eigen::Index, Eigen::Index>> decode_activity(
    const std::vector<bool>& active, double hop_s, double min_gap_s = 0.1,
    double min_length_s = 0.1);

template <typename Scalar>
std::vector<Event> detect_events(const SedModel<Scalar>& model, const RowMatrixXf& frames,
                                 double hop_s, double duration_s) {
  const auto out = forward(model, frames);
  std::vector<Event> events;
  for (int k = 0; k < model.dims.classes; ++k) {
    std::vector<bool> active(static_cast<std::size_t>(frames.rows()));
    for (Eigen::Index t = 0; t < frames.rows(); ++t)
      active[static_cast<std::size_t>(t)] = out.probability(t, k) > Scalar(0.5);
    for (auto [s, e] : decode_activity(active, hop_s))
      events.push_back({k, static_cast<double>(s) * hop_s,
                        std::min(static_cast<double>(e) * hop_s, duration_s)});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.onset_s != b.onset_s ? a.onset_s < b.onset_s : a.class_id < b.class_id;
  });
  return events;
}

/// Checkpoint: "SEDM", u32 c, D, H, C, then per class u32 length + UTF-8
/// name, then the six parameter blocks as float32 in declaration order.
std::string encode_checkpoint(const SedModel<float>& model);
SedModel<float> decode_checkpoint(std::string_view bytes);

}  // namespace alsed

#endif  // ALSED_SED_MODEL_HPP_
