// include/alsed/embeddings.hpp

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

#ifndef ALSED_EMBEDDINGS_HPP_
#define ALSED_EMBEDDINGS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "alsed/binary_io.hpp"
#include "alsed/features.hpp"

namespace alsed {

/// T x D frame embeddings with the frame timing of the source spectrogram.
struct EmbeddingSequence {
  RowMatrixXf values;
  std::string recording_id;
  double hop_s = 0.02;
  double duration_s = 0.0;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

enum class EmbeddingKind { kLogmelPassthrough, kRandomProjection, kPrecomputedFile };

std::string_view to_string(EmbeddingKind kind);
EmbeddingKind embedding_kind_from_string(std::string_view name);

struct EmbeddingConfig {
  EmbeddingKind kind = EmbeddingKind::kRandomProjection;
  int dim = 256;
  int context = 2;
  std::uint64_t seed = 0;
  std::filesystem::path manifest;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingKind kind() const = 0;
  virtual int dim() const = 0;
  virtual EmbeddingSequence embed(const LogMelSpectrogram& spec) const = 0;
};

class PassthroughProvider final : public EmbeddingProvider {
 public:
  explicit PassthroughProvider(int bands = 128) : bands_(bands) {}
  EmbeddingKind kind() const override { return EmbeddingKind::kLogmelPassthrough; }
  int dim() const override { return bands_; }
  EmbeddingSequence embed(const LogMelSpectrogram& spec) const override;

 private:
  int bands_;
};

/// Stacks frames t-c..t+c (edge-clamped), projects them with a seeded
/// Gaussian matrix and standardizes each output dimension with statistics
/// frozen at fit time.
class RandomProjectionProvider final : public EmbeddingProvider {
 public:
  RandomProjectionProvider(int input_bands, int dim, int context,
                           std::uint64_t seed);

  EmbeddingKind kind() const override { return EmbeddingKind::kRandomProjection; }
  int dim() const override { return static_cast<int>(projection_.rows()); }
  int context() const { return context_; }

  /// Fits per-dimension mean and scale over a corpus. Order independent up to
  /// floating-point summation, which runs in the given order.
  void fit(std::span<const LogMelSpectrogram> corpus);
  void set_standardization(Eigen::VectorXd mean, Eigen::VectorXd scale);
  bool fitted() const { return mean_.size() == dim(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& scale() const { return scale_; }

  /// Projection without standardization, in double precision.
  Eigen::MatrixXd project(const LogMelSpectrogram& spec) const;
  EmbeddingSequence embed(const LogMelSpectrogram& spec) const override;

  const Eigen::MatrixXd& projection() const { return projection_; }

 private:
  int input_bands_;
  int context_;
  Eigen::MatrixXd projection_;  // dim x (2c+1)*bands
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
};

/// Loads EMB1 files listed in a manifest {"dim": D, "files": {id: path}}.
class PrecomputedProvider final : public EmbeddingProvider {
 public:
  explicit PrecomputedProvider(const std::filesystem::path& manifest);
  EmbeddingKind kind() const override { return EmbeddingKind::kPrecomputedFile; }
  int dim() const override { return dim_; }
  EmbeddingSequence embed(const LogMelSpectrogram& spec) const override;

 private:
  int dim_ = 0;
  std::map<std::string, std::filesystem::path> files_;
};

/// Builds a provider; random-projection providers are fitted on `fit_corpus`.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const EmbeddingConfig& config, int input_bands,
    std::span<const LogMelSpectrogram> fit_corpus);

/// Row stack of frames t-c..t+c with indices clamped to [0, T).
Eigen::MatrixXd stack_context(const RowMatrixXf& frames, int context);

std::string encode_embedding(const EmbeddingSequence& emb);
EmbeddingSequence decode_embedding(std::string_view bytes, std::string recording_id);

}  // namespace alsed

#endif  // ALSED_EMBEDDINGS_HPP_
