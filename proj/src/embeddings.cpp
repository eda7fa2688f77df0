// src/embeddings.cpp

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

#include "alsed/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "alsed/error.hpp"

namespace alsed {

std::string_view to_string(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::kLogmelPassthrough:
      return "logmel-passthrough";
    case EmbeddingKind::kRandomProjection:
      return "random-projection";
    case EmbeddingKind::kPrecomputedFile:
      return "precomputed-file";
  }
  return "unknown";
}

EmbeddingKind embedding_kind_from_string(std::string_view name) {
  if (name == "logmel-passthrough") return EmbeddingKind::kLogmelPassthrough;
  if (name == "random-projection") return EmbeddingKind::kRandomProjection;
  if (name == "precomputed-file") return EmbeddingKind::kPrecomputedFile;
  throw InputError("unknown embedding provider: " + std::string(name));
}

Eigen::MatrixXd stack_context(const RowMatrixXf& frames, int context) {
  const Eigen::Index T = frames.rows();
  const Eigen::Index B = frames.cols();
  Eigen::MatrixXd out(T, (2 * context + 1) * B);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int k = -context; k <= context; ++k) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t + k, 0, T - 1);
      out.block(t, (k + context) * B, 1, B) = frames.row(src).cast<double>();
    }
  }
  return out;
}

EmbeddingSequence PassthroughProvider::embed(const LogMelSpectrogram& spec) const {
  if (spec.bands() != bands_)
    throw InputError(spec.recording_id + ": band count does not match provider");
  return {spec.values, spec.recording_id, spec.hop_s, spec.duration_s};
}

RandomProjectionProvider::RandomProjectionProvider(int input_bands, int dim,
                                                   int context, std::uint64_t seed)
    : input_bands_(input_bands), context_(context) {
  if (dim <= 0 || context < 0 || input_bands <= 0)
    throw InputError("invalid random-projection configuration");
  const int in_dim = (2 * context + 1) * input_bands;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(in_dim));
  projection_.resize(dim, in_dim);
  for (Eigen::Index r = 0; r < projection_.rows(); ++r)
    for (Eigen::Index c = 0; c < projection_.cols(); ++c) projection_(r, c) = normal(rng);
}

Eigen::MatrixXd RandomProjectionProvider::project(const LogMelSpectrogram& spec) const {
  if (spec.bands() != input_bands_)
    throw InputError(spec.recording_id + ": band count does not match provider");
  return stack_context(spec.values, context_) * projection_.transpose();
}

void RandomProjectionProvider::fit(std::span<const LogMelSpectrogram> corpus) {
  if (corpus.empty()) throw InputError("cannot fit standardization on an empty corpus");
  const int D = dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(D);
  double count = 0;
  std::vector<Eigen::MatrixXd> projected;
  projected.reserve(corpus.size());
  for (const auto& spec : corpus) {
    projected.push_back(project(spec));
    sum += projected.back().colwise().sum().transpose();
    count += static_cast<double>(projected.back().rows());
  }
  Eigen::VectorXd mean = sum / count;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(D);
  for (const auto& p : projected)
    sq += (p.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
  Eigen::VectorXd scale(D);
  for (int d = 0; d < D; ++d) {
    const double var = sq[d] / count;
    scale[d] = var > 1e-20 ? 1.0 / std::sqrt(var) : 1.0;
  }
  set_standardization(std::move(mean), std::move(scale));
}

void RandomProjectionProvider::set_standardization(Eigen::VectorXd mean,
                                                   Eigen::VectorXd scale) {
  if (mean.size() != dim() || scale.size() != dim())
    throw InputError("standardization statistics do not match embedding dimension");
  mean_ = std::move(mean);
  scale_ = std::move(scale);
}

EmbeddingSequence RandomProjectionProvider::embed(const LogMelSpectrogram& spec) const {
  if (!fitted()) throw Error("random-projection provider used before fit()");
  Eigen::MatrixXd y = project(spec);
  y = (y.rowwise() - mean_.transpose()).array().rowwise() * scale_.transpose().array();
  EmbeddingSequence out{y.cast<float>(), spec.recording_id, spec.hop_s, spec.duration_s};
  return out;
}

PrecomputedProvider::PrecomputedProvider(const std::filesystem::path& manifest) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(manifest));
    dim_ = doc.at("dim").get<int>();
    for (auto& [id, path] : doc.at("files").items()) {
      std::filesystem::path p = path.get<std::string>();
      if (p.is_relative()) p = manifest.parent_path() / p;
      files_[id] = p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad embedding manifest " + manifest.string() + ": " + e.what());
  }
  if (dim_ <= 0) throw InputError("embedding manifest declares a non-positive dim");
}

EmbeddingSequence PrecomputedProvider::embed(const LogMelSpectrogram& spec) const {
  auto it = files_.find(spec.recording_id);
  if (it == files_.end())
    throw InputError(spec.recording_id + ": no precomputed embedding in manifest");
  auto emb = decode_embedding(read_file(it->second), spec.recording_id);
  if (emb.dim() != dim_)
    throw InputError(spec.recording_id + ": embedding dimension mismatch");
  if (emb.frames() != spec.frames())
    throw InputError(spec.recording_id + ": embedding frame count differs from features");
  emb.hop_s = spec.hop_s;
  emb.duration_s = spec.duration_s;
  return emb;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const EmbeddingConfig& config, int input_bands,
    std::span<const LogMelSpectrogram> fit_corpus) {
  switch (config.kind) {
    case EmbeddingKind::kLogmelPassthrough:
      return std::make_unique<PassthroughProvider>(input_bands);
    case EmbeddingKind::kRandomProjection: {
      auto p = std::make_unique<RandomProjectionProvider>(input_bands, config.dim,
                                                          config.context, config.seed);
      p->fit(fit_corpus);
      return p;
    }
    case EmbeddingKind::kPrecomputedFile: {
      auto p = std::make_unique<PrecomputedProvider>(config.manifest);
      if (p->dim() != config.dim)
        throw InputError("precomputed embedding dim does not match project config");
      return p;
    }
  }
  throw InputError("unknown embedding provider");
}

std::string encode_embedding(const EmbeddingSequence& emb) {
  return encode_matrix_file("EMB1", emb.values);
}

EmbeddingSequence decode_embedding(std::string_view bytes, std::string recording_id) {
  EmbeddingSequence emb;
  emb.values = decode_matrix_file("EMB1", bytes, recording_id);
  emb.recording_id = std::move(recording_id);
  return emb;
}

}  // namespace alsed
