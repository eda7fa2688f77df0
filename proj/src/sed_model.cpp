// src/sed_model.cpp

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

#include "alsed/sed_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "alsed/training.hpp"

namespace alsed {

std::vector<std::pair<Eigen::Index, Eigen::Index>> decode_activity(
    const std::vector<bool>& active, double hop_s, double min_gap_s, double min_length_s) {
  const auto n = static_cast<Eigen::Index>(active.size());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> runs;
  for (Eigen::Index t = 0; t < n;) {
    if (!active[static_cast<std::size_t>(t)]) {
      ++t;
      continue;
    }
    Eigen::Index e = t;
    while (e < n && active[static_cast<std::size_t>(e)]) ++e;
    runs.emplace_back(t, e);
    t = e;
  }

  std::vector<std::pair<Eigen::Index, Eigen::Index>> merged;
  for (const auto& r : runs) {
    if (!merged.empty() &&
        static_cast<double>(r.first - merged.back().second) * hop_s < min_gap_s - 1e-9)
      merged.back().second = r.second;
    else
      merged.push_back(r);
  }

  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  for (const auto& r : merged)
    if (static_cast<double>(r.second - r.first) * hop_s >= min_length_s - 1e-9) out.push_back(r);
  return out;
}

RegionSplit split_regions(std::span<const TrainingExample> examples, double validation_fraction,
                          std::mt19937_64& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> refs;
  for (std::size_t e = 0; e < examples.size(); ++e)
    for (std::size_t r = 0; r < examples[e].regions.size(); ++r) refs.emplace_back(e, r);
  std::shuffle(refs.begin(), refs.end(), rng);

  std::size_t n_val = 0;
  if (refs.size() >= 3)
    n_val = static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(refs.size())));

  // Rebuild examples keeping the original recording order and region order.
  std::vector<std::vector<bool>> val_mask(examples.size());
  for (std::size_t e = 0; e < examples.size(); ++e)
    val_mask[e].assign(examples[e].regions.size(), false);
  for (std::size_t i = 0; i < n_val; ++i) val_mask[refs[i].first][refs[i].second] = true;

  RegionSplit split;
  for (std::size_t e = 0; e < examples.size(); ++e) {
    TrainingExample tr{examples[e].recording_id, examples[e].frames, {}};
    TrainingExample va{examples[e].recording_id, examples[e].frames, {}};
    for (std::size_t r = 0; r < examples[e].regions.size(); ++r)
      (val_mask[e][r] ? va : tr).regions.push_back(examples[e].regions[r]);
    split.train_regions += static_cast<int>(tr.regions.size());
    split.validation_regions += static_cast<int>(va.regions.size());
    if (!tr.regions.empty()) split.train.push_back(std::move(tr));
    if (!va.regions.empty()) split.validation.push_back(std::move(va));
  }
  return split;
}

std::string encode_checkpoint(const SedModel<float>& model) {
  std::string out;
  put_bytes(out, "SEDM");
  put_u32(out, static_cast<std::uint32_t>(model.dims.context));
  put_u32(out, static_cast<std::uint32_t>(model.dims.input_dim));
  put_u32(out, static_cast<std::uint32_t>(model.dims.hidden));
  put_u32(out, static_cast<std::uint32_t>(model.dims.classes));
  for (const auto& name : model.class_names) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    put_bytes(out, name);
  }
  for (const auto& block : model.params.blocks())
    out.append(reinterpret_cast<const char*>(block.data()),
               4 * static_cast<std::size_t>(block.size()));
  return out;
}

SedModel<float> decode_checkpoint(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 20 || r.bytes(4) != "SEDM") throw InputError("not a SEDM checkpoint");
  SedDims dims;
  dims.context = static_cast<int>(r.u32());
  dims.input_dim = static_cast<int>(r.u32());
  dims.hidden = static_cast<int>(r.u32());
  dims.classes = static_cast<int>(r.u32());
  std::vector<std::string> names;
  for (int c = 0; c < dims.classes; ++c) {
    auto len = r.u32();
    names.emplace_back(r.bytes(len));
  }
  SedModel<float> model(dims, std::move(names));
  for (auto block : model.params.blocks()) {
    auto payload = r.bytes(4 * static_cast<std::size_t>(block.size()));
    std::memcpy(block.data(), payload.data(), payload.size());
  }
  if (r.remaining() != 0) throw InputError("trailing bytes in SEDM checkpoint");
  if (!model.params.all_finite()) throw InputError("non-finite parameters in checkpoint");
  return model;
}

}  // namespace alsed
