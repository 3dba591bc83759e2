// Copyright (c) 2026 The listalign Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Hashed text features and image feature lookup. Everything here is a pure
// function of its inputs, bit-identical across runs:
//
//   tokens   = split on Unicode whitespace, drop every ASCII punctuation
//              byte, lowercase ASCII letters, discard empty tokens
//   keys     = each unigram token, and each adjacent pair "a b" (one space)
//   h        = FNV-1a 64 over the key bytes
//   bucket   = h mod dim,   sign = -1 if bit 63 of h is set else +1
//   vector   = sum of sign * e_bucket over keys, then L2-normalized
//
// Image ids missing from the sidecar table get a stub: entry i is
// FNV-1a 64 of "<image_id>#<i>", top 53 bits mapped to [-1, 1), then the
// whole vector is L2-normalized.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "listalign/corpus.h"

namespace listalign {

enum class Provenance { kTextOnly, kImageOnly, kCombined };

struct FeatureVector {
  std::vector<double> values;
  Provenance provenance = Provenance::kTextOnly;
  bool stub = false;  // image part came from the hash fallback

  std::size_t dim() const { return values.size(); }
};

std::vector<std::string> tokenize(std::string_view text);

FeatureVector featurize_text(std::string_view text, std::size_t dim);

/// Precomputed image vectors keyed by image_id, read from JSONL
/// lines of the form {"image_id": ..., "vector": [...]}.
class ImageFeatureTable {
 public:
  static ImageFeatureTable parse(std::istream& in);
  static ImageFeatureTable load(const std::string& path);

  void insert(std::string image_id, std::vector<double> vector);
  const std::vector<double>* find(std::string_view image_id) const;
  std::size_t size() const { return vectors_.size(); }

 private:
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

/// Deterministic stand-in vector for an image without table features.
std::vector<double> stub_image_vector(std::string_view image_id, std::size_t dim);

FeatureVector featurize_image(std::string_view image_id, std::size_t dim,
                              const ImageFeatureTable* table);

/// Concatenation text ++ image; dimensions must agree.
FeatureVector combine_features(const FeatureVector& text_vec,
                               const FeatureVector& image_vec);

/// The scorer's input pipeline: combine(text(item), image(group)).
class Featurizer {
 public:
  explicit Featurizer(std::size_t dim,
                      std::shared_ptr<const ImageFeatureTable> table = nullptr);

  std::size_t dim() const { return dim_; }
  std::size_t input_dim() const { return 2 * dim_; }

  std::vector<double> features(const ListGroup& group, const ListItem& item) const;
  std::vector<double> features(std::string_view image_id, std::string_view text) const;

 private:
  std::size_t dim_;
  std::shared_ptr<const ImageFeatureTable> table_;
};

}  // namespace listalign
