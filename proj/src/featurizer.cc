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

#include "listalign/featurizer.h"

#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"
#include "listalign/errors.h"
#include "listalign/hash.h"

namespace listalign {

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) ||
         (c >= 0x5b && c <= 0x60) || (c >= 0x7b && c <= 0x7e);
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0a: case 0x0b: case 0x0c: case 0x0d: case 0x20:
    case 0x85: case 0xa0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202f: case 0x205f: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200a;
  }
}

// Decodes one UTF-8 sequence at pos; invalid bytes decode as themselves.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t* len) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t k) -> int {
    if (pos + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + k]);
    return (b & 0xc0) == 0x80 ? (b & 0x3f) : -1;
  };
  if (b0 < 0x80) {
    *len = 1;
    return b0;
  }
  if ((b0 & 0xe0) == 0xc0) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      *len = 2;
      return (static_cast<char32_t>(b0 & 0x1f) << 6) | static_cast<char32_t>(c1);
    }
  } else if ((b0 & 0xf0) == 0xe0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      *len = 3;
      return (static_cast<char32_t>(b0 & 0x0f) << 12) |
             (static_cast<char32_t>(c1) << 6) | static_cast<char32_t>(c2);
    }
  } else if ((b0 & 0xf8) == 0xf0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      *len = 4;
      return (static_cast<char32_t>(b0 & 0x07) << 18) |
             (static_cast<char32_t>(c1) << 12) | (static_cast<char32_t>(c2) << 6) |
             static_cast<char32_t>(c3);
    }
  }
  *len = 1;
  return b0;
}

void add_hashed(std::string_view key, std::vector<double>& out) {
  const std::uint64_t h = fnv1a64(key);
  const std::size_t bucket = static_cast<std::size_t>(h % out.size());
  out[bucket] += (h >> 63) ? -1.0 : 1.0;
}

void l2_normalize(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = 1;
    const char32_t cp = decode_utf8(text, pos, &len);
    if (is_unicode_space(cp)) {
      flush();
    } else if (len == 1) {
      const auto c = static_cast<unsigned char>(text[pos]);
      if (!is_ascii_punct(c)) {
        current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                                 : static_cast<char>(c));
      }
    } else {
      current.append(text.substr(pos, len));
    }
    pos += len;
  }
  flush();
  return tokens;
}

FeatureVector featurize_text(std::string_view text, std::size_t dim) {
  if (dim == 0) throw DimensionError("feature dimension must be positive");
  FeatureVector fv;
  fv.values.assign(dim, 0.0);
  fv.provenance = Provenance::kTextOnly;
  const auto tokens = tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add_hashed(tokens[i], fv.values);
    if (i + 1 < tokens.size()) add_hashed(tokens[i] + " " + tokens[i + 1], fv.values);
  }
  l2_normalize(fv.values);
  return fv;
}

ImageFeatureTable ImageFeatureTable::parse(std::istream& in) {
  ImageFeatureTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("image_id") || !j["image_id"].is_string() ||
        !j.contains("vector") || !j["vector"].is_array()) {
      throw ParseError(line_no, "expected {\"image_id\": string, \"vector\": [numbers]}");
    }
    std::vector<double> v;
    for (const auto& x : j["vector"]) {
      if (!x.is_number()) throw ParseError(line_no, "vector entries must be numbers");
      v.push_back(x.get<double>());
      if (!std::isfinite(v.back())) throw ParseError(line_no, "vector entries must be finite");
    }
    table.insert(j["image_id"].get<std::string>(), std::move(v));
  }
  return table;
}

ImageFeatureTable ImageFeatureTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open image feature table '" + path + "'");
  return parse(in);
}

void ImageFeatureTable::insert(std::string image_id, std::vector<double> vector) {
  vectors_[std::move(image_id)] = std::move(vector);
}

const std::vector<double>* ImageFeatureTable::find(std::string_view image_id) const {
  auto it = vectors_.find(std::string(image_id));
  return it == vectors_.end() ? nullptr : &it->second;
}

std::vector<double> stub_image_vector(std::string_view image_id, std::size_t dim) {
  std::vector<double> v(dim);
  std::string key(image_id);
  key.push_back('#');
  const std::size_t prefix = key.size();
  for (std::size_t i = 0; i < dim; ++i) {
    key.resize(prefix);
    key += std::to_string(i);
    const std::uint64_t h = fnv1a64(key);
    v[i] = static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
  }
  l2_normalize(v);
  return v;
}

FeatureVector featurize_image(std::string_view image_id, std::size_t dim,
                              const ImageFeatureTable* table) {
  if (dim == 0) throw DimensionError("feature dimension must be positive");
  FeatureVector fv;
  fv.provenance = Provenance::kImageOnly;
  if (table != nullptr) {
    if (const auto* stored = table->find(image_id)) {
      if (stored->size() != dim) {
        throw DimensionError("image '" + std::string(image_id) + "' has a " +
                             std::to_string(stored->size()) +
                             "-dim table vector, expected " + std::to_string(dim));
      }
      fv.values = *stored;
      return fv;
    }
  }
  fv.values = stub_image_vector(image_id, dim);
  fv.stub = true;
  return fv;
}

FeatureVector combine_features(const FeatureVector& text_vec,
                               const FeatureVector& image_vec) {
  if (text_vec.dim() != image_vec.dim()) {
    throw DimensionError("cannot combine features of dims " +
                         std::to_string(text_vec.dim()) + " and " +
                         std::to_string(image_vec.dim()));
  }
  FeatureVector out;
  out.values.reserve(2 * text_vec.dim());
  out.values.insert(out.values.end(), text_vec.values.begin(), text_vec.values.end());
  out.values.insert(out.values.end(), image_vec.values.begin(), image_vec.values.end());
  out.provenance = Provenance::kCombined;
  out.stub = image_vec.stub;
  return out;
}

Featurizer::Featurizer(std::size_t dim, std::shared_ptr<const ImageFeatureTable> table)
    : dim_(dim), table_(std::move(table)) {
  if (dim_ == 0) throw DimensionError("feature dimension must be positive");
}

std::vector<double> Featurizer::features(const ListGroup& group,
                                         const ListItem& item) const {
  return features(group.image_id, item.text);
}

std::vector<double> Featurizer::features(std::string_view image_id,
                                         std::string_view text) const {
  return combine_features(featurize_text(text, dim_),
                          featurize_image(image_id, dim_, table_.get()))
      .values;
}

}  // namespace listalign
