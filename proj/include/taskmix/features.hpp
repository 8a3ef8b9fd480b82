#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace taskmix {

inline constexpr std::uint32_t kDefaultFeatureDimension = 1u << 18;

/// Sparse vector with strictly increasing indices below `dimension`.
struct FeatureVector {
  std::uint32_t dimension = kDefaultFeatureDimension;
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool empty() const noexcept { return entries.empty(); }

  double norm() const {
    double s = 0.0;
    for (const auto& [_, v] : entries) s += v * v;
    return std::sqrt(s);
  }

  double at(std::uint32_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::uint32_t i) { return e.first < i; });
    return it != entries.end() && it->first == index ? it->second : 0.0;
  }

  bool operator==(const FeatureVector&) const = default;
};

/// Lowercased tokens split on ASCII whitespace and punctuation. Bytes >= 0x80
/// are kept, so UTF-8 sequences stay inside their token.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && !((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      c == '_')) {
      flush();
      continue;
    }
    current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
  }
  flush();
  return tokens;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline std::uint32_t unigram_index(std::string_view tok, std::uint32_t mask) {
  return static_cast<std::uint32_t>(fnv1a(tok, fnv1a("u\x1f")) & mask);
}

inline std::uint32_t bigram_index(std::string_view a, std::string_view b, std::uint32_t mask) {
  auto h = fnv1a(a, fnv1a("b\x1f"));
  h = fnv1a("\x1f", h);
  return static_cast<std::uint32_t>(fnv1a(b, h) & mask);
}

}  // namespace detail

/// Raw hashed unigram + bigram counts (colliding features add up).
/// `dimension` must be a power of two.
inline FeatureVector feature_counts(std::string_view text,
                                    std::uint32_t dimension = kDefaultFeatureDimension) {
  const std::uint32_t mask = dimension - 1;
  const auto tokens = tokenize(text);
  std::vector<std::uint32_t> hits;
  hits.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    hits.push_back(detail::unigram_index(tokens[i], mask));
    if (i + 1 < tokens.size()) hits.push_back(detail::bigram_index(tokens[i], tokens[i + 1], mask));
  }
  std::sort(hits.begin(), hits.end());
  FeatureVector fv;
  fv.dimension = dimension;
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    fv.entries.emplace_back(hits[i], static_cast<double>(j - i));
    i = j;
  }
  return fv;
}

/// Hashed bag of unigrams and bigrams, L2-normalized. Empty text gives the zero vector.
inline FeatureVector featurize(std::string_view text,
                               std::uint32_t dimension = kDefaultFeatureDimension) {
  auto fv = feature_counts(text, dimension);
  const double n = fv.norm();
  if (n > 0.0)
    for (auto& [_, v] : fv.entries) v /= n;
  return fv;
}

}  // namespace taskmix
