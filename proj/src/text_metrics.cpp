#include "cldsim/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cldsim/error.hpp"

namespace cldsim {

namespace {

// Decodes UTF-8; falls back to raw bytes on malformed input.
std::u32string code_points(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      out.assign(s.begin(), s.end());
      return out;
    }
    char32_t cp = len == 1 ? c : c & (0xFF >> (len + 1));
    for (std::size_t k = 1; k < len; ++k) {
      const auto cont = static_cast<unsigned char>(s[i + k]);
      if ((cont >> 6) != 0x2) {
        out.assign(s.begin(), s.end());
        return out;
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::size_t edit_distance(const std::u32string& a, const std::u32string& b) {
  const std::u32string& shorter = a.size() < b.size() ? a : b;
  const std::u32string& longer = a.size() < b.size() ? b : a;
  std::vector<std::size_t> row(shorter.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= longer.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= shorter.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = longer[i - 1] == shorter[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[shorter.size()];
}

using Ngram = std::vector<std::string_view>;

std::map<Ngram, std::size_t> ngram_counts(std::span<const std::string> tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    Ngram gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
               tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++counts[gram];
  }
  return counts;
}

void require_same_dim(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw Error(ErrorKind::dimension_mismatch,
                "vectors of dim " + std::to_string(u.dim()) + " and " + std::to_string(v.dim()));
  }
}

}  // namespace

TokenSequence tokenize(std::string_view canonical) {
  TokenSequence out;
  std::size_t i = 0;
  while (i < canonical.size()) {
    while (i < canonical.size() && canonical[i] == ' ') ++i;
    std::size_t j = i;
    while (j < canonical.size() && canonical[j] != ' ') ++j;
    if (j > i) out.emplace_back(canonical.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return edit_distance(code_points(a), code_points(b));
}

double fuzzy_ratio(std::string_view a, std::string_view b) {
  const auto ca = code_points(a);
  const auto cb = code_points(b);
  const std::size_t longest = std::max(ca.size(), cb.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(ca, cb)) / static_cast<double>(longest);
}

double bleu(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) {
    throw Error(ErrorKind::invalid_input, "BLEU needs non-empty candidate and reference");
  }
  const std::size_t max_order = std::min<std::size_t>(4, candidate.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_order; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    std::size_t matched = 0;
    for (const auto& [gram, count] : cand) {
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    const std::size_t total = candidate.size() - n + 1;
    if (matched == 0) {
      if (n == 1) return 0.0;
      log_sum += std::log(1.0 / static_cast<double>(total + 1));
    } else {
      log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
    }
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  const double score = brevity * std::exp(log_sum / static_cast<double>(max_order));
  return std::clamp(score, 0.0, 1.0);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  require_same_dim(u, v);
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u.values[i] * v.values[i];
    uu += u.values[i] * u.values[i];
    vv += v.values[i] * v.values[i];
  }
  if (uu == 0.0 || vv == 0.0) throw Error(ErrorKind::zero_norm, "cosine of a zero-norm vector");
  if (u == v) return 1.0;
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double neg_euclidean(const EmbeddingVector& u, const EmbeddingVector& v) {
  require_same_dim(u, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    const double d = u.values[i] - v.values[i];
    sum += d * d;
  }
  return sum == 0.0 ? 0.0 : -std::sqrt(sum);
}

}  // namespace cldsim
