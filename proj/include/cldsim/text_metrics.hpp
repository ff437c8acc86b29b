#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cldsim {

using TokenSequence = std::vector<std::string>;

/// Whitespace split of a canonical name.
TokenSequence tokenize(std::string_view canonical);

/// Unit-cost character edit distance. Characters are Unicode code points
/// when the input is valid UTF-8, bytes otherwise.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - levenshtein / max length, in code points; 1 for two empty strings.
double fuzzy_ratio(std::string_view a, std::string_view b);

/// Sentence-level BLEU of `candidate` against one `reference`.
///
/// Orders 1..min(4, |candidate|) with uniform weights. An order n >= 2 with no
/// clipped matches uses (0 + 1) / (total + 1) as its precision. A zero
/// unigram precision yields 0. The brevity penalty exp(1 - r/c) applies when
/// the candidate is shorter than the reference.
/// Throws ErrorKind::invalid_input on an empty sequence.
double bleu(std::span<const std::string> candidate, std::span<const std::string> reference);

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

/// dot(u,v) / (|u| |v|). Throws on dimension mismatch or a zero-norm vector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// -|u - v|_2. Throws on dimension mismatch.
double neg_euclidean(const EmbeddingVector& u, const EmbeddingVector& v);

}  // namespace cldsim
