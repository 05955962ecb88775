#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cveval::text {

using TokenSequence = std::vector<std::string>;

// Deterministic tokenizer shared by all word-overlap metrics:
// lowercase ASCII letters, split on Unicode whitespace, strip leading and
// trailing punctuation from each token, drop tokens that end up empty.
// Invalid UTF-8 bytes are kept as single latin-1 codepoints.
TokenSequence tokenize(std::string_view utf8);

// Clipped n-gram overlap F1. 0 when either side has no n-grams.
double rouge_n(const TokenSequence& candidate, const TokenSequence& reference,
               std::size_t n);

// Longest-common-subsequence F1. 0 on empty input.
double rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

// Sentence-level BLEU with uniform weights over orders 1..max_n.
//
// Modified n-gram precisions are clipped against the per-reference maximum
// counts. Orders with no candidate n-grams (candidate shorter than n) are
// excluded from the geometric mean. A zero precision at order n >= 2 is
// smoothed to 1 / (2 * #candidate n-grams); zero unigram precision means
// BLEU = 0. Brevity penalty uses the reference closest in length to the
// candidate (ties go to the shorter reference).
double bleu(const TokenSequence& candidate,
            const std::vector<TokenSequence>& references,
            std::size_t max_n = 4);

// token -> vector map with a fixed dimension. Out-of-vocabulary tokens are
// skipped when embedding a sentence.
class EmbeddingTable {
 public:
  EmbeddingTable(std::unordered_map<std::string, std::vector<double>> vectors,
                 std::size_t dim);

  // Text format: one line per token, `token v1 v2 ... vd`. An optional
  // first line `N d` (exactly two integer fields) is skipped. Later
  // duplicates of a token overwrite earlier ones.
  static EmbeddingTable load(std::istream& in);
  static EmbeddingTable load_file(const std::string& path);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const std::vector<double>* find(const std::string& token) const;

 private:
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::size_t dim_;
};

// Cosine similarity of mean in-vocabulary word vectors; 0 when either side
// has no in-vocabulary token or a zero sentence vector.
double vec_sim(const TokenSequence& candidate, const TokenSequence& reference,
               const EmbeddingTable& emb);

}  // namespace cveval::text
