#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cveval/errors.hpp"
#include "cveval/rng.hpp"
#include "cveval/text_metrics.hpp"

using namespace cveval;
using text::TokenSequence;

namespace {

// quadratic-space full-table LCS, kept independent of the implementation
std::size_t lcs_oracle(const TokenSequence& a, const TokenSequence& b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<std::vector<std::size_t>> d(m + 1,
                                          std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      d[i][j] = a[i - 1] == b[j - 1]
                    ? d[i - 1][j - 1] + 1
                    : std::max(d[i - 1][j], d[i][j - 1]);
  return d[m][n];
}

std::string join(const TokenSequence& toks) {
  std::string s;
  for (const auto& t : toks) {
    if (!s.empty()) s += ' ';
    s += t;
  }
  return s;
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(text::tokenize("The cat sat.") == TokenSequence{"the", "cat", "sat"});
  CHECK(text::tokenize("") == TokenSequence{});
  CHECK(text::tokenize("A  a,  A!") == TokenSequence{"a", "a", "a"});
  CHECK(text::tokenize("  \t\n ") == TokenSequence{});
  CHECK(text::tokenize("'quoted' -- (parens)") ==
        TokenSequence{"quoted", "parens"});
  CHECK(text::tokenize("don't co-op") == TokenSequence{"don't", "co-op"});
  // unicode whitespace (NBSP, ideographic space) and curly quotes
  CHECK(text::tokenize("a b　c") == TokenSequence{"a", "b", "c"});
  CHECK(text::tokenize("“hello”") == TokenSequence{"hello"});

  SUBCASE("idempotent on its own joined output") {
    auto rng = Xoshiro256pp(12);
    const std::string alphabet = "aBc.,!d \te f'G-";
    for (int rep = 0; rep < 200; ++rep) {
      std::string s;
      const std::size_t len = rng.below(40);
      for (std::size_t i = 0; i < len; ++i)
        s += alphabet[static_cast<std::size_t>(rng.below(alphabet.size()))];
      const auto once = text::tokenize(s);
      CHECK(text::tokenize(join(once)) == once);
    }
  }
}

TEST_CASE("rouge_n") {
  const auto cat = text::tokenize("the cat sat");
  const auto ref = text::tokenize("the cat was sad");
  CHECK(text::rouge_n(cat, cat, 1) == doctest::Approx(1.0));
  CHECK(text::rouge_n(text::tokenize("a b"), text::tokenize("c d"), 1) == 0.0);
  CHECK(text::rouge_n(cat, ref, 1) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK_THROWS_AS(text::rouge_n(cat, ref, 0), ZeroN);
  // repeated tokens are clipped
  CHECK(text::rouge_n(text::tokenize("a a a"), text::tokenize("a b"), 1) ==
        doctest::Approx(2.0 * (1.0 / 3.0) * 0.5 / (1.0 / 3.0 + 0.5)));
  // n larger than either side
  CHECK(text::rouge_n(cat, ref, 5) == 0.0);
  CHECK(text::rouge_n(TokenSequence{}, ref, 1) == 0.0);
}

TEST_CASE("rouge_l") {
  const auto cat = text::tokenize("the cat sat");
  const auto ref = text::tokenize("the cat was sad");
  CHECK(text::rouge_l(cat, cat) == doctest::Approx(1.0));
  CHECK(text::rouge_l(cat, ref) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(text::rouge_l(text::tokenize("a b"), text::tokenize("b a")) ==
        doctest::Approx(0.5));
  CHECK(text::rouge_l(TokenSequence{}, ref) == 0.0);

  SUBCASE("matches the quadratic-space oracle on random pairs") {
    auto rng = Xoshiro256pp(13);
    const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
    for (int rep = 0; rep < 1000; ++rep) {
      TokenSequence a(rng.below(13)), b(rng.below(13));
      for (auto& t : a) t = vocab[static_cast<std::size_t>(rng.below(5))];
      for (auto& t : b) t = vocab[static_cast<std::size_t>(rng.below(5))];
      const std::size_t l = lcs_oracle(a, b);
      double expect = 0.0;
      if (!a.empty() && !b.empty() && l > 0) {
        const double p = static_cast<double>(l) / a.size();
        const double r = static_cast<double>(l) / b.size();
        expect = 2.0 * p * r / (p + r);
      }
      CHECK(text::rouge_l(a, b) == doctest::Approx(expect).epsilon(1e-15));
    }
  }
}

TEST_CASE("bleu") {
  const auto cand = text::tokenize("the the the");
  const auto ref = text::tokenize("the cat");
  SUBCASE("identity") {
    const auto s = text::tokenize("a small example sentence");
    CHECK(text::bleu(s, {s}) == doctest::Approx(1.0));
  }
  SUBCASE("clipped counts") {
    CHECK(text::bleu(cand, {ref}, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("no overlap") {
    CHECK(text::bleu(text::tokenize("x y z"), {ref}) == 0.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(text::bleu(cand, {}), NoReferences);
  }
  SUBCASE("brevity penalty picks the closest reference") {
    const auto c = text::tokenize("a b c");
    const auto long_ref = text::tokenize("a b c d e f");
    // closest reference has length 3 -> BP = 1
    CHECK(text::bleu(c, {long_ref, c}, 1) == doctest::Approx(1.0));
    // only the long reference: BP = exp(1 - 6/3)
    CHECK(text::bleu(c, {long_ref}, 1) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }
  SUBCASE("equals rouge-1 precision times BP without repeats") {
    const auto c = text::tokenize("a b c");
    const auto r = text::tokenize("b c d e");
    const double p1 = 2.0 / 3.0;
    const double expect = std::exp(1.0 - 4.0 / 3.0) * p1;  // BP since c < r
    CHECK(text::bleu(c, {r}, 1) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("short candidates drop the missing orders") {
    const auto c = text::tokenize("a b");
    const auto r = text::tokenize("a b");
    CHECK(text::bleu(c, {r}, 4) == doctest::Approx(1.0));
  }
  SUBCASE("higher-order zero precision is smoothed, not fatal") {
    const auto c = text::tokenize("a c b");
    const auto r = text::tokenize("a b c");
    const double v = text::bleu(c, {r}, 2);
    // p1 = 1, p2 = 0 -> smoothed to 1/(2*2)
    CHECK(v == doctest::Approx(std::sqrt(1.0 * 0.25)).epsilon(1e-12));
  }
}

TEST_CASE("embeddings and vec_sim") {
  std::istringstream in("a 1 0\nb 0 1\nc 0.5 0.5\n");
  const auto emb = text::EmbeddingTable::load(in);
  CHECK(emb.dim() == 2);
  CHECK(emb.size() == 3);

  SUBCASE("identical sentences") {
    CHECK(text::vec_sim({"a", "b"}, {"a", "b"}, emb) == doctest::Approx(1.0));
  }
  SUBCASE("orthogonal vectors") {
    CHECK(text::vec_sim({"a"}, {"b"}, emb) == doctest::Approx(0.0));
  }
  SUBCASE("mean vector hand value") {
    CHECK(text::vec_sim({"a"}, {"a", "b"}, emb) ==
          doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  }
  SUBCASE("out-of-vocabulary tokens are skipped") {
    CHECK(text::vec_sim({"a", "zzz"}, {"a"}, emb) == doctest::Approx(1.0));
    CHECK(text::vec_sim({"zzz"}, {"a"}, emb) == 0.0);
  }
  SUBCASE("header line is detected") {
    std::istringstream h("3 2\na 1 0\nb 0 1\nc 0.5 0.5\n");
    const auto e2 = text::EmbeddingTable::load(h);
    CHECK(e2.size() == 3);
    CHECK(e2.dim() == 2);
  }
  SUBCASE("ragged rows are rejected") {
    std::istringstream bad("a 1 0\nb 1\n");
    CHECK_THROWS_AS(text::EmbeddingTable::load(bad), DimensionMismatch);
  }
}

TEST_CASE("metric ranges and identity fixed points") {
  auto rng = Xoshiro256pp(14);
  const std::vector<std::string> vocab{"u", "v", "w", "x", "y", "z"};
  for (int rep = 0; rep < 300; ++rep) {
    TokenSequence a(1 + rng.below(10)), b(1 + rng.below(10));
    for (auto& t : a) t = vocab[static_cast<std::size_t>(rng.below(6))];
    for (auto& t : b) t = vocab[static_cast<std::size_t>(rng.below(6))];
    for (double v : {text::rouge_n(a, b, 1), text::rouge_n(a, b, 2),
                     text::rouge_l(a, b), text::bleu(a, {b})}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }
    CHECK(text::rouge_n(a, a, 1) == doctest::Approx(1.0));
    CHECK(text::rouge_l(a, a) == doctest::Approx(1.0));
    CHECK(text::bleu(a, {a}) == doctest::Approx(1.0));
  }
}
