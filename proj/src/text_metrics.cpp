#include "cveval/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

#include "cveval/errors.hpp"

namespace cveval::text {

namespace {

bool is_space_cp(std::uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return (cp >= 0x2000 && cp <= 0x200A);
  }
}

bool is_punct_cp(std::uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') ||
           (cp >= '[' && cp <= '`') || (cp >= '{' && cp <= '~');
  }
  if (cp == 0xA1 || cp == 0xAB || cp == 0xBB || cp == 0xBF) return true;
  if (cp >= 0x2010 && cp <= 0x2027) return true;  // dashes, quotes, bullets
  if (cp >= 0x2030 && cp <= 0x203E) return true;
  if (cp == 0x2039 || cp == 0x203A) return true;
  if (cp == 0x3001 || cp == 0x3002) return true;  // CJK comma / full stop
  return false;
}

// Decodes the next codepoint; invalid sequences fall back to one byte
// interpreted as latin-1 so the result is total and deterministic.
std::uint32_t next_codepoint(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t k) {
    return static_cast<std::uint8_t>(s[k]);
  };
  const std::uint8_t b0 = byte(i);
  std::size_t len = 0;
  std::uint32_t cp = 0;
  if (b0 < 0x80) {
    ++i;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return b0;
  }
  if (i + len > s.size()) {
    ++i;
    return b0;
  }
  for (std::size_t k = 1; k < len; ++k) {
    if ((byte(i + k) & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (byte(i + k) & 0x3F);
  }
  i += len;
  return cp;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

double f1(double match, double n_cand, double n_ref) {
  if (n_cand <= 0.0 || n_ref <= 0.0) return 0.0;
  const double p = match / n_cand;
  const double r = match / n_ref;
  if (p + r <= 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

// n-gram keys are tokens joined on 0x1f, which the tokenizer never introduces
constexpr char kJoin = '\x1f';

std::unordered_map<std::string, std::size_t> ngram_counts(
    const TokenSequence& toks, std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key.push_back(kJoin);
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  const std::size_t m = a.size(), n = b.size();
  if (m == 0 || n == 0) return 0;
  std::vector<std::size_t> prev(n + 1, 0), cur(n + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1
                                      : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

}  // namespace

TokenSequence tokenize(std::string_view utf8) {
  // decode -> split on whitespace -> per token strip edge punctuation
  TokenSequence out;
  std::vector<std::uint32_t> token;
  const auto flush = [&] {
    if (token.empty()) return;
    std::size_t lo = 0, hi = token.size();
    while (lo < hi && is_punct_cp(token[lo])) ++lo;
    while (hi > lo && is_punct_cp(token[hi - 1])) --hi;
    if (lo < hi) {
      std::string s;
      for (std::size_t k = lo; k < hi; ++k) append_utf8(s, token[k]);
      out.push_back(std::move(s));
    }
    token.clear();
  };
  std::size_t i = 0;
  while (i < utf8.size()) {
    std::uint32_t cp = next_codepoint(utf8, i);
    if (is_space_cp(cp)) {
      flush();
      continue;
    }
    if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
    token.push_back(cp);
  }
  flush();
  return out;
}

double rouge_n(const TokenSequence& candidate, const TokenSequence& reference,
               std::size_t n) {
  if (n == 0) throw ZeroN("rouge_n requires n >= 1");
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  const std::size_t n_cand =
      candidate.size() >= n ? candidate.size() - n + 1 : 0;
  const std::size_t n_ref =
      reference.size() >= n ? reference.size() - n + 1 : 0;
  std::size_t match = 0;
  for (const auto& [gram, c] : cand) {
    const auto it = ref.find(gram);
    if (it != ref.end()) match += std::min(c, it->second);
  }
  return f1(static_cast<double>(match), static_cast<double>(n_cand),
            static_cast<double>(n_ref));
}

double rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  const std::size_t l = lcs_length(candidate, reference);
  return f1(static_cast<double>(l), static_cast<double>(candidate.size()),
            static_cast<double>(reference.size()));
}

double bleu(const TokenSequence& candidate,
            const std::vector<TokenSequence>& references, std::size_t max_n) {
  if (references.empty()) throw NoReferences("bleu needs >= 1 reference");
  if (max_n == 0) throw ZeroN("bleu requires max_n >= 1");
  const std::size_t c = candidate.size();
  if (c == 0) return 0.0;

  // closest reference length; ties broken toward the shorter reference
  std::size_t r = references[0].size();
  for (const auto& ref : references) {
    const std::size_t len = ref.size();
    const auto dist = [&](std::size_t x) {
      return x > c ? x - c : c - x;
    };
    if (dist(len) < dist(r) || (dist(len) == dist(r) && len < r)) r = len;
  }

  double log_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    if (c < n) break;  // no candidate n-grams at this or higher orders
    const auto cand = ngram_counts(candidate, n);
    std::unordered_map<std::string, std::size_t> ref_max;
    for (const auto& ref : references) {
      for (const auto& [gram, cnt] : ngram_counts(ref, n)) {
        auto& slot = ref_max[gram];
        slot = std::max(slot, cnt);
      }
    }
    const double total = static_cast<double>(c - n + 1);
    double clipped = 0.0;
    for (const auto& [gram, cnt] : cand) {
      const auto it = ref_max.find(gram);
      if (it != ref_max.end())
        clipped += static_cast<double>(std::min(cnt, it->second));
    }
    double p = clipped / total;
    if (p == 0.0) {
      if (n == 1) return 0.0;     // no unigram overlap at all
      p = 1.0 / (2.0 * total);    // smoothing for higher orders
    }
    log_sum += std::log(p);
    ++orders;
  }
  const double bp =
      c >= r ? 1.0
             : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum / static_cast<double>(orders));
}

EmbeddingTable::EmbeddingTable(
    std::unordered_map<std::string, std::vector<double>> vectors,
    std::size_t dim)
    : vectors_(std::move(vectors)), dim_(dim) {
  if (dim_ == 0) throw DimensionMismatch("embedding dimension must be >= 1");
  for (const auto& [tok, vec] : vectors_) {
    if (vec.size() != dim_)
      throw DimensionMismatch("token '" + tok + "' has dimension " +
                              std::to_string(vec.size()) + ", expected " +
                              std::to_string(dim_));
  }
}

namespace {

bool is_integer_field(const std::string& s) {
  if (s.empty()) return false;
  std::size_t k = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (k == s.size()) return false;
  for (; k < s.size(); ++k)
    if (s[k] < '0' || s[k] > '9') return false;
  return true;
}

}  // namespace

EmbeddingTable EmbeddingTable::load(std::istream& in) {
  std::unordered_map<std::string, std::vector<double>> vectors;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> fields;
    std::string f;
    while (ls >> f) fields.push_back(f);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      if (fields.size() == 2 && is_integer_field(fields[0]) &&
          is_integer_field(fields[1]))
        continue;  // `N d` header
    }
    if (fields.size() < 2)
      throw ParseError(line_no, "embedding line needs a token and values");
    std::vector<double> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(fields[k], &pos);
        if (pos != fields[k].size()) throw std::invalid_argument(fields[k]);
        vec.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(line_no, "bad embedding value '" + fields[k] + "'");
      }
    }
    if (dim == 0) {
      dim = vec.size();
    } else if (vec.size() != dim) {
      throw DimensionMismatch("line " + std::to_string(line_no) +
                              ": dimension " + std::to_string(vec.size()) +
                              " != " + std::to_string(dim));
    }
    vectors[fields[0]] = std::move(vec);
  }
  if (vectors.empty())
    throw EmptyPopulation("embedding file contains no vectors");
  return EmbeddingTable(std::move(vectors), dim);
}

EmbeddingTable EmbeddingTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingField("cannot open embedding file: " + path);
  return load(in);
}

const std::vector<double>* EmbeddingTable::find(const std::string& token) const {
  const auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second;
}

namespace {

bool sentence_vector(const TokenSequence& toks, const EmbeddingTable& emb,
                     std::vector<double>& out) {
  out.assign(emb.dim(), 0.0);
  std::size_t hits = 0;
  for (const auto& t : toks) {
    if (const auto* v = emb.find(t)) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += (*v)[k];
      ++hits;
    }
  }
  if (hits == 0) return false;
  for (auto& x : out) x /= static_cast<double>(hits);
  return true;
}

}  // namespace

double vec_sim(const TokenSequence& candidate, const TokenSequence& reference,
               const EmbeddingTable& emb) {
  std::vector<double> a, b;
  if (!sentence_vector(candidate, emb, a)) return 0.0;
  if (!sentence_vector(reference, emb, b)) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace cveval::text
