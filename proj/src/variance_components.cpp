#include "cveval/variance_components.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cveval/errors.hpp"

namespace cveval {

namespace {

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

}  // namespace

AnnotationTable::AnnotationTable(std::vector<AnnotationRow> rows)
    : rows_(std::move(rows)) {
  std::set<std::string> seen;
  for (const auto& r : rows_) {
    if (r.judgments.empty())
      throw EmptySample("item '" + r.item_id + "' has no judgments");
    if (!seen.insert(r.item_id).second)
      throw DuplicateKey("duplicate item_id '" + r.item_id + "'");
  }
}

std::size_t AnnotationTable::n_judgments() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.judgments.size();
  return n;
}

double estimate_annotator_variance(const AnnotationTable& table) {
  double acc = 0.0;
  std::size_t replicated = 0;
  for (const auto& r : table.rows()) {
    if (r.judgments.size() < 2) continue;
    acc += sample_variance(r.judgments);
    ++replicated;
  }
  if (replicated == 0)
    throw NoReplicatedItems("no item carries >= 2 judgments");
  return acc / static_cast<double>(replicated);
}

double estimate_human_metric_variance(const AnnotationTable& table,
                                      double sigma_a2) {
  if (table.n_items() < 2)
    throw TooFewItems("need >= 2 items to estimate between-item variance");
  std::vector<double> means;
  double inv_k = 0.0;
  means.reserve(table.n_items());
  for (const auto& r : table.rows()) {
    means.push_back(mean_of(r.judgments));
    inv_k += 1.0 / static_cast<double>(r.judgments.size());
  }
  inv_k /= static_cast<double>(table.n_items());
  const double between = sample_variance(means);
  return std::max(0.0, between - sigma_a2 * inv_k);
}

std::map<std::string, double> item_means(const AnnotationTable& table) {
  std::map<std::string, double> out;
  for (const auto& r : table.rows()) out[r.item_id] = mean_of(r.judgments);
  return out;
}

VarianceComponents estimate_variance_components(const AnnotationTable& table) {
  VarianceComponents c;
  c.n_items = table.n_items();
  c.n_judgments = table.n_judgments();
  c.sigma_a2 = estimate_annotator_variance(table);
  std::vector<double> means;
  double inv_k = 0.0;
  for (const auto& r : table.rows()) {
    means.push_back(mean_of(r.judgments));
    inv_k += 1.0 / static_cast<double>(r.judgments.size());
  }
  if (table.n_items() < 2)
    throw TooFewItems("need >= 2 items to estimate between-item variance");
  inv_k /= static_cast<double>(table.n_items());
  const double raw = sample_variance(means) - c.sigma_a2 * inv_k;
  c.clamped = raw < 0.0;
  c.sigma_f2 = std::max(0.0, raw);
  if (c.sigma_f2 > 0.0) c.gamma = c.sigma_a2 / c.sigma_f2;
  return c;
}

AlphaRho estimate_alpha_rho(std::span<const double> f_hat,
                            std::span<const double> g_std) {
  if (f_hat.size() != g_std.size())
    throw LengthMismatch("f and g differ in length");
  if (f_hat.size() < 2) throw TooFewItems("need >= 2 points");
  const double n = static_cast<double>(f_hat.size());
  const double mf = mean_of(f_hat);
  const double mg = mean_of(g_std);
  double cov = 0.0, vf = 0.0, vg = 0.0;
  for (std::size_t i = 0; i < f_hat.size(); ++i) {
    const double df = f_hat[i] - mf;
    const double dg = g_std[i] - mg;
    cov += df * dg;
    vf += df * df;
    vg += dg * dg;
  }
  cov /= n;
  vf /= n;
  vg /= n;
  if (vf <= 0.0) throw DegenerateF("f is constant; rho undefined");
  if (vg <= 0.0) throw DegenerateInput("g is constant; rho undefined");
  return AlphaRho{cov, cov / std::sqrt(vf * vg)};
}

const char* to_string(CorrelationLevel level) {
  return level == CorrelationLevel::instance ? "instance" : "system";
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch("pearson length mismatch");
  if (x.size() < 2) throw TooFewItems("pearson needs >= 2 points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw DegenerateInput("constant input; correlation undefined");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // mean rank, 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

CorrelationReport correlation_report(std::span<const double> x,
                                     std::span<const double> y,
                                     CorrelationLevel level) {
  CorrelationReport rep;
  rep.level = level;
  rep.n = x.size();
  rep.pearson = pearson(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  rep.spearman = pearson(rx, ry);
  return rep;
}

}  // namespace cveval
