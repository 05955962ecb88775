#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cveval {

// One evaluated output with its repeated human judgments (>= 1) and,
// optionally, the raw automatic metric value.
struct AnnotationRow {
  std::string item_id;
  std::vector<double> judgments;
  std::optional<double> metric;
};

// Item ids are unique; every judgment list is nonempty. An empty table is
// allowed (it only supports item_means).
class AnnotationTable {
 public:
  AnnotationTable() = default;
  explicit AnnotationTable(std::vector<AnnotationRow> rows);

  const std::vector<AnnotationRow>& rows() const { return rows_; }
  std::size_t n_items() const { return rows_.size(); }
  std::size_t n_judgments() const;

 private:
  std::vector<AnnotationRow> rows_;
};

// Mean over items with k_i >= 2 of the unbiased within-item variance.
// Estimates sigma_a2 = E_z Var(Y(z)).
double estimate_annotator_variance(const AnnotationTable& table);

// Method of moments for sigma_f2 = Var f(z) from item means:
//   max(0, S2_between - sigma_a2 * mean_i(1 / k_i))
// where S2_between is the unbiased sample variance of the item means.
double estimate_human_metric_variance(const AnnotationTable& table,
                                      double sigma_a2);

std::map<std::string, double> item_means(const AnnotationTable& table);

struct VarianceComponents {
  double sigma_a2 = 0.0;
  double sigma_f2 = 0.0;
  std::optional<double> gamma;  // sigma_a2 / sigma_f2, absent if sigma_f2 == 0
  std::size_t n_items = 0;
  std::size_t n_judgments = 0;
  bool clamped = false;  // sigma_f2 moment estimate was negative
};

// Convenience wrapper running both moment estimators on one table.
VarianceComponents estimate_variance_components(const AnnotationTable& table);

struct AlphaRho {
  double alpha;  // population covariance of (f_hat, g_std)
  double rho;    // Pearson correlation
};

AlphaRho estimate_alpha_rho(std::span<const double> f_hat,
                            std::span<const double> g_std);

enum class CorrelationLevel { instance, system };

const char* to_string(CorrelationLevel level);

struct CorrelationReport {
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n = 0;
  CorrelationLevel level = CorrelationLevel::instance;
};

double pearson(std::span<const double> x, std::span<const double> y);

// Average ranks; ties get the mean of the positions they occupy.
std::vector<double> average_ranks(std::span<const double> x);

CorrelationReport correlation_report(std::span<const double> x,
                                     std::span<const double> y,
                                     CorrelationLevel level);

}  // namespace cveval
