#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

namespace cveval::linalg {

// 0/1 matrix with exactly one unit entry per row, stored as the row -> column
// assignment. Encodes which item / worker produced each response.
class IndicatorMatrix {
 public:
  IndicatorMatrix(std::size_t n_cols, std::vector<std::size_t> row_to_col);

  static IndicatorMatrix identity(std::size_t m);

  std::size_t rows() const { return map_.size(); }
  std::size_t cols() const { return n_cols_; }
  std::size_t col_of(std::size_t row) const { return map_[row]; }
  const std::vector<std::size_t>& assignment() const { return map_; }
  bool is_identity() const;

  Eigen::MatrixXd dense() const;

 private:
  std::size_t n_cols_;
  std::vector<std::size_t> map_;
};

// U U^T: (i, j) entry is 1 iff rows i and j share a column.
Eigen::MatrixXd gram(const IndicatorMatrix& U);

// Diagonal of U^T U: how many rows hit each column. Equals the identity's
// diagonal exactly when every column is used once.
std::vector<std::size_t> column_counts(const IndicatorMatrix& U);

// U^T V: contingency counts of (column-of-U, column-of-V) co-occurrence.
Eigen::MatrixXd cross(const IndicatorMatrix& U, const IndicatorMatrix& V);

// Closed-form (I + k U U^T)^{-1} = I - U diag(k / (1 + k c_j)) U^T.
// Reduces to I - k/(k+1) U U^T when every column count c_j is 1.
Eigen::MatrixXd inv_identity_plus_scaled_gram(double k,
                                              const IndicatorMatrix& U);

// (A + U C V)^{-1} = A^{-1} - A^{-1} U (C^{-1} + V A^{-1} U)^{-1} V A^{-1},
// taking the already-inverted A^{-1} and C^{-1}. Intended for small dense
// problems; the inner solve is rejected when its condition exceeds 1e12.
Eigen::MatrixXd woodbury_inverse(const Eigen::MatrixXd& A_inv,
                                 const Eigen::MatrixXd& U,
                                 const Eigen::MatrixXd& C_inv,
                                 const Eigen::MatrixXd& V);

// y_uv = x_u + w_v + r_uv with x ~ N(mu_X, sigma_X2), w ~ N(0, sigma_W2),
// r ~ N(0, sigma_R2), assignments given by indicator matrices U (items) and
// V (workers). U absent means the identity (every response a distinct item).
struct TwoFactorConfig {
  double mu_X = 0.0;
  double sigma_X2 = 0.0;
  double sigma_W2 = 0.0;
  double sigma_R2 = 0.0;
  IndicatorMatrix V;
  std::optional<IndicatorMatrix> U;
};

// Sigma = (sigma_X2 + sigma_R2) I + sigma_W2 V V^T. Requires U = identity.
Eigen::MatrixXd two_factor_covariance(const TwoFactorConfig& cfg);

// Sigma^{-1} = (1/D) (I - V diag(sigma_W2 / (D + sigma_W2 c_j)) V^T) with
// D = sigma_X2 + sigma_R2. The group-size-aware generalization; matches the
// C I - C' V V^T form exactly when every worker has one response.
Eigen::MatrixXd two_factor_precision(const TwoFactorConfig& cfg);

struct SufficientStats {
  double t1;  // ||y||^2
  double t2;  // ||V^T y||^2
  double t3;  // 1^T y
  double t4;  // 1^T V V^T y
};

SufficientStats sufficient_stats(const Eigen::VectorXd& y,
                                 const IndicatorMatrix& V);

// (1^T Sigma^{-1} y) / (1^T Sigma^{-1} 1): the precision-weighted mean,
// normalized so it is unbiased for the common mean. Sigma must be SPD.
double gls_mean(const Eigen::VectorXd& y, const Eigen::MatrixXd& Sigma);

}  // namespace cveval::linalg
