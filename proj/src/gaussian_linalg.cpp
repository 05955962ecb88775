#include "cveval/gaussian_linalg.hpp"

#include <cmath>
#include <limits>

#include "cveval/errors.hpp"

namespace cveval::linalg {

namespace {

constexpr std::size_t kDimCap = 1000;

void check_dim(std::size_t m) {
  if (m > kDimCap)
    throw DimensionCap("dense dimension " + std::to_string(m) +
                       " exceeds cap of " + std::to_string(kDimCap));
}

}  // namespace

IndicatorMatrix::IndicatorMatrix(std::size_t n_cols,
                                 std::vector<std::size_t> row_to_col)
    : n_cols_(n_cols), map_(std::move(row_to_col)) {
  for (std::size_t c : map_) {
    if (c >= n_cols_)
      throw MalformedAssignment("column index " + std::to_string(c) +
                                " out of range [0, " +
                                std::to_string(n_cols_) + ")");
  }
}

IndicatorMatrix IndicatorMatrix::identity(std::size_t m) {
  std::vector<std::size_t> u(m);
  for (std::size_t i = 0; i < m; ++i) u[i] = i;
  return IndicatorMatrix(m, std::move(u));
}

bool IndicatorMatrix::is_identity() const {
  if (n_cols_ != map_.size()) return false;
  for (std::size_t i = 0; i < map_.size(); ++i)
    if (map_[i] != i) return false;
  return true;
}

Eigen::MatrixXd IndicatorMatrix::dense() const {
  check_dim(std::max(rows(), cols()));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()),
                                            static_cast<Eigen::Index>(cols()));
  for (std::size_t i = 0; i < rows(); ++i)
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(map_[i])) = 1.0;
  return m;
}

Eigen::MatrixXd gram(const IndicatorMatrix& U) {
  check_dim(U.rows());
  const auto m = static_cast<Eigen::Index>(U.rows());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      g(i, j) = U.col_of(static_cast<std::size_t>(i)) ==
                        U.col_of(static_cast<std::size_t>(j))
                    ? 1.0
                    : 0.0;
  return g;
}

std::vector<std::size_t> column_counts(const IndicatorMatrix& U) {
  std::vector<std::size_t> counts(U.cols(), 0);
  for (std::size_t i = 0; i < U.rows(); ++i) ++counts[U.col_of(i)];
  return counts;
}

Eigen::MatrixXd cross(const IndicatorMatrix& U, const IndicatorMatrix& V) {
  if (U.rows() != V.rows())
    throw RowCountMismatch("indicator matrices have different row counts");
  check_dim(std::max(U.cols(), V.cols()));
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(U.cols()), static_cast<Eigen::Index>(V.cols()));
  for (std::size_t k = 0; k < U.rows(); ++k)
    w(static_cast<Eigen::Index>(U.col_of(k)),
      static_cast<Eigen::Index>(V.col_of(k))) += 1.0;
  return w;
}

Eigen::MatrixXd inv_identity_plus_scaled_gram(double k,
                                              const IndicatorMatrix& U) {
  check_dim(U.rows());
  const auto counts = column_counts(U);
  std::vector<double> scale(U.cols());
  for (std::size_t j = 0; j < U.cols(); ++j) {
    const double denom = 1.0 + k * static_cast<double>(counts[j]);
    if (counts[j] > 0 && std::abs(denom) < 1e-12)
      throw SingularShift("1 + k c_j vanishes for column " +
                          std::to_string(j));
    scale[j] = counts[j] > 0 ? k / denom : 0.0;
  }
  const auto m = static_cast<Eigen::Index>(U.rows());
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t ci = U.col_of(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < m; ++j) {
      if (ci == U.col_of(static_cast<std::size_t>(j))) inv(i, j) -= scale[ci];
    }
  }
  return inv;
}

Eigen::MatrixXd woodbury_inverse(const Eigen::MatrixXd& A_inv,
                                 const Eigen::MatrixXd& U,
                                 const Eigen::MatrixXd& C_inv,
                                 const Eigen::MatrixXd& V) {
  check_dim(static_cast<std::size_t>(A_inv.rows()));
  if (A_inv.rows() != A_inv.cols() || C_inv.rows() != C_inv.cols() ||
      U.rows() != A_inv.rows() || U.cols() != C_inv.rows() ||
      V.rows() != C_inv.rows() || V.cols() != A_inv.cols())
    throw RowCountMismatch("woodbury operand shapes do not conform");
  const Eigen::MatrixXd inner = C_inv + V * A_inv * U;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(inner,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues().maxCoeff();
  const double smin = svd.singularValues().minCoeff();
  if (!(smin > 0.0) || smax / smin > 1e12)
    throw SingularInner("C^{-1} + V A^{-1} U is numerically singular");
  const Eigen::MatrixXd solved = svd.solve(V * A_inv);
  return A_inv - A_inv * U * solved;
}

Eigen::MatrixXd two_factor_covariance(const TwoFactorConfig& cfg) {
  if (cfg.U && !cfg.U->is_identity())
    throw NonIdentityU("closed-form covariance requires U = identity");
  check_dim(cfg.V.rows());
  const auto m = static_cast<Eigen::Index>(cfg.V.rows());
  const double d = cfg.sigma_X2 + cfg.sigma_R2;
  Eigen::MatrixXd sigma = d * Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (cfg.V.col_of(static_cast<std::size_t>(i)) ==
          cfg.V.col_of(static_cast<std::size_t>(j)))
        sigma(i, j) += cfg.sigma_W2;
  return sigma;
}

Eigen::MatrixXd two_factor_precision(const TwoFactorConfig& cfg) {
  if (cfg.U && !cfg.U->is_identity())
    throw NonIdentityU("closed-form precision requires U = identity");
  check_dim(cfg.V.rows());
  const double d = cfg.sigma_X2 + cfg.sigma_R2;
  if (!(d > 0.0)) throw SingularD("sigma_X2 + sigma_R2 must be > 0");
  const auto counts = column_counts(cfg.V);
  const auto m = static_cast<Eigen::Index>(cfg.V.rows());
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t ci = cfg.V.col_of(static_cast<std::size_t>(i));
    const double scale =
        cfg.sigma_W2 /
        (d + cfg.sigma_W2 * static_cast<double>(counts[ci]));
    for (Eigen::Index j = 0; j < m; ++j)
      if (ci == cfg.V.col_of(static_cast<std::size_t>(j)))
        inv(i, j) -= scale;
  }
  return inv / d;
}

SufficientStats sufficient_stats(const Eigen::VectorXd& y,
                                 const IndicatorMatrix& V) {
  if (static_cast<std::size_t>(y.size()) != V.rows())
    throw LengthMismatch("y length does not match V row count");
  SufficientStats s{0.0, 0.0, 0.0, 0.0};
  s.t1 = y.squaredNorm();
  s.t3 = y.sum();
  Eigen::VectorXd group = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(V.cols()));
  for (std::size_t i = 0; i < V.rows(); ++i)
    group(static_cast<Eigen::Index>(V.col_of(i))) += y(static_cast<Eigen::Index>(i));
  s.t2 = group.squaredNorm();
  // 1^T V V^T y = sum_i (group sum of i's worker)
  for (std::size_t i = 0; i < V.rows(); ++i)
    s.t4 += group(static_cast<Eigen::Index>(V.col_of(i)));
  return s;
}

double gls_mean(const Eigen::VectorXd& y, const Eigen::MatrixXd& Sigma) {
  if (Sigma.rows() != Sigma.cols() || Sigma.rows() != y.size())
    throw LengthMismatch("Sigma must be square and match y");
  check_dim(static_cast<std::size_t>(Sigma.rows()));
  const double scale = std::max(1.0, Sigma.cwiseAbs().maxCoeff());
  if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NotSPD("Sigma is not symmetric");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Sigma);
  if (ldlt.info() != Eigen::Success ||
      ldlt.vectorD().minCoeff() <= 1e-12)
    throw NotSPD("Sigma is not positive definite (pivot <= 1e-12)");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(y.size());
  const double num = ones.dot(ldlt.solve(y));
  const double den = ones.dot(ldlt.solve(ones));
  return num / den;
}

}  // namespace cveval::linalg
