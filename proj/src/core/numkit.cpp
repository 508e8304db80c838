#include "core/numkit.hpp"

#include <cmath>
#include <string>

namespace semibandit {

namespace {

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  require(m.allFinite(), ErrorCode::numeric_error,
          std::string(what) + ": non-finite entries");
}

}  // namespace

SpdMatrix::SpdMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  require(entries_.rows() >= 1 && entries_.rows() == entries_.cols(),
          ErrorCode::invalid_argument, "SpdMatrix: square matrix required");
  check_finite(entries_, "SpdMatrix");
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * scale, ErrorCode::invalid_argument,
          "SpdMatrix: matrix is not symmetric");
}

SpdMatrix SpdMatrix::scaled_identity(int dim, double scale) {
  require(dim >= 1, ErrorCode::invalid_argument, "SpdMatrix: dim must be >= 1");
  require(scale > 0.0 && std::isfinite(scale), ErrorCode::invalid_argument,
          "SpdMatrix: scale must be positive");
  return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim) * scale);
}

void SpdMatrix::add_rank_one(const Vec& x, double weight) {
  require(x.size() == entries_.rows(), ErrorCode::invalid_argument,
          "rank_one_add: dimension mismatch");
  require(weight >= 0.0 && std::isfinite(weight), ErrorCode::invalid_argument,
          "rank_one_add: weight must be nonnegative");
  require(x.allFinite(), ErrorCode::numeric_error,
          "rank_one_add: non-finite vector");
  if (weight == 0.0) return;
  entries_.selfadjointView<Eigen::Lower>().rankUpdate(x, weight);
  // rankUpdate touches the lower triangle only; mirror it.
  entries_.triangularView<Eigen::StrictlyUpper>() =
      entries_.transpose().triangularView<Eigen::StrictlyUpper>();
  llt_.reset();
}

const Eigen::LLT<Eigen::MatrixXd>& SpdMatrix::cholesky() const {
  if (!llt_) {
    llt_.emplace(entries_);
    if (llt_->info() != Eigen::Success) {
      llt_.reset();
      fail(ErrorCode::numeric_error, "SpdMatrix: Cholesky factorization failed");
    }
  }
  return *llt_;
}

Vec SpdMatrix::solve(const Vec& b) const {
  require(b.size() == entries_.rows(), ErrorCode::invalid_argument,
          "solve_spd: dimension mismatch");
  require(b.allFinite(), ErrorCode::numeric_error,
          "solve_spd: non-finite right-hand side");
  return cholesky().solve(b);
}

double SpdMatrix::mahalanobis_width(const Vec& x) const {
  require(x.size() == entries_.rows(), ErrorCode::invalid_argument,
          "mahalanobis_width: dimension mismatch");
  // x^T m^{-1} x = ||L^{-1} x||^2
  const Vec half = cholesky().matrixL().solve(x);
  return half.norm();
}

double SpdMatrix::log_det() const {
  // det = prod(L_ii)^2
  return 2.0 * cholesky().matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double SpdMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries_,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

SpdMatrix rank_one_add(const SpdMatrix& m, const Vec& x, double weight) {
  SpdMatrix out = m;
  out.add_rank_one(x, weight);
  return out;
}

Vec sample_posterior(const Vec& mean, const SpdMatrix& precision, double scale,
                     Rng& rng) {
  require(mean.size() == precision.dim(), ErrorCode::invalid_argument,
          "sample_posterior: dimension mismatch");
  require(scale >= 0.0 && std::isfinite(scale), ErrorCode::invalid_argument,
          "sample_posterior: scale must be nonnegative");
  if (scale == 0.0) return mean;
  Vec z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  // cov(L^{-T} z) = (L L^T)^{-1} = precision^{-1}
  Vec shift = precision.cholesky().matrixU().solve(z);
  return mean + scale * shift;
}

Vec sample_unit_sphere(int dim, Rng& rng) {
  require(dim >= 1, ErrorCode::invalid_argument,
          "sample_unit_sphere: dim must be >= 1");
  Vec z(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) z[i] = rng.normal();
    norm = z.norm();
  } while (norm < 1e-12);
  return z / norm;
}

double gaussian_cdf(double z) {
  require(std::isfinite(z), ErrorCode::invalid_argument,
          "gaussian_cdf: non-finite input");
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace semibandit
