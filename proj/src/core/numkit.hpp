#pragma once

#include <Eigen/Dense>
#include <optional>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace semibandit {

using Vec = Eigen::VectorXd;

// Dense symmetric positive definite matrix with a lazily refreshed Cholesky
// factor. The bandit policies only ever build these as a scaled identity plus
// nonnegative-weight rank-one terms, so the smallest eigenvalue never drops
// below the diagonal seed and factorization cannot fail for them. The factor
// is recomputed in full on demand after updates; at the dimensions this
// library targets (d up to a few dozen) a full refactorization per round is
// cheaper than guarding an incremental update against drift.
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd entries);

  static SpdMatrix identity(int dim) { return scaled_identity(dim, 1.0); }
  static SpdMatrix scaled_identity(int dim, double scale);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }

  // In-place m += weight * x * x^T. Invalidates the cached factor.
  void add_rank_one(const Vec& x, double weight);

  // Solves m * out = b. Relative residual is at most 1e-8 for the matrices
  // the policies construct.
  Vec solve(const Vec& b) const;

  // sqrt(x^T m^{-1} x)
  double mahalanobis_width(const Vec& x) const;

  double trace() const { return entries_.trace(); }
  double log_det() const;
  double min_eigenvalue() const;

  // Lower-triangular factor L with L L^T = entries. Refreshed when stale.
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const;

 private:
  Eigen::MatrixXd entries_;
  mutable std::optional<Eigen::LLT<Eigen::MatrixXd>> llt_;
};

// Pure rank-one update, returning a fresh matrix.
SpdMatrix rank_one_add(const SpdMatrix& m, const Vec& x, double weight);

// Draw from N(mean, scale^2 * precision^{-1}). scale == 0 returns the mean.
Vec sample_posterior(const Vec& mean, const SpdMatrix& precision, double scale,
                     Rng& rng);

// Uniform draw from the unit sphere in R^dim (normalized Gaussian vector).
Vec sample_unit_sphere(int dim, Rng& rng);

// Standard normal CDF.
double gaussian_cdf(double z);

}  // namespace semibandit
