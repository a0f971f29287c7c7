//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLMETRIC_FRECHET_HPP
#define MOLMETRIC_FRECHET_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "molmetric/error.hpp"
#include "molmetric/parallel.hpp"

namespace molmetric::frechet {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kDefaultEps = 1e-6;

/// Mean vector, unbiased (n - 1) covariance and sample count of an embedding
/// set.
template <typename Scalar = double>
struct GaussianStats {
  Vector<Scalar> mean;
  Matrix<Scalar> cov;
  std::int64_t n = 0;

  Eigen::Index dim() const { return mean.size(); }
};

/// Streaming first and second moments.
///
/// Samples arrive in row blocks; each block's centred scatter matrix is
/// merged with the running state through the pairwise update of Chan,
/// Golub and LeVeque, so no more than one block of centred samples is held
/// at a time. Accumulation is always in double precision.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(Eigen::Index dim)
      : mean_(Vector<double>::Zero(dim)), scatter_(Matrix<double>::Zero(dim, dim)) { }

  Eigen::Index dim() const { return mean_.size(); }
  std::int64_t count() const { return n_; }

  /// Adds every row of `rows` as one sample.
  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& rows) {
    if (rows.rows() == 0) return;
    if (rows.cols() != dim()) {
      throw InputError("DimensionMismatch: sample has " +
                       std::to_string(rows.cols()) + " values, expected " +
                       std::to_string(dim()));
    }
    Matrix<double> block = rows.template cast<double>();
    if (!block.allFinite()) throw InputError("NonFiniteInput in embeddings");

    const auto b = static_cast<double>(block.rows());
    const Vector<double> block_mean = block.colwise().mean().transpose();
    block.rowwise() -= block_mean.transpose();
    Matrix<double> block_scatter = Matrix<double>::Zero(dim(), dim());
    block_scatter.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    block_scatter.template triangularView<Eigen::StrictlyUpper>() =
        block_scatter.transpose();
    merge(block_mean, block_scatter, b);
  }

  void merge(const MomentAccumulator& other) {
    if (other.dim() != dim()) throw InputError("DimensionMismatch in merge");
    if (other.n_ == 0) return;
    merge(other.mean_, other.scatter_, static_cast<double>(other.n_));
  }

  GaussianStats<double> finalize() const {
    if (n_ < 2) {
      throw InputError("InsufficientSamples: need at least 2 embeddings, got " +
                       std::to_string(n_));
    }
    GaussianStats<double> out;
    out.mean = mean_;
    out.cov = scatter_ / static_cast<double>(n_ - 1);
    out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
    out.n = n_;
    return out;
  }

 private:
  void merge(const Vector<double>& mean, const Matrix<double>& scatter,
             double count) {
    const double total = static_cast<double>(n_) + count;
    const Vector<double> delta = mean - mean_;
    scatter_ += scatter;
    scatter_.noalias() +=
        (static_cast<double>(n_) * count / total) * (delta * delta.transpose());
    mean_ += (count / total) * delta;
    n_ += static_cast<std::int64_t>(count);
  }

  Vector<double> mean_;
  Matrix<double> scatter_;
  std::int64_t n_ = 0;
};

inline constexpr Eigen::Index kStatsBlockRows = 256;
inline constexpr Eigen::Index kStatsShardRows = 8192;

/// Statistics of the rows of `samples`. Rows are split into fixed-size
/// shards whose partial moments are merged in shard order, so the result is
/// identical for any thread count.
template <typename Derived>
GaussianStats<double> estimate_stats(const Eigen::MatrixBase<Derived>& samples) {
  const Eigen::Index n = samples.rows();
  if (n < 2) {
    throw InputError("InsufficientSamples: need at least 2 embeddings, got " +
                     std::to_string(n));
  }
  const Eigen::Index shards = (n + kStatsShardRows - 1) / kStatsShardRows;
  std::vector<MomentAccumulator> partial(
      static_cast<std::size_t>(shards), MomentAccumulator(samples.cols()));
  parallel_for(static_cast<std::size_t>(shards), [&](std::size_t s) {
    const Eigen::Index begin = Eigen::Index(s) * kStatsShardRows;
    const Eigen::Index end = std::min(n, begin + kStatsShardRows);
    for (Eigen::Index r = begin; r < end; r += kStatsBlockRows) {
      const Eigen::Index rows = std::min(kStatsBlockRows, end - r);
      partial[s].add(samples.middleRows(r, rows));
    }
  });
  MomentAccumulator total(samples.cols());
  for (const MomentAccumulator& p : partial) total.merge(p);
  return total.finalize();
}

/// Symmetric PSD square root through eigendecomposition; negative
/// eigenvalues are clamped to zero.
template <typename Derived>
Matrix<typename Derived::Scalar> psd_sqrt(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(a);
  const Vector<Scalar> root = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

struct FrechetOptions {
  double eps = kDefaultEps;
  // Add eps * I to both covariances up front instead of only on retry.
  bool always_regularize = false;
};

struct TraceSqrt {
  double value = 0.0;
  double shift = 0.0;  // eps actually added to both covariances
};

/// A covariance prepared for repeated Tr((C Cw)^{1/2}) evaluations: its
/// eigendecomposition is computed once and reused for every partner.
class SqrtFactor {
 public:
  SqrtFactor() = default;
  template <typename Derived>
  explicit SqrtFactor(const Eigen::MatrixBase<Derived>& cov) {
    check_symmetric(cov, "covariance");
    es_.compute(cov.template cast<double>());
    if (es_.info() != Eigen::Success) {
      throw NumericalError("NumericalFailure: eigendecomposition failed");
    }
  }

  Eigen::Index dim() const { return es_.eigenvalues().size(); }

  /// (C + shift I)^{1/2}
  Matrix<double> root(double shift) const {
    const Vector<double> r =
        (es_.eigenvalues().array() + shift).cwiseMax(0.0).sqrt().matrix();
    return es_.eigenvectors() * r.asDiagonal() * es_.eigenvectors().transpose();
  }

  /// Tr(((C + s I)(Cw + s I))^{1/2}) as the sum of square roots of the
  /// eigenvalues of the symmetrised A (Cw + s I) A, A = (C + s I)^{1/2}.
  /// s = 0 unless regularisation is forced or the first attempt reveals a
  /// non-PSD product, in which case one retry with s = eps is made.
  template <typename Derived>
  TraceSqrt trace_sqrt_product(const Eigen::MatrixBase<Derived>& partner,
                               const FrechetOptions& opts = {}) const {
    if (partner.rows() != dim() || partner.cols() != dim()) {
      throw InputError("DimensionMismatch: covariance is " +
                       std::to_string(partner.rows()) + "x" +
                       std::to_string(partner.cols()) + ", expected " +
                       std::to_string(dim()));
    }
    check_symmetric(partner, "covariance");
    const Matrix<double> cw = partner.template cast<double>();
    double shift = opts.always_regularize ? opts.eps : 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
      const Matrix<double> a = root(shift);
      Matrix<double> cw_shifted = cw;
      cw_shifted.diagonal().array() += shift;
      Matrix<double> tmp = a * cw_shifted;
      Matrix<double> s = tmp * a;
      s = (0.5 * (s + s.transpose())).eval();
      Eigen::SelfAdjointEigenSolver<Matrix<double>> es(s, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) {
        throw NumericalError("NumericalFailure: eigendecomposition failed");
      }
      const Vector<double>& lambda = es.eigenvalues();
      const double max_l = lambda.size() ? lambda.maxCoeff() : 0.0;
      const double min_l = lambda.size() ? lambda.minCoeff() : 0.0;
      if (min_l < -opts.eps * std::max(1.0, max_l)) {
        if (shift == 0.0) {
          shift = opts.eps;
          continue;
        }
        throw NumericalError(
            "NotPSD: eigenvalue " + std::to_string(min_l) +
            " of the covariance product remains negative after regularisation");
      }
      // Without a shift, eigenvalues at rounding level are zero; their square
      // roots would otherwise inflate the trace on rank-deficient inputs.
      const double floor = shift > 0.0 ? 0.0
                                       : static_cast<double>(dim()) *
                                             std::numeric_limits<double>::epsilon() *
                                             std::max(0.0, max_l);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > floor) sum += std::sqrt(lambda(i));
      }
      return {sum, shift};
    }
    throw NumericalError("NotPSD: covariance product is not positive semidefinite");
  }

 private:
  template <typename Derived>
  static void check_symmetric(const Eigen::MatrixBase<Derived>& m,
                              const char* what) {
    if (m.rows() != m.cols()) {
      throw InputError(std::string("DimensionMismatch: ") + what +
                       " is not square");
    }
    const double scale = std::max(1.0, double(m.cwiseAbs().maxCoeff()));
    if (double((m - m.transpose()).cwiseAbs().maxCoeff()) > 1e-9 * scale) {
      throw InputError(std::string(what) + " is not symmetric");
    }
    if (!m.allFinite()) throw InputError(std::string(what) + " is not finite");
  }

  Eigen::SelfAdjointEigenSolver<Matrix<double>> es_;
};

/// Tr((C Cw)^{1/2}) for PSD C and Cw.
template <typename DerivedA, typename DerivedB>
double trace_sqrt_product(const Eigen::MatrixBase<DerivedA>& c,
                          const Eigen::MatrixBase<DerivedB>& cw,
                          double eps = kDefaultEps) {
  if (c.rows() != cw.rows() || c.cols() != cw.cols()) {
    throw InputError("DimensionMismatch: covariances differ in shape");
  }
  FrechetOptions opts;
  opts.eps = eps;
  return SqrtFactor(c).trace_sqrt_product(cw, opts).value;
}

namespace detail {

inline double assemble(double mean_term, double trace_c, double trace_cw,
                       const TraceSqrt& ts, Eigen::Index dim) {
  const double reg = 2.0 * ts.shift * static_cast<double>(dim);
  double d2 = mean_term + trace_c + trace_cw + reg - 2.0 * ts.value;
  if (!std::isfinite(d2)) {
    throw NumericalError("NumericalFailure: Frechet distance is not finite");
  }
  if (d2 < 0.0) {
    if (-d2 <= 1e-8 * (1.0 + std::abs(d2))) return 0.0;
    throw NumericalError("NumericalFailure: squared Frechet distance " +
                         std::to_string(d2) + " is negative");
  }
  return d2;
}

}  // namespace detail

/// Squared Frechet (Wasserstein-2) distance between two Gaussians:
/// |m - mw|^2 + Tr(C) + Tr(Cw) - 2 Tr((C Cw)^{1/2}). When regularisation is
/// applied both traces include the eps shift as well.
inline double frechet_distance(const GaussianStats<double>& a,
                               const GaussianStats<double>& b,
                               const FrechetOptions& opts = {}) {
  if (a.dim() != b.dim()) {
    throw InputError("DimensionMismatch: " + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()));
  }
  const TraceSqrt ts = SqrtFactor(a.cov).trace_sqrt_product(b.cov, opts);
  return detail::assemble((a.mean - b.mean).squaredNorm(), a.cov.trace(),
                          b.cov.trace(), ts, a.dim());
}

inline double frechet_distance(const GaussianStats<double>& a,
                               const GaussianStats<double>& b, double eps) {
  FrechetOptions opts;
  opts.eps = eps;
  return frechet_distance(a, b, opts);
}

/// Reference statistics with a cached eigendecomposition, for scoring many
/// sets against one reference.
class FrechetReference {
 public:
  explicit FrechetReference(GaussianStats<double> stats)
      : stats_(std::move(stats)), factor_(stats_.cov) { }

  const GaussianStats<double>& stats() const { return stats_; }

  double distance(const GaussianStats<double>& other,
                  const FrechetOptions& opts = {}) const {
    if (other.dim() != stats_.dim()) {
      throw InputError("DimensionMismatch: " + std::to_string(other.dim()) +
                       " vs " + std::to_string(stats_.dim()));
    }
    const TraceSqrt ts = factor_.trace_sqrt_product(other.cov, opts);
    return detail::assemble((stats_.mean - other.mean).squaredNorm(),
                            stats_.cov.trace(), other.cov.trace(), ts,
                            stats_.dim());
  }

 private:
  GaussianStats<double> stats_;
  SqrtFactor factor_;
};

// ---------------------------------------------------------------------------
// Stats files: a JSON manifest plus a raw payload of little-endian float64
// values, the mean followed by the row-major covariance.
// ---------------------------------------------------------------------------

struct StatsFile {
  GaussianStats<double> stats;
  double eps_used = kDefaultEps;
  std::string covariance = "unbiased";
};

/// Writes `manifest` and `manifest` + ".bin".
void save_stats(const std::filesystem::path& manifest,
                const GaussianStats<double>& stats, double eps_used = kDefaultEps);
StatsFile load_stats(const std::filesystem::path& manifest);

}  // namespace molmetric::frechet

#endif  // MOLMETRIC_FRECHET_HPP
