#pragma once

/// @file stats.hpp
/// @brief Rank statistics, scatter matrices, Fisher ratio and SVD reduction.
///
/// All routines are pure and templated on the Eigen scalar. Sums are taken in
/// a canonical (sorted) order so results are bitwise independent of sample
/// order.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "contre/error.hpp"

namespace contre::stats {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Mid-rank transform of a sample; ranks are 1-based and sum to n(n+1)/2.
template <typename Scalar>
struct RankVector {
  Vector<Scalar> values;
  Eigen::Index size() const noexcept { return values.size(); }
};

template <typename Derived>
RankVector<typename Derived::Scalar> rank_transform(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "rank_transform needs at least one value");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(static_cast<double>(x(i)))) {
      throw Error(ErrorKind::NonFiniteInput, "value at index " + std::to_string(i) + " is not finite");
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });

  RankVector<Scalar> ranks{Vector<Scalar>(n)};
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i + 1;
    while (j < n && x(order[j]) == x(order[i])) ++j;
    // positions i..j-1 hold ranks i+1..j
    const Scalar mid = static_cast<Scalar>(i + 1 + j) / Scalar(2);
    for (Eigen::Index k = i; k < j; ++k) ranks.values(order[k]) = mid;
    i = j;
  }
  return ranks;
}

inline RankVector<double> rank_transform(std::span<const double> x) {
  return rank_transform(Eigen::Map<const Vector<double>>(x.data(), static_cast<Eigen::Index>(x.size())));
}

/// Pearson correlation, clamped to [-1, 1]. Throws DegenerateVariance when
/// either input is constant.
template <typename DX, typename DY>
typename DX::Scalar pearson(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
  using Scalar = typename DX::Scalar;
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "pearson inputs differ in length");
  const Scalar mx = x.mean();
  const Scalar my = y.mean();
  Scalar sxy = 0, sxx = 0, syy = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar dx = x(i) - mx;
    const Scalar dy = y(i) - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == Scalar(0) || syy == Scalar(0)) throw Error(ErrorKind::DegenerateVariance, "constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), Scalar(-1), Scalar(1));
}

/// Spearman rank correlation: Pearson correlation of the mid-rank vectors.
template <typename DX, typename DY>
typename DX::Scalar spearman(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
  using Scalar = typename DX::Scalar;
  if (x.size() != y.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "spearman inputs have lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  if (x.size() < 3) throw Error(ErrorKind::InvalidArgument, "spearman needs at least 3 observations");
  const auto rx = rank_transform(x);
  const auto ry = rank_transform(y);
  const Eigen::Index n = x.size();
  // Canonical order: lexicographic on (rank_x, rank_y).
  std::vector<std::pair<Scalar, Scalar>> pairs(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pairs[i] = {rx.values(i), ry.values(i)};
  std::sort(pairs.begin(), pairs.end());
  Vector<Scalar> a(n), b(n);
  for (Eigen::Index i = 0; i < n; ++i) std::tie(a(i), b(i)) = pairs[i];
  return pearson(a, b);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  using Map = Eigen::Map<const Vector<double>>;
  return spearman(Map(x.data(), static_cast<Eigen::Index>(x.size())),
                  Map(y.data(), static_cast<Eigen::Index>(y.size())));
}

/// First-order partial correlation from the three pairwise coefficients.
/// Throws ControlDegenerate when the control correlates perfectly with either
/// variable (the denominator vanishes).
template <typename Scalar>
Scalar partial_correlation(Scalar r_xy, Scalar r_xz, Scalar r_yz) {
  constexpr Scalar kEps = Scalar(1e-12);
  const Scalar dx = Scalar(1) - r_xz * r_xz;
  const Scalar dy = Scalar(1) - r_yz * r_yz;
  if (dx <= kEps || dy <= kEps) {
    throw Error(ErrorKind::ControlDegenerate, "control variable is perfectly rank-correlated (division by zero)");
  }
  return (r_xy - r_xz * r_yz) / (std::sqrt(dx) * std::sqrt(dy));
}

/// Partial Spearman correlation of x and y controlling for z.
template <typename DX, typename DY, typename DZ>
typename DX::Scalar partial_spearman(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
                                     const Eigen::MatrixBase<DZ>& z) {
  const auto r_xz = spearman(x, z);
  const auto r_yz = spearman(y, z);
  const auto r_xy = spearman(x, y);
  return partial_correlation(r_xy, r_xz, r_yz);
}

inline double partial_spearman(std::span<const double> x, std::span<const double> y, std::span<const double> z) {
  using Map = Eigen::Map<const Vector<double>>;
  auto m = [](std::span<const double> s) { return Map(s.data(), static_cast<Eigen::Index>(s.size())); };
  return partial_spearman(m(x), m(y), m(z));
}

/// Inner weight of the within-class scatter. Standard omits it; CountWeighted
/// multiplies class i's scatter by its sample count N_i.
enum class WithinWeighting { Standard, CountWeighted };

inline const char* to_string(WithinWeighting w) noexcept {
  return w == WithinWeighting::Standard ? "standard" : "count_weighted";
}

template <typename Scalar>
struct ScatterPair {
  Matrix<Scalar> s_b;               ///< between-class, d x d
  Matrix<Scalar> s_w;               ///< within-class, d x d
  std::vector<int> class_labels;    ///< ascending
  std::vector<Eigen::Index> class_counts;
  Matrix<Scalar> class_means;       ///< g x d, row i belongs to class_labels[i]
  Vector<Scalar> grand_mean;

  Eigen::Index dim() const noexcept { return s_b.rows(); }
};

/// Between/within scatter of row-sample features. If `class_count` is given,
/// every label in [0, class_count) must be present (EmptyClass otherwise).
template <typename Derived>
ScatterPair<typename Derived::Scalar> scatter_matrices(const Eigen::MatrixBase<Derived>& features,
                                                       std::span<const int> labels,
                                                       WithinWeighting weighting = WithinWeighting::Standard,
                                                       std::optional<int> class_count = std::nullopt) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw Error(ErrorKind::LengthMismatch, "features and labels differ in sample count");
  }
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "feature dimension must be >= 1");

  // Canonical order: by label, then lexicographically by feature row.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    for (Eigen::Index c = 0; c < d; ++c) {
      if (features(a, c) != features(b, c)) return features(a, c) < features(b, c);
    }
    return a < b;
  });

  ScatterPair<Scalar> out;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // [begin, end) into order
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && labels[order[j]] == labels[order[i]]) ++j;
    out.class_labels.push_back(labels[order[i]]);
    out.class_counts.push_back(static_cast<Eigen::Index>(j - i));
    spans.emplace_back(i, j);
    i = j;
  }
  if (class_count) {
    for (int c = 0; c < *class_count; ++c) {
      if (!std::binary_search(out.class_labels.begin(), out.class_labels.end(), c)) {
        throw Error(ErrorKind::EmptyClass, "class " + std::to_string(c) + " has no samples");
      }
    }
  }
  if (out.class_labels.size() < 2) throw Error(ErrorKind::SingleClass, "scatter matrices need at least 2 classes");

  const auto g = static_cast<Eigen::Index>(out.class_labels.size());
  out.grand_mean = Vector<Scalar>::Zero(d);
  for (auto idx : order) out.grand_mean += features.row(idx).transpose();
  out.grand_mean /= static_cast<Scalar>(n);

  out.class_means.resize(g, d);
  out.s_b = Matrix<Scalar>::Zero(d, d);
  out.s_w = Matrix<Scalar>::Zero(d, d);
  for (Eigen::Index c = 0; c < g; ++c) {
    const auto [begin, end] = spans[c];
    Vector<Scalar> mean = Vector<Scalar>::Zero(d);
    for (std::size_t k = begin; k < end; ++k) mean += features.row(order[k]).transpose();
    mean /= static_cast<Scalar>(end - begin);
    out.class_means.row(c) = mean.transpose();

    const Vector<Scalar> shift = mean - out.grand_mean;
    out.s_b.noalias() += static_cast<Scalar>(end - begin) * (shift * shift.transpose());

    const Scalar weight = weighting == WithinWeighting::CountWeighted ? static_cast<Scalar>(end - begin) : Scalar(1);
    for (std::size_t k = begin; k < end; ++k) {
      const Vector<Scalar> dev = features.row(order[k]).transpose() - mean;
      out.s_w.noalias() += weight * (dev * dev.transpose());
    }
  }
  // Scalar-times-outer-product may round the two triangles differently.
  out.s_b = (Scalar(0.5) * (out.s_b + out.s_b.transpose())).eval();
  out.s_w = (Scalar(0.5) * (out.s_w + out.s_w.transpose())).eval();
  return out;
}

/// trace((S_w + ridge I)^-1 S_b) via a pivoted LDLT solve. Throws
/// SingularWithin when the regularized within-class matrix is not positive
/// definite or its reciprocal condition estimate is below 1e-12.
template <typename Scalar>
Scalar fisher_ratio(const ScatterPair<Scalar>& pair, Scalar ridge = Scalar(0)) {
  if (ridge < Scalar(0)) throw Error(ErrorKind::InvalidArgument, "ridge must be non-negative");
  const Eigen::Index d = pair.dim();
  Matrix<Scalar> within = pair.s_w;
  within.diagonal().array() += ridge;
  const Eigen::LDLT<Matrix<Scalar>> ldlt(within);
  const bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                  (ldlt.vectorD().array() > Scalar(0)).all() && ldlt.rcond() >= Scalar(1e-12);
  if (!ok) {
    throw Error(ErrorKind::SingularWithin,
                "within-class scatter is numerically singular (d=" + std::to_string(d) + ")");
  }
  return ldlt.solve(pair.s_b).trace();
}

template <typename Scalar>
struct FisherResult {
  Scalar ratio;
  Scalar ridge;  ///< ridge actually applied (0 when the plain solve succeeded)
};

/// Tries the unregularized solve first; on SingularWithin retries with
/// ridge = 1e-6 * trace(S_w) / d.
template <typename Scalar>
FisherResult<Scalar> fisher_ratio_auto(const ScatterPair<Scalar>& pair) {
  try {
    return {fisher_ratio(pair, Scalar(0)), Scalar(0)};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularWithin) throw;
  }
  const Scalar ridge = Scalar(1e-6) * pair.s_w.trace() / static_cast<Scalar>(pair.dim());
  if (!(ridge > Scalar(0))) {
    throw Error(ErrorKind::SingularWithin, "within-class scatter is zero; no scale for a ridge");
  }
  return {fisher_ratio(pair, ridge), ridge};
}

template <typename Scalar>
struct SvdReduction {
  Matrix<Scalar> projected;          ///< n x target_dim
  Scalar retained_variance;          ///< sum of kept sigma^2 over sum of all sigma^2
  Vector<Scalar> singular_values;    ///< all of them, descending
  Matrix<Scalar> components;         ///< d x target_dim right singular vectors
};

/// Projects centered row-sample features onto their top `target_dim` right
/// singular vectors. Each kept vector is sign-normalised so its largest
/// magnitude entry is positive, making the projection reproducible.
template <typename Derived>
SvdReduction<typename Derived::Scalar> svd_reduce(const Eigen::MatrixBase<Derived>& features,
                                                  Eigen::Index target_dim) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (target_dim < 1 || target_dim > std::min(n, d)) {
    throw Error(ErrorKind::DimensionTooLarge, "target_dim " + std::to_string(target_dim) + " not in [1, min(n, d) = " +
                                                  std::to_string(std::min(n, d)) + "]");
  }
  const Vector<Scalar> mean = features.colwise().mean().transpose();
  const Matrix<Scalar> centered = features.rowwise() - mean.transpose();
  Eigen::BDCSVD<Matrix<Scalar>> svd(centered, Eigen::ComputeThinV);

  SvdReduction<Scalar> out;
  out.singular_values = svd.singularValues();
  out.components = svd.matrixV().leftCols(target_dim);
  for (Eigen::Index c = 0; c < target_dim; ++c) {
    Eigen::Index arg = 0;
    out.components.col(c).cwiseAbs().maxCoeff(&arg);
    if (out.components(arg, c) < Scalar(0)) out.components.col(c) *= Scalar(-1);
  }
  out.projected = centered * out.components;
  const Scalar total = out.singular_values.squaredNorm();
  out.retained_variance =
      total > Scalar(0) ? out.singular_values.head(target_dim).squaredNorm() / total : Scalar(1);
  return out;
}

/// Training accuracy minus contrastive accuracy; negative values are kept.
inline double consistency(double train_accuracy, double contrastive_accuracy) {
  return train_accuracy - contrastive_accuracy;
}

}  // namespace contre::stats
