#pragma once

// Test-only reference computations. These deliberately take different routes
// from the library (counting instead of sorting, closed forms, explicit
// inverses, generalized eigenvalues) so they can check it independently.

#include <cmath>
#include <map>
#include <utility>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "contre/rng.hpp"

namespace contre::oracles {

/// rank_i = 1 + #{x_j < x_i} + (#{x_j == x_i} - 1) / 2
inline std::vector<double> brute_force_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double y : x) {
      less += y < x[i];
      equal += y == x[i];
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

/// 1 - 6 sum d^2 / (n (n^2 - 1)); exact only for untied data.
inline double closed_form_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = brute_force_ranks(x);
  const auto ry = brute_force_ranks(y);
  const double n = static_cast<double>(x.size());
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

inline std::vector<Eigen::Index> random_permutation(Engine& eng, Eigen::Index n) {
  std::vector<Eigen::Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Eigen::Index{0});
  for (std::size_t i = p.size() - 1; i > 0; --i) std::swap(p[i], p[uniform_index(eng, i + 1)]);
  return p;
}

struct Instance {
  Eigen::MatrixXd features;
  std::vector<int> labels;
};

/// d <= 8, 2..4 classes, n <= 64, with enough samples that S_w is invertible.
inline Instance random_instance(Engine& eng) {
  const auto d = static_cast<Eigen::Index>(1 + uniform_index(eng, 8));
  const int g = 2 + static_cast<int>(uniform_index(eng, 3));
  const Eigen::Index min_n = std::max<Eigen::Index>(d + g + 2, 2 * g);
  const Eigen::Index n = min_n + static_cast<Eigen::Index>(uniform_index(eng, 64 - min_n + 1));
  Instance inst{Eigen::MatrixXd(n, d), std::vector<int>(static_cast<std::size_t>(n))};
  Eigen::MatrixXd centres(g, d);
  for (Eigen::Index i = 0; i < centres.size(); ++i) centres(i) = uniform_real(eng, -3, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = i < g ? static_cast<int>(i) : static_cast<int>(uniform_index(eng, g));
    inst.labels[i] = c;
    for (Eigen::Index j = 0; j < d; ++j) inst.features(i, j) = centres(c, j) + uniform_real(eng, -1, 1);
  }
  return inst;
}

/// (S_w, S_b) accumulated sample by sample from per-class sums.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> loop_scatter(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  const Eigen::Index d = x.cols();
  std::map<int, std::pair<Eigen::VectorXd, double>> sums;
  Eigen::VectorXd grand = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto& [sum, count] = sums.try_emplace(labels[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(d), 0.0)
                             .first->second;
    sum += x.row(i).transpose();
    count += 1;
    grand += x.row(i).transpose();
  }
  grand /= static_cast<double>(x.rows());
  Eigen::MatrixXd s_w = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd s_b = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto& [sum, count] = sums.at(labels[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd dev = x.row(i).transpose() - sum / count;
    s_w += dev * dev.transpose();
  }
  for (const auto& [label, sc] : sums) {
    const Eigen::VectorXd dev = sc.first / sc.second - grand;
    s_b += sc.second * dev * dev.transpose();
  }
  return {s_w, s_b};
}

inline Eigen::MatrixXd total_scatter(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c;
}

inline double explicit_inverse_fisher(const Eigen::MatrixXd& s_w, const Eigen::MatrixXd& s_b) {
  return (s_w.inverse() * s_b).trace();
}

/// Sum of the generalized eigenvalues of S_b v = lambda S_w v.
inline double generalized_eigen_fisher(const Eigen::MatrixXd& s_w, const Eigen::MatrixXd& s_b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s_b, s_w);
  return es.eigenvalues().sum();
}

/// Random matrix with singular values in [0.5, 2].
inline Eigen::MatrixXd well_conditioned_map(Engine& eng, Eigen::Index d) {
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = uniform_real(eng, -1, 1);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd s(d);
  for (Eigen::Index i = 0; i < d; ++i) s(i) = uniform_real(eng, 0.5, 2.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace contre::oracles
