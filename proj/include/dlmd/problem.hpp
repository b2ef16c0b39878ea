#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dlmd/random.hpp"
#include "dlmd/topology.hpp"

namespace dlmd {

/// Two Gaussian classes. When `mean_pos` / `mean_neg` are empty the means are
/// +-class_mean_scale * e1.
struct SvmDataOptions {
  std::size_t n = 10;
  std::size_t m = 10;
  std::size_t d = 30;
  double class_mean_scale = 1.5;
  double class_std = 1.0;
  bool polarized = true;
  double mu = 0.1;
  std::uint64_t seed = 1;
  Vector mean_pos;
  Vector mean_neg;
};

/// Per-node labelled points for the regularized hinge-loss problem.
struct SvmDataset {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t d = 0;
  double mu = 0.1;
  std::uint64_t seed = 0;
  bool polarized = false;
  std::vector<Matrix> features;  // node i: m x d, one point per row
  std::vector<Vector> labels;    // node i: m entries in {-1, +1}

  std::size_t total_points() const { return n * m; }
};

/// Polarized layout: nodes i < n/2 hold class +1, the rest class -1.
/// Otherwise each node alternates labels by point index.
SvmDataset generate_svm_data(const SvmDataOptions& opts);

/// Builds a dataset from explicit arrays (all nodes share m and d).
SvmDataset make_svm_dataset(std::vector<Matrix> features, std::vector<Vector> labels, double mu);

/// f_i(x) = (1/m) sum_j max(0, 1 - b_j <x, a_j>) + (mu/2) |x|^2 for one node.
class LocalObjective {
 public:
  LocalObjective(const SvmDataset& data, std::size_t node);

  double value(const Vector& x) const;
  /// Exact subgradient. A margin of exactly 1 takes the zero branch.
  Vector subgradient(const Vector& x) const;
  /// Unbiased estimate from `batch` points drawn uniformly with replacement.
  /// batch == 0 or batch >= m falls back to the exact subgradient.
  Vector stochastic_subgradient(const Vector& x, std::size_t batch, RandomStream& rng) const;
  /// Bound on |subgradient| over the ball |x| <= radius.
  double lipschitz_on_ball(double radius) const;

  std::size_t dim() const { return static_cast<std::size_t>(features_->cols()); }
  std::size_t num_points() const { return static_cast<std::size_t>(features_->rows()); }

 private:
  const Matrix* features_;
  const Vector* labels_;
  double mu_;
};

/// f(x) = (1/n) sum_i f_i(x).
class GlobalObjective {
 public:
  explicit GlobalObjective(const SvmDataset& data);

  double value(const Vector& x) const;
  Vector subgradient(const Vector& x) const;
  const LocalObjective& local(std::size_t i) const { return locals_.at(i); }
  std::size_t num_nodes() const { return locals_.size(); }
  std::size_t dim() const { return dim_; }
  double mu() const { return mu_; }

 private:
  std::vector<LocalObjective> locals_;
  std::size_t dim_;
  double mu_;
};

enum class ProxKind { Quadratic, Entropy, AnchoredQuadratic };

ProxKind parse_prox_kind(const std::string& name);
std::string to_string(ProxKind k);

/// argmin_x <z, x> + psi(x) / eta over the feasible set.
Vector project_quadratic(const Vector& z, double eta);
Vector project_entropy(const Vector& z, double eta);
Vector project_anchored_quadratic(const Vector& z, double eta, const Vector& x_init);

/// A proximal function together with its feasible set.
///   Quadratic: psi = |x|^2 / 2 on R^d
///   Entropy: psi = sum x log x - x on the probability simplex
///   AnchoredQuadratic: psi = |x - x_init|^2 / 2 on R^d
class ProximalMap {
 public:
  explicit ProximalMap(ProxKind kind = ProxKind::Quadratic, Vector x_init = {});

  Vector project(const Vector& z, double eta) const;
  double psi(const Vector& x) const;
  bool feasible(const Vector& x, double tol = 1e-9) const;
  ProxKind kind() const { return kind_; }
  const Vector& anchor() const { return x_init_; }

 private:
  ProxKind kind_;
  Vector x_init_;
};

}  // namespace dlmd
