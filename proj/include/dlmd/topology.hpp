#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace dlmd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Network graph together with a doubly stochastic weight matrix whose
/// off-diagonal support matches the edge set.
class Topology {
 public:
  /// Validates that `weights` is square, nonnegative and doubly stochastic
  /// (row and column sums within 1e-12). Edges are the off-diagonal nonzeros.
  static Topology from_matrix(Matrix weights, std::string name = "custom");

  std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }
  double weight(std::size_t i, std::size_t j) const {
    return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  /// Undirected edges (i < j), sorted lexicographically.
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }
  /// Neighbors of node i in ascending order (excludes i).
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }
  const std::string& name() const { return name_; }

  bool is_symmetric(double tol = 1e-12) const;
  bool is_connected() const;

 private:
  Topology(Matrix weights, std::string name);

  Matrix weights_;
  std::string name_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

struct SpectralInfo {
  double lambda2 = 0.0;  // second-largest eigenvalue
  double lambdaN = 0.0;  // smallest eigenvalue
  double lambda = 0.0;   // max(lambda2, -lambdaN)
};

/// P_ij = 1/n for all i, j. Requires n >= 2.
Topology make_fully_connected(std::size_t n);

/// Ring where every node weights itself and both neighbors by 1/3.
/// Requires n >= 3.
Topology make_ring(std::size_t n);

/// Builds a built-in topology by config name: "ring2" or "complete".
Topology make_topology(const std::string& name, std::size_t n);

/// Spectrum of a symmetric weight matrix. Throws std::invalid_argument for
/// non-symmetric input.
SpectralInfo spectral_info(const Matrix& weights);
SpectralInfo spectral_info(const Topology& t);

/// W = (1 - beta) I + beta P, for beta in [0, 1].
Matrix mixing_matrix(const Topology& t, double beta);

}  // namespace dlmd
