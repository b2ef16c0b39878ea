#include "dlmd/topology.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace dlmd {

namespace {
constexpr double kStochasticTol = 1e-12;
}

Topology::Topology(Matrix weights, std::string name)
    : weights_(std::move(weights)), name_(std::move(name)) {
  const std::size_t n = size();
  neighbors_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (weight(i, j) > 0.0 || weight(j, i) > 0.0) {
        neighbors_[i].push_back(j);
        if (i < j) edges_.emplace_back(i, j);
      }
    }
  }
}

Topology Topology::from_matrix(Matrix weights, std::string name) {
  if (weights.rows() == 0 || weights.rows() != weights.cols())
    throw std::invalid_argument("weight matrix must be square and non-empty");
  if ((weights.array() < 0.0).any())
    throw std::invalid_argument("weight matrix has negative entries");
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    if (std::abs(weights.row(i).sum() - 1.0) > kStochasticTol ||
        std::abs(weights.col(i).sum() - 1.0) > kStochasticTol)
      throw std::invalid_argument("weight matrix is not doubly stochastic");
  }
  return Topology(std::move(weights), std::move(name));
}

bool Topology::is_symmetric(double tol) const {
  return (weights_ - weights_.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool Topology::is_connected() const {
  const std::size_t n = size();
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : neighbors_[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count == n;
}

Topology make_fully_connected(std::size_t n) {
  if (n < 2) throw std::invalid_argument("fully connected topology needs n >= 2");
  const auto dim = static_cast<Eigen::Index>(n);
  return Topology::from_matrix(Matrix::Constant(dim, dim, 1.0 / static_cast<double>(n)),
                               "complete");
}

Topology make_ring(std::size_t n) {
  if (n < 3) throw std::invalid_argument("ring topology needs n >= 3");
  const auto dim = static_cast<Eigen::Index>(n);
  Matrix p = Matrix::Zero(dim, dim);
  const double w = 1.0 / 3.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    p(i, i) = w;
    p(i, (i + 1) % dim) = w;
    p(i, (i + dim - 1) % dim) = w;
  }
  return Topology::from_matrix(std::move(p), "ring2");
}

Topology make_topology(const std::string& name, std::size_t n) {
  if (name == "ring2" || name == "ring") return make_ring(n);
  if (name == "complete") return make_fully_connected(n);
  throw std::invalid_argument("unknown topology '" + name + "' (expected ring2 or complete)");
}

SpectralInfo spectral_info(const Matrix& weights) {
  if (weights.rows() != weights.cols())
    throw std::invalid_argument("spectral_info: matrix must be square");
  if ((weights - weights.transpose()).cwiseAbs().maxCoeff() > kStochasticTol)
    throw std::invalid_argument("spectral_info: asymmetric weight matrices are not supported");
  SpectralInfo info;
  if (weights.rows() < 2) return info;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(weights, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_info: eigendecomposition failed");
  const Vector& ev = solver.eigenvalues();  // ascending
  info.lambdaN = ev(0);
  info.lambda2 = ev(ev.size() - 2);
  info.lambda = std::max(info.lambda2, -info.lambdaN);
  return info;
}

SpectralInfo spectral_info(const Topology& t) { return spectral_info(t.weights()); }

Matrix mixing_matrix(const Topology& t, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("mixing_matrix: beta must lie in [0, 1]");
  const auto n = static_cast<Eigen::Index>(t.size());
  return (1.0 - beta) * Matrix::Identity(n, n) + beta * t.weights();
}

}  // namespace dlmd
