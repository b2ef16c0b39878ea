#include "dlmd/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace dlmd {

SvmDataset generate_svm_data(const SvmDataOptions& opts) {
  if (opts.n == 0 || opts.m == 0 || opts.d == 0)
    throw std::invalid_argument("generate_svm_data: n, m, d must be positive");
  if (!(opts.class_std >= 0.0))
    throw std::invalid_argument("generate_svm_data: class_std must be nonnegative");
  const auto d = static_cast<Eigen::Index>(opts.d);

  Vector mean_pos = opts.mean_pos;
  Vector mean_neg = opts.mean_neg;
  if (mean_pos.size() == 0) {
    mean_pos = Vector::Zero(d);
    mean_pos(0) = opts.class_mean_scale;
  }
  if (mean_neg.size() == 0) {
    mean_neg = Vector::Zero(d);
    mean_neg(0) = -opts.class_mean_scale;
  }
  if (mean_pos.size() != d || mean_neg.size() != d)
    throw std::invalid_argument("generate_svm_data: class means must have dimension d");

  SvmDataset ds;
  ds.n = opts.n;
  ds.m = opts.m;
  ds.d = opts.d;
  ds.mu = opts.mu;
  ds.seed = opts.seed;
  ds.polarized = opts.polarized;
  for (std::size_t i = 0; i < opts.n; ++i) {
    RandomStream rng(opts.seed, StreamTag::kDataset, {i});
    Matrix a(static_cast<Eigen::Index>(opts.m), d);
    Vector b(static_cast<Eigen::Index>(opts.m));
    for (std::size_t j = 0; j < opts.m; ++j) {
      const bool positive = opts.polarized ? (i < opts.n / 2) : (j % 2 == 0);
      const Vector& mean = positive ? mean_pos : mean_neg;
      const auto row = static_cast<Eigen::Index>(j);
      b(row) = positive ? 1.0 : -1.0;
      for (Eigen::Index s = 0; s < d; ++s) a(row, s) = mean(s) + opts.class_std * rng.normal();
    }
    ds.features.push_back(std::move(a));
    ds.labels.push_back(std::move(b));
  }
  return ds;
}

SvmDataset make_svm_dataset(std::vector<Matrix> features, std::vector<Vector> labels, double mu) {
  if (features.empty() || features.size() != labels.size())
    throw std::invalid_argument("make_svm_dataset: need one feature block and label vector per node");
  SvmDataset ds;
  ds.n = features.size();
  ds.m = static_cast<std::size_t>(features[0].rows());
  ds.d = static_cast<std::size_t>(features[0].cols());
  ds.mu = mu;
  for (std::size_t i = 0; i < ds.n; ++i) {
    if (static_cast<std::size_t>(features[i].rows()) != ds.m ||
        static_cast<std::size_t>(features[i].cols()) != ds.d ||
        labels[i].size() != features[i].rows())
      throw std::invalid_argument("make_svm_dataset: inconsistent node shapes");
    for (Eigen::Index j = 0; j < labels[i].size(); ++j)
      if (labels[i](j) != 1.0 && labels[i](j) != -1.0)
        throw std::invalid_argument("make_svm_dataset: labels must be +-1");
  }
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  return ds;
}

LocalObjective::LocalObjective(const SvmDataset& data, std::size_t node)
    : features_(&data.features.at(node)), labels_(&data.labels.at(node)), mu_(data.mu) {}

double LocalObjective::value(const Vector& x) const {
  const Vector margins = labels_->cwiseProduct(*features_ * x);
  const double hinge = (1.0 - margins.array()).max(0.0).sum();
  return hinge / static_cast<double>(num_points()) + 0.5 * mu_ * x.squaredNorm();
}

Vector LocalObjective::subgradient(const Vector& x) const {
  const Vector margins = labels_->cwiseProduct(*features_ * x);
  Vector g = Vector::Zero(x.size());
  for (Eigen::Index j = 0; j < margins.size(); ++j)
    if (margins(j) < 1.0) g.noalias() -= (*labels_)(j) * features_->row(j).transpose();
  g /= static_cast<double>(num_points());
  g += mu_ * x;
  return g;
}

Vector LocalObjective::stochastic_subgradient(const Vector& x, std::size_t batch,
                                              RandomStream& rng) const {
  const std::size_t m = num_points();
  if (batch == 0 || batch >= m) return subgradient(x);
  Vector g = Vector::Zero(x.size());
  for (std::size_t t = 0; t < batch; ++t) {
    const auto j = static_cast<Eigen::Index>(rng.index(m));
    const double margin = (*labels_)(j) * features_->row(j).dot(x);
    if (margin < 1.0) g.noalias() -= (*labels_)(j) * features_->row(j).transpose();
  }
  g /= static_cast<double>(batch);
  g += mu_ * x;
  return g;
}

double LocalObjective::lipschitz_on_ball(double radius) const {
  return features_->rowwise().norm().sum() / static_cast<double>(num_points()) + mu_ * radius;
}

GlobalObjective::GlobalObjective(const SvmDataset& data) : dim_(data.d), mu_(data.mu) {
  locals_.reserve(data.n);
  for (std::size_t i = 0; i < data.n; ++i) locals_.emplace_back(data, i);
}

double GlobalObjective::value(const Vector& x) const {
  double s = 0.0;
  for (const auto& f : locals_) s += f.value(x);
  return s / static_cast<double>(locals_.size());
}

Vector GlobalObjective::subgradient(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  for (const auto& f : locals_) g += f.subgradient(x);
  return g / static_cast<double>(locals_.size());
}

ProxKind parse_prox_kind(const std::string& name) {
  if (name == "quadratic") return ProxKind::Quadratic;
  if (name == "entropy") return ProxKind::Entropy;
  if (name == "anchored" || name == "anchored_quadratic") return ProxKind::AnchoredQuadratic;
  throw std::invalid_argument("unknown prox '" + name + "'");
}

std::string to_string(ProxKind k) {
  switch (k) {
    case ProxKind::Quadratic: return "quadratic";
    case ProxKind::Entropy: return "entropy";
    case ProxKind::AnchoredQuadratic: return "anchored_quadratic";
  }
  return "quadratic";
}

namespace {
void require_eta(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("projection: eta must be positive");
}
}  // namespace

Vector project_quadratic(const Vector& z, double eta) {
  require_eta(eta);
  return -eta * z;
}

Vector project_entropy(const Vector& z, double eta) {
  require_eta(eta);
  if (z.size() == 0) return z;
  const Vector logits = -eta * z;
  const double shift = logits.maxCoeff();
  Vector x = (logits.array() - shift).exp().matrix();
  return x / x.sum();
}

Vector project_anchored_quadratic(const Vector& z, double eta, const Vector& x_init) {
  require_eta(eta);
  if (x_init.size() != z.size())
    throw std::invalid_argument("projection: anchor dimension mismatch");
  return x_init - eta * z;
}

ProximalMap::ProximalMap(ProxKind kind, Vector x_init) : kind_(kind), x_init_(std::move(x_init)) {}

Vector ProximalMap::project(const Vector& z, double eta) const {
  switch (kind_) {
    case ProxKind::Quadratic: return project_quadratic(z, eta);
    case ProxKind::Entropy: return project_entropy(z, eta);
    case ProxKind::AnchoredQuadratic:
      return project_anchored_quadratic(z, eta, x_init_.size() ? x_init_ : Vector::Zero(z.size()));
  }
  return project_quadratic(z, eta);
}

double ProximalMap::psi(const Vector& x) const {
  switch (kind_) {
    case ProxKind::Quadratic: return 0.5 * x.squaredNorm();
    case ProxKind::Entropy: {
      // Shifted by log d so psi >= 0 on the simplex with psi(uniform) = 0.
      double s = std::log(static_cast<double>(x.size()));
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) > 0.0) s += x(i) * std::log(x(i));
      return s;
    }
    case ProxKind::AnchoredQuadratic:
      return 0.5 * (x - (x_init_.size() ? x_init_ : Vector::Zero(x.size()))).squaredNorm();
  }
  return 0.0;
}

bool ProximalMap::feasible(const Vector& x, double tol) const {
  if (!x.allFinite()) return false;
  if (kind_ != ProxKind::Entropy) return true;
  return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
}

}  // namespace dlmd
