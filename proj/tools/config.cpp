#include "config.hpp"

#include <fmt/core.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dlmd::tools {
namespace {

const std::set<std::string> kKnownKeys{
    "experiment_id", "topology",    "n",           "m",          "d",
    "mu",            "polarized",   "batch_size",  "class_mean_scale",
    "class_std",     "data_seed",   "rate_bits",   "dynamic_range_U",
    "U_values",      "sigma2",      "noise_family", "gamma",     "gammas",
    "c0",            "c1",          "R_prox",      "Omega2",     "horizon_K",
    "seed",          "variant",     "prox",        "trials",     "replications",
    "baselines",     "checkpoints", "links",       "noise_dim",  "threads"};

template <typename T>
T get(const YAML::Node& node, const std::string& key) {
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(fmt::format("config key '{}': {}", key, e.msg));
  }
}

std::string label(double g) { return fmt::format("diffex_g{}", g); }

}  // namespace

std::vector<SeriesSpec> series_for(const std::vector<double>& gammas, bool baselines) {
  std::vector<SeriesSpec> out;
  if (baselines) {
    out.push_back({"noiseless", Variant::NoiselessBaseline, 0.0});
    out.push_back({"naive", Variant::NaiveDlmd, 0.0});
  }
  for (double g : gammas) out.push_back({label(g), Variant::DiffEx, g});
  return out;
}

SimConfig default_config() {
  SimConfig c;
  c.convergence.series = default_convergence_series();
  return c;
}

SimConfig load_config(const std::string& path) {
  SimConfig c = default_config();
  std::ifstream is(path);
  if (!is) throw std::runtime_error(fmt::format("cannot open config '{}'", path));
  std::stringstream text;
  text << is.rdbuf();
  c.source = text.str();

  YAML::Node root;
  try {
    root = YAML::Load(c.source);
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path, e.what()));
  }
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw std::invalid_argument(fmt::format("{}: top level must be a mapping", path));
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kKnownKeys.count(key)) throw std::invalid_argument(fmt::format("{}: unknown key '{}'", path, key));
  }

  auto& cv = c.convergence;
  auto& sw = c.sweep;
  auto& ns = c.noise;
  const auto has = [&](const char* k) { return static_cast<bool>(root[k]); };

  if (has("experiment_id")) {
    const auto id = get<std::string>(root, "experiment_id");
    cv.experiment_id = sw.experiment_id = ns.experiment_id = id;
  }
  if (has("topology")) {
    std::vector<std::string> topo;
    if (root["topology"].IsSequence())
      topo = get<std::vector<std::string>>(root, "topology");
    else
      topo = {get<std::string>(root, "topology")};
    cv.topologies = sw.topologies = topo;
  }
  for (SvmDataOptions* data : {&cv.data, &sw.data}) {
    if (has("n")) data->n = get<std::size_t>(root, "n");
    if (has("m")) data->m = get<std::size_t>(root, "m");
    if (has("d")) data->d = get<std::size_t>(root, "d");
    if (has("mu")) data->mu = get<double>(root, "mu");
    if (has("polarized")) data->polarized = get<bool>(root, "polarized");
    if (has("class_mean_scale")) data->class_mean_scale = get<double>(root, "class_mean_scale");
    if (has("class_std")) data->class_std = get<double>(root, "class_std");
    if (has("data_seed")) data->seed = get<std::uint64_t>(root, "data_seed");
  }
  if (has("batch_size")) cv.batch_size = sw.batch_size = get<std::size_t>(root, "batch_size");
  if (has("rate_bits")) cv.rate_bits = sw.rate_bits = ns.rate_bits = get<unsigned>(root, "rate_bits");
  if (has("dynamic_range_U")) cv.U = ns.U = get<double>(root, "dynamic_range_U");
  if (has("U_values")) sw.U_values = get<std::vector<double>>(root, "U_values");
  if (has("sigma2")) cv.sigma2 = sw.sigma2 = ns.sigma2 = get<double>(root, "sigma2");
  if (has("noise_family"))
    cv.noise_family = sw.noise_family = ns.noise_family =
        parse_noise_family(get<std::string>(root, "noise_family"));
  if (has("gamma")) sw.gamma = ns.gamma = get<double>(root, "gamma");
  bool baselines = true;
  if (has("baselines")) baselines = get<bool>(root, "baselines");
  if (has("gammas"))
    cv.series = series_for(get<std::vector<double>>(root, "gammas"), baselines);
  else if (has("gamma"))
    cv.series = series_for({sw.gamma}, baselines);
  else if (!baselines)
    cv.series = series_for({0.1, 0.5}, false);
  if (has("c0")) cv.c0 = sw.c0 = ns.c0 = get<double>(root, "c0");
  if (has("c1")) cv.c1 = sw.c1 = ns.c1 = get<double>(root, "c1");
  if (has("R_prox")) cv.R_prox = sw.R_prox = get<double>(root, "R_prox");
  if (has("Omega2")) cv.Omega2 = sw.Omega2 = get<double>(root, "Omega2");
  if (has("horizon_K")) cv.horizon = sw.horizon = get<std::size_t>(root, "horizon_K");
  if (has("seed")) cv.seed = sw.seed = ns.seed = get<std::uint64_t>(root, "seed");
  if (has("variant")) c.variant = parse_variant(get<std::string>(root, "variant"));
  if (has("prox")) cv.prox = parse_prox_kind(get<std::string>(root, "prox"));
  if (has("trials")) sw.trials = get<std::size_t>(root, "trials");
  if (has("replications")) cv.replications = get<std::size_t>(root, "replications");
  if (has("checkpoints")) ns.checkpoints = get<std::vector<std::size_t>>(root, "checkpoints");
  if (has("links")) ns.links = get<std::size_t>(root, "links");
  if (has("noise_dim")) ns.d = get<std::size_t>(root, "noise_dim");
  if (has("threads")) cv.threads = sw.threads = get<unsigned>(root, "threads");
  return c;
}

}  // namespace dlmd::tools
