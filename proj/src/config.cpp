#include "heatchain/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "heatchain/errors.hpp"

namespace heatchain {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& why) {
  throw ConfigError(key + ": " + why);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(where, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) fail(key, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(key, "must be finite");
  return d;
}

double positive(const json& v, const std::string& key) {
  const double d = number(v, key);
  if (!(d > 0.0)) fail(key, "must be > 0");
  return d;
}

std::uint64_t count(const json& v, const std::string& key,
                    std::uint64_t minimum) {
  if (!v.is_number_integer()) fail(key, "must be an integer");
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u < minimum) fail(key, "must be >= " + std::to_string(minimum));
    return u;
  }
  const auto i = v.get<std::int64_t>();
  if (i < static_cast<std::int64_t>(minimum)) {
    fail(key, "must be >= " + std::to_string(minimum));
  }
  return static_cast<std::uint64_t>(i);
}

std::vector<std::size_t> count_list(const json& v, const std::string& key,
                                    std::uint64_t minimum) {
  if (!v.is_array()) fail(key, "must be an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<std::size_t>(
        count(v[i], key + "[" + std::to_string(i) + "]", minimum)));
  }
  return out;
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) fail(key, "must be a string");
  return v.get<std::string>();
}

}  // namespace

std::vector<std::size_t> ExperimentConfig::chain_lengths() const {
  return sweep_N.empty() ? std::vector<std::size_t>{N} : sweep_N;
}

std::vector<std::size_t> ExperimentConfig::widths() const {
  return sweep_M.empty() ? std::vector<std::size_t>{M} : sweep_M;
}

ExperimentConfig parse_config(const json& doc) {
  reject_unknown(doc, "", {"model", "topology", "baths", "run", "sampling",
                           "output", "sweep", "analysis"});
  ExperimentConfig cfg;

  const json* model = find(doc, "model");
  if (!model) fail("model", "required");
  reject_unknown(*model, "model", {"rate_kind", "cap"});
  const json* kind = find(*model, "rate_kind");
  if (!kind) fail("model.rate_kind", "required");
  try {
    cfg.rate_kind = rate_kind_from_string(text(*kind, "model.rate_kind"));
  } catch (const DomainError&) {
    fail("model.rate_kind",
         "must be one of sum-sqrt, harmonic-sqrt, capped-min-sqrt");
  }
  if (const json* cap = find(*model, "cap")) {
    cfg.cap = positive(*cap, "model.cap");
  }
  if (cfg.rate_kind == RateKind::CappedMinSqrt && !cfg.cap) {
    fail("model.cap", "required for capped-min-sqrt");
  }

  const json* topo = find(doc, "topology");
  if (!topo) fail("topology", "required");
  reject_unknown(*topo, "topology", {"kind", "N", "M"});
  if (const json* k = find(*topo, "kind")) {
    const std::string name = text(*k, "topology.kind");
    if (name == "chain") {
      cfg.topology = TopologyKind::Chain1D;
    } else if (name == "lattice") {
      cfg.topology = TopologyKind::Lattice2D;
    } else if (name == "ring") {
      cfg.topology = TopologyKind::Ring;
    } else {
      fail("topology.kind", "must be one of chain, lattice, ring");
    }
  }
  if (const json* n = find(*topo, "N")) {
    cfg.N = static_cast<std::size_t>(count(*n, "topology.N", 2));
  }
  if (const json* m = find(*topo, "M")) {
    cfg.M = static_cast<std::size_t>(count(*m, "topology.M", 1));
  }

  const json* baths = find(doc, "baths");
  if (!baths) fail("baths", "required");
  reject_unknown(*baths, "baths", {"T_left", "T_right"});
  const json* tl = find(*baths, "T_left");
  const json* tr = find(*baths, "T_right");
  if (!tl) fail("baths.T_left", "required");
  if (!tr) fail("baths.T_right", "required");
  cfg.T_left = positive(*tl, "baths.T_left");
  cfg.T_right = positive(*tr, "baths.T_right");

  const json* run = find(doc, "run");
  if (!run) fail("run", "required");
  reject_unknown(*run, "run", {"T_end", "burn_in", "seed", "trajectories"});
  const json* t_end = find(*run, "T_end");
  if (!t_end) fail("run.T_end", "required");
  cfg.t_end = positive(*t_end, "run.T_end");
  if (const json* b = find(*run, "burn_in")) {
    cfg.burn_in = number(*b, "run.burn_in");
    if (cfg.burn_in < 0.0) fail("run.burn_in", "must be >= 0");
  }
  if (!(cfg.t_end > cfg.burn_in)) fail("run.T_end", "must exceed run.burn_in");
  const json* seed = find(*run, "seed");
  if (!seed) fail("run.seed", "required");
  cfg.seed = count(*seed, "run.seed", 0);
  if (const json* t = find(*run, "trajectories")) {
    cfg.trajectories = count(*t, "run.trajectories", 1);
  }

  if (const json* s = find(doc, "sampling")) {
    reject_unknown(*s, "sampling", {"h", "sites", "max_samples"});
    if (const json* h = find(*s, "h")) cfg.h = positive(*h, "sampling.h");
    if (const json* sites = find(*s, "sites")) {
      cfg.sites = count_list(*sites, "sampling.sites", 1);
    }
    if (const json* m = find(*s, "max_samples")) {
      cfg.max_samples = count(*m, "sampling.max_samples", 1);
    }
  }

  if (const json* o = find(doc, "output")) {
    reject_unknown(*o, "output", {"directory", "prefix"});
    if (const json* d = find(*o, "directory")) {
      cfg.out_dir = text(*d, "output.directory");
    }
    if (const json* p = find(*o, "prefix")) cfg.prefix = text(*p, "output.prefix");
  }

  if (const json* sw = find(doc, "sweep")) {
    reject_unknown(*sw, "sweep", {"N", "M"});
    if (const json* n = find(*sw, "N")) cfg.sweep_N = count_list(*n, "sweep.N", 2);
    if (const json* m = find(*sw, "M")) cfg.sweep_M = count_list(*m, "sweep.M", 1);
  }

  if (const json* a = find(doc, "analysis")) {
    reject_unknown(*a, "analysis", {"anchors"});
    if (const json* anchors = find(*a, "anchors")) {
      const auto v = count_list(*anchors, "analysis.anchors", 1);
      if (v.size() != 2 || !(v[0] + 1 < v[1])) {
        fail("analysis.anchors",
             "must be two 1-based sites [left, right] with left + 1 < right");
      }
      cfg.anchors = std::array<std::size_t, 2>{v[0], v[1]};
    }
  }

  if (cfg.N == 0 && cfg.sweep_N.empty()) {
    fail("topology.N", "required unless sweep.N is given");
  }
  const std::size_t min_n =
      cfg.sweep_N.empty()
          ? cfg.N
          : *std::min_element(cfg.sweep_N.begin(), cfg.sweep_N.end());
  for (std::size_t s : cfg.sites) {
    if (s > min_n) fail("sampling.sites", "site index beyond chain length");
  }
  if (cfg.anchors && (*cfg.anchors)[1] > min_n) {
    fail("analysis.anchors", "anchor beyond chain length");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace heatchain
