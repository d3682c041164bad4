#include "heatchain/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "heatchain/errors.hpp"

namespace heatchain {

std::string_view to_string(RateKind kind) {
  switch (kind) {
    case RateKind::SumSqrt:
      return "sum-sqrt";
    case RateKind::HarmonicSqrt:
      return "harmonic-sqrt";
    case RateKind::CappedMinSqrt:
      return "capped-min-sqrt";
  }
  return "unknown";
}

RateKind rate_kind_from_string(std::string_view name) {
  if (name == "sum-sqrt") return RateKind::SumSqrt;
  if (name == "harmonic-sqrt") return RateKind::HarmonicSqrt;
  if (name == "capped-min-sqrt") return RateKind::CappedMinSqrt;
  throw DomainError("unknown rate kind '" + std::string(name) + "'");
}

std::string_view to_string(BondKind kind) {
  switch (kind) {
    case BondKind::Interior:
      return "interior";
    case BondKind::LeftBath:
      return "left-bath";
    case BondKind::RightBath:
      return "right-bath";
    case BondKind::Vertical:
      return "vertical";
  }
  return "unknown";
}

RateSpec::RateSpec(RateKind kind, std::optional<double> cap)
    : kind_(kind), cap_(cap) {
  if (cap_ && !(*cap_ > 0.0)) {
    throw DomainError("rate cap must be strictly positive");
  }
  if (kind_ == RateKind::CappedMinSqrt && !cap_) {
    throw DomainError("capped-min-sqrt requires a cap");
  }
}

BathSpec::BathSpec(double left, double right) : T_left(left), T_right(right) {
  if (!(left > 0.0) || !(right > 0.0)) {
    throw DomainError("bath temperatures must be strictly positive");
  }
}

Topology::Topology(TopologyKind kind, std::size_t rows, std::size_t columns)
    : kind_(kind), rows_(rows), columns_(columns) {}

Topology Topology::chain(std::size_t n) {
  if (n < 1) throw DomainError("chain needs at least one site");
  return Topology(TopologyKind::Chain1D, 1, n);
}

Topology Topology::lattice(std::size_t rows, std::size_t columns) {
  if (rows < 1 || columns < 1) {
    throw DomainError("lattice needs at least one row and one column");
  }
  return Topology(TopologyKind::Lattice2D, rows, columns);
}

Topology Topology::ring(std::size_t n) {
  if (n < 2) throw DomainError("ring needs at least two sites");
  return Topology(TopologyKind::Ring, 1, n);
}

std::vector<Bond> enumerate_bonds(const Topology& topology) {
  std::vector<Bond> bonds;
  const std::size_t rows = topology.rows();
  const std::size_t cols = topology.columns();
  if (topology.kind() == TopologyKind::Ring) {
    bonds.reserve(cols);
    for (std::size_t i = 0; i < cols; ++i) {
      bonds.push_back({BondKind::Interior, i, (i + 1) % cols});
    }
    return bonds;
  }
  bonds.reserve(rows * (cols + 1) + (rows - 1) * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    bonds.push_back({BondKind::LeftBath, topology.site(r, 0)});
    for (std::size_t c = 0; c + 1 < cols; ++c) {
      bonds.push_back(
          {BondKind::Interior, topology.site(r, c), topology.site(r, c + 1)});
    }
    bonds.push_back({BondKind::RightBath, topology.site(r, cols - 1)});
  }
  for (std::size_t r = 0; r + 1 < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      bonds.push_back(
          {BondKind::Vertical, topology.site(r, c), topology.site(r + 1, c)});
    }
  }
  return bonds;
}

SystemState::SystemState(Topology topo, std::vector<double> initial, double t0)
    : topology(topo), energies(std::move(initial)), time(t0) {
  if (energies.size() != topology.sites()) {
    throw DomainError("energy vector length does not match topology");
  }
  for (double e : energies) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw DomainError("site energies must be finite and non-negative");
    }
  }
  if (!(time >= 0.0)) throw DomainError("state time must be non-negative");
}

double SystemState::total_energy() const {
  return std::accumulate(energies.begin(), energies.end(), 0.0);
}

namespace {

double raw_rate(RateKind kind, double x, double y) {
  switch (kind) {
    case RateKind::SumSqrt:
      return std::sqrt(x + y);
    case RateKind::HarmonicSqrt: {
      const double s = x + y;
      return s > 0.0 ? std::sqrt(x * y / s) : 0.0;
    }
    case RateKind::CappedMinSqrt:
      return std::sqrt(std::min(x, y));
  }
  return 0.0;
}

}  // namespace

double pair_rate(const RateSpec& spec, double x, double y) {
  if (!(x >= 0.0) || !(y >= 0.0)) {
    throw DomainError("pair_rate: energies must be non-negative");
  }
  const double r = raw_rate(spec.kind(), x, y);
  return spec.cap() ? std::min(*spec.cap(), r) : r;
}

double boundary_rate(const RateSpec& spec, double T_bath, double e) {
  if (!(T_bath > 0.0)) {
    throw DomainError("boundary_rate: bath temperature must be positive");
  }
  return pair_rate(spec, T_bath, e);
}

std::pair<double, double> apply_pair_exchange(double x, double y, double p) {
  if (!(x >= 0.0) || !(y >= 0.0)) {
    throw DomainError("apply_pair_exchange: energies must be non-negative");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("apply_pair_exchange: p must lie in (0, 1)");
  }
  const double pooled = x + y;
  const double first = p * pooled;
  // Taking the remainder keeps first + second == pooled to within rounding
  // of a single subtraction.
  return {first, pooled - first};
}

double apply_boundary_exchange(double e, double drawn, double p) {
  if (!(e >= 0.0) || !(drawn >= 0.0)) {
    throw DomainError("apply_boundary_exchange: energies must be non-negative");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("apply_boundary_exchange: p must lie in (0, 1)");
  }
  return p * (e + drawn);
}

double generator_drift_linear(std::span<const double> coeffs,
                              const SystemState& state, const BathSpec& baths,
                              const RateSpec& spec) {
  const auto& E = state.energies;
  if (coeffs.size() != E.size()) {
    throw DomainError("generator_drift_linear: one coefficient per site");
  }
  double drift = 0.0;
  for (const Bond& bond : enumerate_bonds(state.topology)) {
    const std::size_t a = bond.first;
    switch (bond.kind) {
      case BondKind::Interior:
      case BondKind::Vertical: {
        const std::size_t b = bond.second;
        const double pooled = E[a] + E[b];
        const double mean_after = 0.5 * (coeffs[a] + coeffs[b]) * pooled;
        drift += pair_rate(spec, E[a], E[b]) *
                 (mean_after - coeffs[a] * E[a] - coeffs[b] * E[b]);
        break;
      }
      case BondKind::LeftBath:
      case BondKind::RightBath: {
        const double T =
            bond.kind == BondKind::LeftBath ? baths.T_left : baths.T_right;
        drift += boundary_rate(spec, T, E[a]) * coeffs[a] *
                 (0.5 * (E[a] + T) - E[a]);
        break;
      }
    }
  }
  return drift;
}

}  // namespace heatchain
