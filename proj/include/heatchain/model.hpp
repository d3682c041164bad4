#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace heatchain {

enum class RateKind {
  SumSqrt,        // sqrt(x + y)
  HarmonicSqrt,   // sqrt(x y / (x + y))
  CappedMinSqrt,  // min(cap, sqrt(min(x, y)))
};

std::string_view to_string(RateKind kind);
RateKind rate_kind_from_string(std::string_view name);

/// Clock-rate function of an exchange bond. `cap` is required for
/// CappedMinSqrt and optional for the other kinds, where it bounds the
/// rate from above.
class RateSpec {
 public:
  explicit RateSpec(RateKind kind, std::optional<double> cap = std::nullopt);

  RateKind kind() const { return kind_; }
  const std::optional<double>& cap() const { return cap_; }

 private:
  RateKind kind_;
  std::optional<double> cap_;
};

struct BathSpec {
  double T_left;
  double T_right;

  BathSpec(double left, double right);
};

enum class TopologyKind { Chain1D, Lattice2D, Ring };

/// Site/bond layout. Sites of a lattice are stored row-major,
/// site(r, c) = r * columns + c. A chain is a one-row lattice.
class Topology {
 public:
  static Topology chain(std::size_t n);
  static Topology lattice(std::size_t rows, std::size_t columns);
  static Topology ring(std::size_t n);

  TopologyKind kind() const { return kind_; }
  std::size_t rows() const { return rows_; }
  std::size_t columns() const { return columns_; }
  std::size_t sites() const { return rows_ * columns_; }
  bool has_baths() const { return kind_ != TopologyKind::Ring; }

  std::size_t site(std::size_t row, std::size_t column) const {
    return row * columns_ + column;
  }

  bool operator==(const Topology&) const = default;

 private:
  Topology(TopologyKind kind, std::size_t rows, std::size_t columns);

  TopologyKind kind_;
  std::size_t rows_;
  std::size_t columns_;
};

enum class BondKind { Interior, LeftBath, RightBath, Vertical };

std::string_view to_string(BondKind kind);

/// An exchange channel. Bath bonds have only `first`; `second` is npos.
struct Bond {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  BondKind kind;
  std::size_t first;
  std::size_t second = npos;

  bool is_bath() const {
    return kind == BondKind::LeftBath || kind == BondKind::RightBath;
  }
};

/// Bond order: for each row, left bath, horizontal bonds left to right,
/// right bath; then vertical bonds row by row. Ring bonds are (i, i+1 mod N).
std::vector<Bond> enumerate_bonds(const Topology& topology);

struct SystemState {
  Topology topology;
  std::vector<double> energies;
  double time = 0.0;

  SystemState(Topology topo, std::vector<double> initial, double t0 = 0.0);

  double total_energy() const;
};

double pair_rate(const RateSpec& spec, double x, double y);

/// Rate of a bath bond: the bath temperature takes the place of the
/// neighbouring energy.
double boundary_rate(const RateSpec& spec, double T_bath, double e);

/// Random-halves redistribution: the pair pools its energy and a fraction
/// p goes to the first site.
std::pair<double, double> apply_pair_exchange(double x, double y, double p);

/// Bath exchange: the site pools its energy with a draw from the bath and
/// keeps a fraction p.
double apply_boundary_exchange(double e, double drawn, double p);

/// L f(E) for the linear observable f(E) = sum_n coeffs[n] * E_n, using the
/// closed-form averages E[p] = 1/2 and E[bath draw] = T.
double generator_drift_linear(std::span<const double> coeffs,
                              const SystemState& state, const BathSpec& baths,
                              const RateSpec& spec);

}  // namespace heatchain
