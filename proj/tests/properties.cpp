#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "harmonic/attractor.hpp"
#include "harmonic/experiment.hpp"
#include "harmonic/navigation.hpp"
#include "harmonic/topology.hpp"
#include "oracles.hpp"

namespace harmonic::props {

namespace {

auto fail(const std::string& what) -> Result { return Result{false, what}; }

auto simulate(const ExperimentSpec& spec, const InputSchedule& input) -> Trace {
  auto w = std::make_shared<const WeightMatrix>(build_kernel(spec.topology, spec.kernel, spec.kernel_scale));
  return run(NetworkState::quiescent(w), input, spec.dynamics, spec.duration_ms, spec.sample_every_ms, spec.seed);
}

auto default_input(const ExperimentSpec& spec) -> InputSchedule {
  return schedule_input(spec.topology, spec.velocity, spec.mode, spec.gains, spec.init);
}

// Runs `spec` and the same network with its input schedule conjugated by the
// translation (di, dj); every sample of the second run must be the first one
// translated, bit for bit.
auto equivariant(const ExperimentSpec& spec, long long di, long long dj) -> Result {
  const Topology topo = spec.topology;
  const InputSchedule base = default_input(spec);
  const auto moved = [topo, di, dj](std::size_t k) { return topo.shift(k, di, dj); };
  const InputSchedule shifted = [base, topo, moved](double t, std::span<const double> rates) {
    Field back(rates.size());
    for (std::size_t k = 0; k < rates.size(); ++k) back[k] = rates[moved(k)];
    const Field in = base(t, back);
    Field out(in.size());
    for (std::size_t k = 0; k < in.size(); ++k) out[moved(k)] = in[k];
    return out;
  };
  const Trace a = simulate(spec, base);
  const Trace b = simulate(spec, shifted);
  if (a.size() != b.size()) return fail("sample counts differ");
  for (std::size_t n = 0; n < a.size(); ++n) {
    for (std::size_t k = 0; k < topo.size(); ++k) {
      if (a[n].rates[k] != b[n].rates[moved(k)]) {
        std::ostringstream os;
        os << topo.name() << " shift (" << di << "," << dj << ") breaks at t=" << a[n].t_ms << " node " << k;
        return fail(os.str());
      }
    }
  }
  return {};
}

}  // namespace

auto distance_matches_brute_force() -> Result {
  int pairs = 0;
  for (int a = 0; a < 12; ++a) {
    for (int b = 0; b < 12; ++b) {
      const int d = harmonic_distance(NodeIndex{a}, NodeIndex{b});
      if (d != oracle::ring_distance(a, b) || d != harmonic_distance(NodeIndex{b}, NodeIndex{a})) {
        return fail("pair (" + std::to_string(a) + "," + std::to_string(b) + ")");
      }
      ++pairs;
    }
  }
  return {true, std::to_string(pairs) + " pairs"};
}

auto distance_triangle_inequality() -> Result {
  int triples = 0;
  for (int a = 0; a < 12; ++a) {
    for (int b = 0; b < 12; ++b) {
      for (int c = 0; c < 12; ++c) {
        const NodeIndex x{a}, y{b}, z{c};
        if (harmonic_distance(x, z) > harmonic_distance(x, y) + harmonic_distance(y, z)) {
          return fail("triple (" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")");
        }
        ++triples;
      }
    }
  }
  return {true, std::to_string(triples) + " triples"};
}

auto toroidal_distance_composition() -> Result {
  int pairs = 0;
  for (int a = 0; a < 144; ++a) {
    for (int b = 0; b < 144; ++b) {
      const TorusCoord p{NodeIndex{a / 12}, NodeIndex{a % 12}};
      const TorusCoord q{NodeIndex{b / 12}, NodeIndex{b % 12}};
      const double di = oracle::ring_distance(a / 12, b / 12);
      const double dj = oracle::ring_distance(a % 12, b % 12);
      if (std::abs(toroidal_distance(p, q) - std::sqrt(di * di + dj * dj)) > 1e-12) {
        return fail("pair " + std::to_string(a) + "," + std::to_string(b));
      }
      ++pairs;
    }
  }
  return {true, std::to_string(pairs) + " pairs"};
}

auto kernel_circulant_and_symmetric() -> Result {
  for (const KernelParams& p : {KernelParams::published(), KernelParams::calibrated()}) {
    const WeightMatrix ring = build_ring_kernel(p);
    for (std::size_t k = 0; k < 12; ++k) {
      for (std::size_t m = 0; m < 12; ++m) {
        if (ring(k, (m + k) % 12) != ring(0, m)) return fail("ring row " + std::to_string(k) + " not a shift");
        if (ring(k, m) != ring(m, k)) return fail("ring not symmetric");
      }
    }
    const WeightMatrix torus = build_torus_kernel(p);
    const Topology t = Topology::torus();
    for (std::size_t a = 0; a < 144; ++a) {
      for (std::size_t b = 0; b < 144; ++b) {
        if (torus(a, b) != torus(b, a)) return fail("torus not symmetric");
        if (torus(a, t.translate(b, a)) != torus(0, b)) return fail("torus row " + std::to_string(a) + " not a shift");
      }
    }
  }
  return {true, "ring 12x12 and torus 144x144, published and calibrated"};
}

auto trace_translation_equivariance(int shift) -> Result {
  if (auto r = equivariant(builtin::rotation_180(), shift, 0); !r.ok) return r;
  if (auto r = equivariant(builtin::torus_independence(), shift, 2LL * shift); !r.ok) return r;
  return {true, "ring s=" + std::to_string(shift) + ", torus (" + std::to_string(shift) + "," +
                    std::to_string(2 * shift) + ")"};
}

auto dt_halving() -> Result {
  const ExperimentSpec coarse = builtin::rotation_180();
  ExperimentSpec fine = coarse;
  fine.dynamics.dt_ms = coarse.dynamics.dt_ms / 2.0;
  const Trace a = simulate(coarse, default_input(coarse));
  const Trace b = simulate(fine, default_input(fine));
  if (a.size() != b.size()) return fail("sample counts differ");
  double sup = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    for (std::size_t k = 0; k < a[n].rates.size(); ++k) sup = std::max(sup, std::abs(a[n].rates[k] - b[n].rates[k]));
  }
  std::ostringstream os;
  os << "sup-norm " << sup << ", final nodes " << a.back().decoded.value_or(99) << "/" << b.back().decoded.value_or(99);
  return {a.back().decoded == b.back().decoded && a.back().decoded.has_value() && sup < 1e-2, os.str()};
}

auto shift_input_antisymmetry(int cases) -> Result {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> rate(0.0, 2.0);
  std::uniform_real_distribution<double> vel(-3.0, 3.0);
  std::bernoulli_distribution zero(0.3);
  const ShiftGain g{0.8};
  for (int c = 0; c < cases; ++c) {
    Field r(12);
    for (auto& x : r) x = zero(rng) ? 0.0 : rate(rng);
    if (std::none_of(r.begin(), r.end(), [](double x) { return x > 0.0; })) r[c % 12] = 1.0;
    const double v = vel(rng);
    const Field plus = shift_input_1d(r, v, g);
    const Field minus = shift_input_1d(r, -v, g);
    double sum = 0.0;
    for (std::size_t k = 0; k < 12; ++k) {
      sum += plus[k];
      if (minus[k] != -plus[k]) return fail("sign antisymmetry broken in case " + std::to_string(c));
    }
    if (sum != 0.0) return fail("nonzero sum in case " + std::to_string(c));
  }
  return {true, std::to_string(cases) + " random fields"};
}

auto leak_law(int steps) -> Result {
  const DynamicsParams d{10.0, 0.1, std::nullopt, 0.0};
  NetworkState s{Topology::ring(), Field(12), std::make_shared<const WeightMatrix>(build_ring_kernel(KernelParams::published(), 0.0))};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (auto& x : s.rates) x = u(rng);
  const Field r0 = s.rates;
  const Field zero(12, 0.0);
  for (int n = 0; n < steps; ++n) s = step(s, zero, d);
  const double factor = std::pow(1.0 - d.dt_ms / d.tau_ms, steps);
  double worst = 0.0;
  for (std::size_t k = 0; k < 12; ++k) worst = std::max(worst, std::abs(s.rates[k] / (r0[k] * factor) - 1.0));
  std::ostringstream os;
  os << steps << " steps, max relative error " << worst;
  return {worst < 1e-9, os.str()};
}

}  // namespace harmonic::props
