#include "harmonic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "harmonic/errors.hpp"

namespace harmonic {

namespace {

constexpr double kTimeEps = 1e-9;

auto round_half_up(double x) -> long long { return static_cast<long long>(std::floor(x + 0.5)); }

// Instants where the nearest node to the displacement of `axis` may change.
void half_node_crossings(const VelocityProfile& profile, int axis, double duration_ms,
                         std::vector<double>& out) {
  for (const auto& seg : profile.segments) {
    if (seg.axis != axis || seg.v == 0.0) continue;
    const double x0 = profile.displacement(seg.t_start_ms, axis);
    const double x1 = profile.displacement(seg.t_end_ms, axis);
    const double lo = std::min(x0, x1);
    const double hi = std::max(x0, x1);
    for (double h = std::ceil(lo - 0.5) + 0.5; h <= hi; h += 1.0) {
      if (h < lo) continue;
      const double t = seg.t_start_ms + (h - x0) * kEpochMs / seg.v;
      if (t > 0.0 && t < duration_ms) out.push_back(t);
    }
  }
}

}  // namespace

auto decode_angle(std::span<const double> rates) -> double {
  return kDegreesPerNode * static_cast<double>(bump_position(rates));
}

auto decode_torus(std::span<const double> rates) -> std::pair<double, double> {
  const TorusCoord c = bump_position(Topology::torus(), rates);
  return {kDegreesPerNode * c.i.value(), kDegreesPerNode * c.j.value()};
}

auto decode_population_vector(std::span<const double> rates) -> double {
  double x = 0.0;
  double y = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(rates.size());
    x += rates[k] * std::cos(a);
    y += rates[k] * std::sin(a);
  }
  if (std::hypot(x, y) == 0.0) throw NoBumpError("population vector is zero");
  double deg = std::atan2(y, x) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  return deg >= 360.0 ? 0.0 : deg;
}

auto position_distance(Topology topology, std::size_t a, std::size_t b) -> int {
  const TorusCoord ca = topology.coord(a);
  const TorusCoord cb = topology.coord(b);
  if (topology.is_ring()) return harmonic_distance(ca.i, cb.i);
  return std::max(harmonic_distance(ca.i, cb.i), harmonic_distance(ca.j, cb.j));
}

void IntendedSchedule::validate() const {
  if (windows.empty()) throw ValidationError("intended schedule has no windows");
  if (!(transition_tolerance_ms >= 0.0)) {
    throw ValidationError("transition_tolerance_ms must be >= 0");
  }
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto& win = windows[w];
    if (!(win.start_ms < win.end_ms)) throw ValidationError("schedule window has start >= end");
    if (w > 0 && std::abs(windows[w - 1].end_ms - win.start_ms) > kTimeEps) {
      throw ValidationError("schedule windows must be contiguous and ordered");
    }
    const double bands = w + 1 < windows.size() ? 2.0 : 1.0;
    if (!(win.end_ms - win.start_ms > bands * transition_tolerance_ms)) {
      throw ValidationError("schedule window is swallowed by its transition bands");
    }
  }
}

auto IntendedSchedule::expected_at(double t_ms) const -> std::optional<std::size_t> {
  if (windows.empty() || t_ms < windows.front().start_ms - kTimeEps ||
      t_ms > windows.back().end_ms + kTimeEps) {
    std::ostringstream os;
    os << "t=" << t_ms << " ms is not covered by the intended schedule";
    throw WindowError(os.str());
  }
  for (const auto& w : windows) {
    if (std::abs(t_ms - w.start_ms) <= transition_tolerance_ms + kTimeEps) return std::nullopt;
  }
  for (const auto& w : windows) {
    if (t_ms < w.end_ms) return w.expected;
  }
  return windows.back().expected;
}

auto IntendedSchedule::rotated(Topology topology, long long di, long long dj) const
    -> IntendedSchedule {
  IntendedSchedule out = *this;
  for (auto& w : out.windows) w.expected = topology.shift(w.expected, di, dj);
  return out;
}

auto intended_schedule(Topology topology, std::size_t center, const VelocityProfile& profile,
                       double duration_ms, double transition_tolerance_ms) -> IntendedSchedule {
  std::vector<double> instants{0.0, duration_ms};
  half_node_crossings(profile, 1, duration_ms, instants);
  if (topology.is_torus()) half_node_crossings(profile, 2, duration_ms, instants);
  std::sort(instants.begin(), instants.end());
  instants.erase(std::unique(instants.begin(), instants.end(),
                             [](double a, double b) { return std::abs(a - b) <= kTimeEps; }),
                 instants.end());

  const TorusCoord c0 = topology.coord(center);
  IntendedSchedule sched;
  sched.transition_tolerance_ms = transition_tolerance_ms;
  for (std::size_t k = 0; k + 1 < instants.size(); ++k) {
    const double mid = 0.5 * (instants[k] + instants[k + 1]);
    const long long di = round_half_up(profile.displacement(mid, 1));
    const long long dj = topology.is_torus() ? round_half_up(profile.displacement(mid, 2)) : 0;
    const std::size_t expected = topology.flat(rotate(c0, di, dj));
    if (!sched.windows.empty() && sched.windows.back().expected == expected) {
      sched.windows.back().end_ms = instants[k + 1];
    } else {
      sched.windows.push_back({instants[k], instants[k + 1], expected});
    }
  }
  return sched;
}

auto accuracy(const Trace& trace, const IntendedSchedule& sched) -> double {
  std::size_t scored = 0;
  std::size_t hits = 0;
  for (const auto& s : trace.samples()) {
    const auto expected = sched.expected_at(s.t_ms);
    if (!expected) continue;
    ++scored;
    if (s.decoded && *s.decoded == *expected) ++hits;
  }
  if (scored == 0) throw WindowError("no trace sample falls outside the transition bands");
  return static_cast<double>(hits) / static_cast<double>(scored);
}

auto drift(const Trace& trace, double window_start_ms, double window_end_ms) -> int {
  const auto win = trace.window(window_start_ms, window_end_ms);
  if (win.empty()) throw WindowError("drift window contains no samples");
  if (!win.front().decoded) throw NoBumpError("no bump at the start of the drift window");
  const std::size_t ref = *win.front().decoded;
  int worst = 0;
  for (const auto& s : win) {
    if (!s.decoded) throw NoBumpError("bump vanished inside the drift window");
    worst = std::max(worst, position_distance(trace.topology(), ref, *s.decoded));
  }
  return worst;
}

auto convergence_time(const Trace& trace, double rel_tol, double horizon_end_ms, double window_ms)
    -> double {
  const auto& s = trace.samples();
  std::size_t h = 0;
  while (h < s.size() && s[h].t_ms <= horizon_end_ms + kTimeEps) ++h;
  if (h == 0) throw NoConvergenceError("no samples before the convergence horizon");

  // window_ok[k]: amplitude range over [t_k, t_k + window_ms] within rel_tol.
  std::vector<bool> window_ok(h);
  for (std::size_t k = 0; k < h; ++k) {
    double lo = s[k].amplitude;
    double hi = s[k].amplitude;
    for (std::size_t u = k + 1; u < h && s[u].t_ms <= s[k].t_ms + window_ms + kTimeEps; ++u) {
      lo = std::min(lo, s[u].amplitude);
      hi = std::max(hi, s[u].amplitude);
    }
    window_ok[k] = hi > 0.0 && (hi - lo) < rel_tol * hi;
  }

  std::optional<std::size_t> earliest;
  for (std::size_t k = h; k-- > 0;) {
    const bool ok = window_ok[k] && s[k].decoded &&
                    (k + 1 == h || (earliest == k + 1 && s[k + 1].decoded == s[k].decoded));
    if (!ok) break;
    earliest = k;
  }
  if (!earliest) throw NoConvergenceError("bump never settles within the trace");
  return s[*earliest].t_ms;
}

auto amplitude_stats(const Trace& trace, double start_ms, double end_ms) -> AmplitudeStats {
  const auto win = trace.window(start_ms, end_ms);
  if (win.empty()) throw WindowError("amplitude window contains no samples");
  double mean = 0.0;
  for (const auto& s : win) mean += s.amplitude;
  mean /= static_cast<double>(win.size());
  double var = 0.0;
  for (const auto& s : win) var += (s.amplitude - mean) * (s.amplitude - mean);
  var /= static_cast<double>(win.size());
  return AmplitudeStats{mean, mean > 0.0 ? std::sqrt(var) / mean : 0.0};
}

auto decoded_sequence(const Trace& trace, double start_ms, double end_ms) -> std::vector<std::size_t> {
  std::vector<std::size_t> seq;
  for (const auto& s : trace.window(start_ms, end_ms)) {
    if (!s.decoded) continue;
    if (seq.empty() || seq.back() != *s.decoded) seq.push_back(*s.decoded);
  }
  return seq;
}

void ExperimentReport::set_metric(const std::string& name, MetricValue value) {
  for (auto& [k, v] : metrics_) {
    if (k == name) {
      v = std::move(value);
      return;
    }
  }
  metrics_.emplace_back(name, std::move(value));
}

void ExperimentReport::set_verdict(const std::string& name, bool pass) {
  for (auto& [k, v] : verdicts_) {
    if (k == name) {
      v = pass;
      return;
    }
  }
  verdicts_.emplace_back(name, pass);
}

void ExperimentReport::set_threshold(const std::string& name, double value) {
  for (auto& [k, v] : thresholds_) {
    if (k == name) {
      v = value;
      return;
    }
  }
  thresholds_.emplace_back(name, value);
}

auto ExperimentReport::metric(const std::string& name) const -> std::optional<MetricValue> {
  for (const auto& [k, v] : metrics_) {
    if (k == name) return v;
  }
  return std::nullopt;
}

auto ExperimentReport::number(const std::string& name) const -> double {
  const auto m = metric(name);
  if (!m) throw std::out_of_range("report has no metric '" + name + "'");
  if (const auto* d = std::get_if<double>(&*m)) return *d;
  if (const auto* i = std::get_if<long long>(&*m)) return static_cast<double>(*i);
  if (const auto* b = std::get_if<bool>(&*m)) return *b ? 1.0 : 0.0;
  throw std::out_of_range("report metric '" + name + "' is not numeric");
}

auto ExperimentReport::verdict(const std::string& name) const -> bool {
  for (const auto& [k, v] : verdicts_) {
    if (k == name) return v;
  }
  throw std::out_of_range("report has no verdict '" + name + "'");
}

auto ExperimentReport::has_verdict(const std::string& name) const -> bool {
  return std::any_of(verdicts_.begin(), verdicts_.end(),
                     [&](const auto& kv) { return kv.first == name; });
}

auto ExperimentReport::passed() const -> bool {
  return std::all_of(verdicts_.begin(), verdicts_.end(), [](const auto& kv) { return kv.second; });
}

}  // namespace harmonic
