#include "harmonic/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "harmonic/errors.hpp"

namespace harmonic {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

auto type_name(const json& j) -> std::string { return j.type_name(); }

// Reads one JSON object, remembering which keys were consumed so that leftovers
// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) {
      throw ConfigError(where() + ": expected an object, got " + type_name(obj_));
    }
  }

  auto has(const std::string& key) -> bool {
    seen_.insert(key);
    return obj_.contains(key);
  }

  auto number(const std::string& key, double fallback) -> double {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number, got " + type_name(v));
    return v.get<double>();
  }

  auto optional_number(const std::string& key, std::optional<double> fallback)
      -> std::optional<double> {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) {
      throw ConfigError(at(key) + ": expected a number or null, got " + type_name(v));
    }
    return v.get<double>();
  }

  auto integer(const std::string& key, long long fallback) -> long long {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer, got " + type_name(v));
    return v.get<long long>();
  }

  auto unsigned64(const std::string& key, std::uint64_t fallback) -> std::uint64_t {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(at(key) + ": expected a non-negative integer, got " + v.dump());
    }
    return v.get<std::uint64_t>();
  }

  auto string(const std::string& key, const std::string& fallback) -> std::string {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string, got " + type_name(v));
    return v.get<std::string>();
  }

  auto child(const std::string& key) -> const json* {
    if (!has(key)) return nullptr;
    return &obj_.at(key);
  }

  [[nodiscard]] auto at(const std::string& key) const -> std::string {
    return "key '" + (path_.empty() ? key : path_ + "." + key) + "'";
  }
  [[nodiscard]] auto where() const -> std::string {
    return path_.empty() ? std::string("config root") : "key '" + path_ + "'";
  }
  [[nodiscard]] auto path(const std::string& key) const -> std::string {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.contains(k)) throw ConfigError("unknown key '" + path(k) + "'");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

auto read_position(const json& v, Topology topology, const std::string& path) -> std::size_t {
  const auto in_range = [](const json& e) {
    return e.is_number_integer() && e.get<long long>() >= 0 && e.get<long long>() < kRingSize;
  };
  if (in_range(v) && topology.is_ring()) return v.get<std::size_t>();
  const std::size_t arity = topology.is_ring() ? 1 : 2;
  if (!v.is_array() || v.size() != arity || !std::all_of(v.begin(), v.end(), in_range)) {
    throw ConfigError("key '" + path + "': expected " +
                      (arity == 1 ? std::string("[k]") : std::string("[i, j]")) +
                      " with entries in [0, 11] for the " + std::string(topology.name()) +
                      " topology");
  }
  if (topology.is_ring()) return static_cast<std::size_t>(NodeIndex{v[0].get<long long>()}.value());
  return topology.flat(TorusCoord{NodeIndex{v[0].get<long long>()}, NodeIndex{v[1].get<long long>()}});
}

auto write_position(Topology topology, std::size_t flat) -> ordered_json {
  const TorusCoord c = topology.coord(flat);
  if (topology.is_ring()) return ordered_json::array({c.i.value()});
  return ordered_json::array({c.i.value(), c.j.value()});
}

auto parse_mode(const std::string& s, const std::string& path) -> NavigationMode {
  if (s == "shift-1d") return NavigationMode::Shift1D;
  if (s == "phase-2d") return NavigationMode::Phase2D;
  throw ConfigError("key '" + path + "': expected \"shift-1d\" or \"phase-2d\", got \"" + s + "\"");
}

auto parse_shift_mode(const std::string& s, const std::string& path) -> ShiftMode {
  if (s == "step-clock") return ShiftMode::StepClock;
  if (s == "continuous") return ShiftMode::Continuous;
  throw ConfigError("key '" + path + "': expected \"step-clock\" or \"continuous\", got \"" + s + "\"");
}

auto is_whole_multiple(double span, double step) -> bool {
  const double q = span / step;
  return std::abs(q - std::round(q)) <= 1e-6 * std::max(1.0, q);
}

const std::set<std::string>& known_checks() {
  static const std::set<std::string> names{check::kAccuracy,  check::kFinalPosition,
                                           check::kSequence,  check::kDrift,
                                           check::kConvergence, check::kAmplitudeCv,
                                           check::kPersistence};
  return names;
}

}  // namespace

auto to_string(NavigationMode mode) -> std::string {
  return mode == NavigationMode::Shift1D ? "shift-1d" : "phase-2d";
}

auto to_string(ShiftMode mode) -> std::string {
  return mode == ShiftMode::StepClock ? "step-clock" : "continuous";
}

void ExperimentSpec::validate() const {
  kernel.validate();
  if (!(kernel_scale >= 0.0)) throw ValidationError("kernel.scale must be >= 0");
  dynamics.validate();
  if (!(duration_ms > 0.0)) throw ValidationError("duration_ms must be > 0");
  if (!is_whole_multiple(duration_ms, dynamics.dt_ms)) {
    throw ValidationError("duration_ms must be a whole multiple of dynamics.dt_ms");
  }
  if (!(sample_every_ms >= dynamics.dt_ms) || !is_whole_multiple(sample_every_ms, dynamics.dt_ms)) {
    throw ValidationError("sample_every_ms must be a whole multiple of dynamics.dt_ms, >= dt_ms");
  }
  if (init.center >= topology.size()) throw ValidationError("init.center lies outside the topology");
  if (!(init.width_nodes > 0.0)) throw ValidationError("init.width_nodes must be > 0");
  if (!(init.amplitude > 0.0)) throw ValidationError("init.amplitude must be > 0");
  if (!(init.hold_ms >= 0.0) || !(init.hold_ms < duration_ms)) {
    throw ValidationError("init.hold_ms must lie in [0, duration_ms)");
  }
  if (mode == NavigationMode::Shift1D && !topology.is_ring()) {
    throw ValidationError("navigation.mode shift-1d requires topology ring");
  }
  if (mode == NavigationMode::Phase2D && !topology.is_torus()) {
    throw ValidationError("navigation.mode phase-2d requires topology torus");
  }
  velocity.validate(topology, duration_ms);
  if (!(gains.i_shift >= 0.0)) throw ValidationError("navigation.i_shift must be >= 0");
  if (!(gains.i0 >= 0.0)) throw ValidationError("navigation.i0 must be >= 0");

  const IntendedSchedule sched = schedule();
  sched.validate();
  if (std::abs(sched.windows.front().start_ms) > 1e-9 ||
      std::abs(sched.windows.back().end_ms - duration_ms) > 1e-9) {
    throw ValidationError("schedule windows must span [0, duration_ms]");
  }
  for (const auto& w : sched.windows) {
    if (w.expected >= topology.size()) throw ValidationError("schedule position outside topology");
  }

  if (!(analysis.convergence_rel_tol > 0.0)) throw ValidationError("analysis.convergence_rel_tol must be > 0");
  if (!(analysis.convergence_window_ms > 0.0)) throw ValidationError("analysis.convergence_window_ms must be > 0");
  if (!(analysis.min_accuracy >= 0.0 && analysis.min_accuracy <= 1.0)) {
    throw ValidationError("analysis.min_accuracy must lie in [0, 1]");
  }
  for (const auto& c : analysis.checks) {
    if (!known_checks().contains(c)) throw ValidationError("analysis.checks: unknown check '" + c + "'");
  }
}

auto ExperimentSpec::schedule() const -> IntendedSchedule {
  if (schedule_windows) return IntendedSchedule{*schedule_windows, transition_tolerance_ms};
  return intended_schedule(topology, init.center, velocity, duration_ms, transition_tolerance_ms);
}

auto parse_config(const json& doc) -> ExperimentSpec {
  ExperimentSpec spec;
  ObjectReader root(doc, "");
  spec.name = root.string("name", spec.name);

  const std::string topo = root.string("topology", "ring");
  if (topo == "ring") {
    spec.topology = Topology::ring();
  } else if (topo == "torus") {
    spec.topology = Topology::torus();
    spec.mode = NavigationMode::Phase2D;
  } else {
    throw ConfigError("key 'topology': expected \"ring\" or \"torus\", got \"" + topo + "\"");
  }

  if (const json* k = root.child("kernel")) {
    ObjectReader r(*k, "kernel");
    spec.kernel.j_exc = r.number("j_exc", spec.kernel.j_exc);
    spec.kernel.j_inh = r.number("j_inh", spec.kernel.j_inh);
    spec.kernel.sigma_exc = r.number("sigma_exc", spec.kernel.sigma_exc);
    spec.kernel.sigma_inh = r.number("sigma_inh", spec.kernel.sigma_inh);
    spec.kernel_scale = r.number("scale", spec.kernel_scale);
    r.finish();
  }

  if (const json* d = root.child("dynamics")) {
    ObjectReader r(*d, "dynamics");
    spec.dynamics.tau_ms = r.number("tau_ms", spec.dynamics.tau_ms);
    spec.dynamics.dt_ms = r.number("dt_ms", spec.dynamics.dt_ms);
    spec.dynamics.rate_cap = r.optional_number("rate_cap", spec.dynamics.rate_cap);
    spec.dynamics.noise_std = r.number("noise_std", spec.dynamics.noise_std);
    r.finish();
  }

  if (const json* i = root.child("init")) {
    ObjectReader r(*i, "init");
    if (const json* c = r.child("center")) spec.init.center = read_position(*c, spec.topology, "init.center");
    spec.init.width_nodes = r.number("width_nodes", spec.init.width_nodes);
    spec.init.amplitude = r.number("amplitude", spec.init.amplitude);
    spec.init.hold_ms = r.number("hold_ms", spec.init.hold_ms);
    r.finish();
  }

  if (const json* v = root.child("velocity")) {
    if (!v->is_array()) throw ConfigError("key 'velocity': expected an array of segments");
    for (std::size_t s = 0; s < v->size(); ++s) {
      ObjectReader r((*v)[s], "velocity." + std::to_string(s));
      VelocitySegment seg;
      seg.t_start_ms = r.number("t_start_ms", 0.0);
      seg.t_end_ms = r.number("t_end_ms", 0.0);
      seg.v = r.number("v", 0.0);
      seg.axis = static_cast<int>(r.integer("axis", 1));
      r.finish();
      spec.velocity.segments.push_back(seg);
    }
  }

  if (const json* n = root.child("navigation")) {
    ObjectReader r(*n, "navigation");
    if (r.has("mode")) spec.mode = parse_mode(r.string("mode", ""), "navigation.mode");
    if (r.has("shift_mode")) {
      spec.gains.shift_mode = parse_shift_mode(r.string("shift_mode", ""), "navigation.shift_mode");
    }
    spec.gains.i_shift = r.number("i_shift", spec.gains.i_shift);
    spec.gains.i0 = r.number("i0", spec.gains.i0);
    r.finish();
  }

  spec.duration_ms = root.number("duration_ms", spec.duration_ms);
  spec.sample_every_ms = root.number("sample_every_ms", spec.sample_every_ms);

  if (const json* s = root.child("schedule")) {
    ObjectReader r(*s, "schedule");
    spec.transition_tolerance_ms = r.number("transition_tolerance_ms", spec.transition_tolerance_ms);
    if (const json* w = r.child("windows")) {
      if (!w->is_array()) throw ConfigError("key 'schedule.windows': expected an array");
      std::vector<ScheduleWindow> windows;
      for (std::size_t k = 0; k < w->size(); ++k) {
        const std::string path = "schedule.windows." + std::to_string(k);
        ObjectReader wr((*w)[k], path);
        ScheduleWindow win;
        win.start_ms = wr.number("start_ms", 0.0);
        win.end_ms = wr.number("end_ms", 0.0);
        const json* e = wr.child("expected");
        if (!e) throw ConfigError("key '" + path + ".expected' is required");
        win.expected = read_position(*e, spec.topology, path + ".expected");
        wr.finish();
        windows.push_back(win);
      }
      spec.schedule_windows = std::move(windows);
    }
    r.finish();
  }

  if (const json* a = root.child("analysis")) {
    ObjectReader r(*a, "analysis");
    auto& an = spec.analysis;
    an.convergence_rel_tol = r.number("convergence_rel_tol", an.convergence_rel_tol);
    an.convergence_window_ms = r.number("convergence_window_ms", an.convergence_window_ms);
    an.max_convergence_ms = r.number("max_convergence_ms", an.max_convergence_ms);
    an.min_accuracy = r.number("min_accuracy", an.min_accuracy);
    an.max_amplitude_cv = r.number("max_amplitude_cv", an.max_amplitude_cv);
    an.min_persistence_ratio = r.number("min_persistence_ratio", an.min_persistence_ratio);
    an.drift_window_start_ms = r.optional_number("drift_window_start_ms", an.drift_window_start_ms);
    an.amplitude_window_start_ms = r.optional_number("amplitude_window_start_ms", an.amplitude_window_start_ms);
    an.amplitude_window_end_ms = r.optional_number("amplitude_window_end_ms", an.amplitude_window_end_ms);
    if (const json* c = r.child("checks")) {
      if (!c->is_array() || !std::all_of(c->begin(), c->end(), [](const json& e) { return e.is_string(); })) {
        throw ConfigError("key 'analysis.checks': expected an array of strings");
      }
      an.checks = c->get<std::vector<std::string>>();
    }
    r.finish();
  }

  spec.seed = root.unsigned64("seed", spec.seed);
  spec.output_dir = root.string("output_dir", spec.output_dir);
  root.finish();
  return spec;
}

auto parse_config(const std::string& text) -> ExperimentSpec {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc);
}

auto load_config(const std::filesystem::path& path) -> ExperimentSpec {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

auto to_json(const ExperimentSpec& spec) -> ordered_json {
  ordered_json j;
  j["name"] = spec.name;
  j["topology"] = std::string(spec.topology.name());
  j["kernel"] = {{"j_exc", spec.kernel.j_exc},
                 {"j_inh", spec.kernel.j_inh},
                 {"sigma_exc", spec.kernel.sigma_exc},
                 {"sigma_inh", spec.kernel.sigma_inh},
                 {"scale", spec.kernel_scale}};
  ordered_json dyn;
  dyn["tau_ms"] = spec.dynamics.tau_ms;
  dyn["dt_ms"] = spec.dynamics.dt_ms;
  dyn["rate_cap"] = spec.dynamics.rate_cap ? ordered_json(*spec.dynamics.rate_cap) : ordered_json(nullptr);
  dyn["noise_std"] = spec.dynamics.noise_std;
  j["dynamics"] = dyn;
  j["init"] = {{"center", write_position(spec.topology, spec.init.center)},
               {"width_nodes", spec.init.width_nodes},
               {"amplitude", spec.init.amplitude},
               {"hold_ms", spec.init.hold_ms}};
  ordered_json vel = ordered_json::array();
  for (const auto& s : spec.velocity.segments) {
    vel.push_back({{"t_start_ms", s.t_start_ms}, {"t_end_ms", s.t_end_ms}, {"v", s.v}, {"axis", s.axis}});
  }
  j["velocity"] = vel;
  j["navigation"] = {{"mode", to_string(spec.mode)},
                     {"shift_mode", to_string(spec.gains.shift_mode)},
                     {"i_shift", spec.gains.i_shift},
                     {"i0", spec.gains.i0}};
  j["duration_ms"] = spec.duration_ms;
  j["sample_every_ms"] = spec.sample_every_ms;
  ordered_json windows = ordered_json::array();
  for (const auto& w : spec.schedule().windows) {
    windows.push_back({{"start_ms", w.start_ms},
                       {"end_ms", w.end_ms},
                       {"expected", write_position(spec.topology, w.expected)}});
  }
  j["schedule"] = {{"transition_tolerance_ms", spec.transition_tolerance_ms}, {"windows", windows}};
  const auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  const auto& an = spec.analysis;
  ordered_json analysis;
  analysis["convergence_rel_tol"] = an.convergence_rel_tol;
  analysis["convergence_window_ms"] = an.convergence_window_ms;
  analysis["max_convergence_ms"] = an.max_convergence_ms;
  analysis["min_accuracy"] = an.min_accuracy;
  analysis["max_amplitude_cv"] = an.max_amplitude_cv;
  analysis["min_persistence_ratio"] = an.min_persistence_ratio;
  analysis["drift_window_start_ms"] = opt(an.drift_window_start_ms);
  analysis["amplitude_window_start_ms"] = opt(an.amplitude_window_start_ms);
  analysis["amplitude_window_end_ms"] = opt(an.amplitude_window_end_ms);
  analysis["checks"] = an.checks;
  j["analysis"] = analysis;
  j["seed"] = spec.seed;
  j["output_dir"] = spec.output_dir;
  return j;
}

auto to_config_text(const ExperimentSpec& spec) -> std::string { return to_json(spec).dump(2) + "\n"; }

void set_dotted(ordered_json& doc, const std::string& dotted_key, const ordered_json& value) {
  ordered_json* node = &doc;
  std::stringstream parts(dotted_key);
  std::string part;
  std::string walked;
  while (std::getline(parts, part, '.')) {
    walked += walked.empty() ? part : "." + part;
    if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else if (node->is_array() && !part.empty() &&
               std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
               std::stoul(part) < node->size()) {
      node = &(*node)[std::stoul(part)];
    } else {
      throw ConfigError("unknown key '" + walked + "'");
    }
  }
  if (walked.empty()) throw ConfigError("empty parameter key");
  *node = value;
}

}  // namespace harmonic
