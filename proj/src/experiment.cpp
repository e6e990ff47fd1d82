#include "harmonic/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "harmonic/errors.hpp"
#include "parallel.hpp"

namespace harmonic {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

auto format_position(Topology topology, std::size_t flat) -> std::string {
  const TorusCoord c = topology.coord(flat);
  if (topology.is_ring()) return std::to_string(c.i.value());
  return std::to_string(c.i.value()) + "," + std::to_string(c.j.value());
}

auto format_sequence(Topology topology, const std::vector<std::size_t>& seq) -> std::string {
  std::string out;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (k > 0) out += ">";
    out += format_position(topology, seq[k]);
  }
  return out;
}

auto last_motion_end(const VelocityProfile& profile, double fallback) -> double {
  double end = fallback;
  for (const auto& s : profile.segments) {
    if (s.v != 0.0) end = std::max(end, s.t_end_ms);
  }
  return end;
}

auto has_check(const AnalysisSpec& a, const char* name) -> bool {
  return std::find(a.checks.begin(), a.checks.end(), name) != a.checks.end();
}

auto decoded_between(const Trace& trace, double start, double end) -> std::vector<std::optional<std::size_t>> {
  std::vector<std::optional<std::size_t>> out;
  for (const auto& s : trace.window(start, end)) out.push_back(s.decoded);
  return out;
}

}  // namespace

auto analyze(const ExperimentSpec& spec, const Trace& trace) -> ExperimentReport {
  const AnalysisSpec& an = spec.analysis;
  const Topology topo = spec.topology;
  const IntendedSchedule sched = spec.schedule();
  const double hold_end = spec.init.hold_ms;
  const double first_motion = spec.velocity.first_motion_ms(spec.duration_ms);
  const double motion_end = last_motion_end(spec.velocity, hold_end);
  const bool moving = first_motion < spec.duration_ms;

  ExperimentReport report(spec.name);
  report.seed = spec.seed;

  // Final position.
  const TraceSample& last = trace.back();
  const std::size_t expected_final = sched.windows.back().expected;
  report.set_metric("final_t_ms", last.t_ms);
  report.set_metric("final_index", last.decoded ? static_cast<long long>(*last.decoded) : -1LL);
  if (topo.is_ring()) {
    report.set_metric("final_angle_deg",
                      last.decoded ? kDegreesPerNode * topo.coord(*last.decoded).i.value() : kNaN);
  } else {
    long long i = -1;
    long long j = -1;
    if (last.decoded) {
      const TorusCoord c = topo.coord(*last.decoded);
      i = c.i.value();
      j = c.j.value();
    }
    report.set_metric("final_i", i);
    report.set_metric("final_j", j);
    report.set_metric("final_angle1_deg", i >= 0 ? kDegreesPerNode * static_cast<double>(i) : kNaN);
    report.set_metric("final_angle2_deg", j >= 0 ? kDegreesPerNode * static_cast<double>(j) : kNaN);
  }
  report.set_metric("expected_final_index", static_cast<long long>(expected_final));
  const bool final_ok = last.decoded && *last.decoded == expected_final;

  // Trajectory accuracy against the intended schedule.
  double acc = kNaN;
  try {
    acc = accuracy(trace, sched);
  } catch (const WindowError&) {
  }
  report.set_metric("accuracy", acc);

  // Decoded sequence against the schedule's sequence of positions.
  std::vector<std::size_t> expected_seq;
  for (const auto& w : sched.windows) {
    if (expected_seq.empty() || expected_seq.back() != w.expected) expected_seq.push_back(w.expected);
  }
  const auto seq = decoded_sequence(trace);
  report.set_metric("decoded_sequence", format_sequence(topo, seq));
  report.set_metric("expected_sequence", format_sequence(topo, expected_seq));

  // Drift after motion.
  const double drift_start = an.drift_window_start_ms.value_or(motion_end);
  report.set_metric("drift_window_start_ms", drift_start);
  long long drift_nodes = -1;
  try {
    drift_nodes = drift(trace, drift_start);
  } catch (const std::runtime_error&) {
  }
  report.set_metric("drift_nodes", drift_nodes);

  // Convergence before the first motion.
  double conv = kNaN;
  try {
    conv = convergence_time(trace, an.convergence_rel_tol, first_motion, an.convergence_window_ms);
  } catch (const NoConvergenceError&) {
  }
  report.set_metric("convergence_ms", conv);

  // Amplitude stability.
  const double amp_start = an.amplitude_window_start_ms.value_or(moving ? first_motion : hold_end);
  const double amp_end = an.amplitude_window_end_ms.value_or(moving ? motion_end : spec.duration_ms);
  AmplitudeStats amp{kNaN, kNaN};
  try {
    amp = amplitude_stats(trace, amp_start, amp_end);
  } catch (const WindowError&) {
  }
  report.set_metric("amplitude_window_start_ms", amp_start);
  report.set_metric("amplitude_window_end_ms", amp_end);
  report.set_metric("amplitude_mean", amp.mean);
  report.set_metric("amplitude_cv", amp.cv);

  // Persistence after release of the hold input.
  const auto at_release = trace.window(hold_end, spec.duration_ms);
  const double release_amp = at_release.empty() ? 0.0 : at_release.front().amplitude;
  const double ratio = release_amp > 0.0 ? last.amplitude / release_amp : 0.0;
  const bool persistent =
      last.decoded.has_value() && release_amp > 0.0 && ratio >= an.min_persistence_ratio && drift_nodes == 0;
  report.set_metric("release_amplitude", release_amp);
  report.set_metric("final_amplitude", last.amplitude);
  report.set_metric("persistence_ratio", ratio);
  report.set_metric("persistent", persistent);

  if (has_check(an, check::kAccuracy)) report.set_verdict(check::kAccuracy, acc >= an.min_accuracy);
  if (has_check(an, check::kFinalPosition)) report.set_verdict(check::kFinalPosition, final_ok);
  if (has_check(an, check::kSequence)) report.set_verdict(check::kSequence, seq == expected_seq);
  if (has_check(an, check::kDrift)) report.set_verdict(check::kDrift, drift_nodes == 0);
  if (has_check(an, check::kConvergence)) {
    report.set_verdict(check::kConvergence, conv <= an.max_convergence_ms);
  }
  if (has_check(an, check::kAmplitudeCv)) {
    report.set_verdict(check::kAmplitudeCv, amp.cv < an.max_amplitude_cv);
  }
  if (has_check(an, check::kPersistence)) report.set_verdict(check::kPersistence, persistent);

  report.set_threshold("min_accuracy", an.min_accuracy);
  report.set_threshold("transition_tolerance_ms", sched.transition_tolerance_ms);
  report.set_threshold("max_drift_nodes", 0.0);
  report.set_threshold("max_convergence_ms", an.max_convergence_ms);
  report.set_threshold("convergence_rel_tol", an.convergence_rel_tol);
  report.set_threshold("convergence_window_ms", an.convergence_window_ms);
  report.set_threshold("max_amplitude_cv", an.max_amplitude_cv);
  report.set_threshold("min_persistence_ratio", an.min_persistence_ratio);
  return report;
}

auto run_spec(const ExperimentSpec& spec) -> RunResult {
  spec.validate();
  auto weights = std::make_shared<const WeightMatrix>(build_kernel(spec.topology, spec.kernel, spec.kernel_scale));
  const InputSchedule input = schedule_input(spec.topology, spec.velocity, spec.mode, spec.gains, spec.init);
  Trace trace = run(NetworkState::quiescent(weights), input, spec.dynamics, spec.duration_ms,
                    spec.sample_every_ms, spec.seed);
  ExperimentReport report = analyze(spec, trace);
  return RunResult{spec, std::move(trace), std::move(report)};
}

namespace builtin {

auto rotation_180(std::uint64_t seed) -> ExperimentSpec {
  ExperimentSpec s;
  s.name = "rotation-180";
  s.topology = Topology::ring();
  s.kernel = KernelParams::calibrated();
  s.dynamics = DynamicsParams{10.0, 0.1, 1.0, 0.0};
  s.init = BumpInit{0, 1.0, 1.0, 100.0};
  s.velocity.segments = {VelocitySegment{200.0, 800.0, 1.0, 1}};
  s.mode = NavigationMode::Shift1D;
  s.gains = NavigationGains{0.8, 0.8, ShiftMode::StepClock};
  s.duration_ms = 1000.0;
  s.sample_every_ms = 1.0;
  s.transition_tolerance_ms = 20.0;
  s.seed = seed;
  s.output_dir = "out/rotation-180";
  return s;
}

auto torus_independence(std::uint64_t seed) -> ExperimentSpec {
  ExperimentSpec s;
  s.name = "torus-independence";
  s.topology = Topology::torus();
  s.kernel = KernelParams::calibrated();
  s.kernel_scale = 0.2;
  s.dynamics = DynamicsParams{10.0, 0.1, std::nullopt, 0.0};
  s.init = BumpInit{0, 1.0, 1.0, 100.0};
  s.velocity.segments = {VelocitySegment{200.0, 800.0, 1.0, 1}, VelocitySegment{1000.0, 1300.0, 1.0, 2}};
  s.mode = NavigationMode::Phase2D;
  s.gains = NavigationGains{0.8, 0.8, ShiftMode::StepClock};
  s.duration_ms = 1500.0;
  s.sample_every_ms = 1.0;
  s.transition_tolerance_ms = 20.0;
  s.analysis.checks = {check::kFinalPosition, check::kSequence, check::kDrift};
  s.seed = seed;
  s.output_dir = "out/torus-independence";
  return s;
}

auto compositional_pin(TorusCoord pin, std::uint64_t seed) -> ExperimentSpec {
  ExperimentSpec s = torus_independence(seed);
  s.name = "compositional";
  s.init.center = Topology::torus().flat(pin);
  s.velocity.segments.clear();
  s.duration_ms = 600.0;
  s.analysis.checks = {check::kFinalPosition, check::kSequence, check::kDrift};
  s.output_dir = "out/compositional";
  return s;
}

auto stability(const KernelParams& kernel, std::optional<double> rate_cap, double kernel_scale,
               std::uint64_t seed) -> ExperimentSpec {
  ExperimentSpec s = rotation_180(seed);
  s.name = "stability";
  s.kernel = kernel;
  s.kernel_scale = kernel_scale;
  s.dynamics.rate_cap = rate_cap;
  s.velocity.segments.clear();
  s.duration_ms = 2200.0;
  s.analysis.checks = {check::kAccuracy, check::kFinalPosition, check::kDrift,
                       check::kConvergence, check::kAmplitudeCv, check::kPersistence};
  s.output_dir = "out/stability";
  return s;
}

}  // namespace builtin

auto experiment_rotation_180(std::uint64_t seed) -> ExperimentOutcome {
  RunResult r = run_spec(builtin::rotation_180(seed));
  ExperimentReport report = r.report;
  report.set_metric("kernel_source", std::string("calibrated"));
  return ExperimentOutcome{std::move(report), {"rotation-180"}, {std::move(r)}};
}

auto experiment_torus_independence(std::uint64_t seed) -> ExperimentOutcome {
  const ExperimentSpec spec = builtin::torus_independence(seed);
  RunResult r = run_spec(spec);
  ExperimentReport report = r.report;
  const Topology topo = spec.topology;

  // Each axis segment must leave the other axis' decoded coordinate untouched.
  bool axis1_keeps_j = true;
  bool axis2_keeps_i = true;
  int checked_segments = 0;
  for (const auto& seg : spec.velocity.segments) {
    const auto decoded = decoded_between(r.trace, seg.t_start_ms, seg.t_end_ms);
    if (decoded.empty()) continue;
    ++checked_segments;
    bool constant = std::all_of(decoded.begin(), decoded.end(), [](const auto& d) { return d.has_value(); });
    if (constant) {
      const TorusCoord ref = topo.coord(*decoded.front());
      for (const auto& d : decoded) {
        const TorusCoord c = topo.coord(*d);
        constant = constant && (seg.axis == 1 ? c.j == ref.j : c.i == ref.i);
      }
    }
    (seg.axis == 1 ? axis1_keeps_j : axis2_keeps_i) &= constant;
  }
  const PhaseState end_phase = phase_at(spec.velocity, PhaseState::at(topo.coord(spec.init.center)), spec.duration_ms);
  const TorusCoord target{end_phase.nearest_node(1), end_phase.nearest_node(2)};
  const auto& last = r.trace.back();
  const bool final_matches = last.decoded && topo.coord(*last.decoded) == target;

  report.set_metric("phase_target_i", static_cast<long long>(target.i.value()));
  report.set_metric("phase_target_j", static_cast<long long>(target.j.value()));
  report.set_metric("theta1_final_rad", end_phase.theta1);
  report.set_metric("theta2_final_rad", end_phase.theta2);
  report.set_verdict("axis1_motion_keeps_j", axis1_keeps_j && checked_segments > 0);
  report.set_verdict("axis2_motion_keeps_i", axis2_keeps_i && checked_segments > 0);
  report.set_verdict("final_matches_phase", final_matches);
  return ExperimentOutcome{std::move(report), {"torus-independence"}, {std::move(r)}};
}

auto experiment_compositional_points(TorusCoord pin_a, TorusCoord pin_b, std::uint64_t seed)
    -> ExperimentOutcome {
  const Topology topo = Topology::torus();
  RunResult a = run_spec(builtin::compositional_pin(pin_a, seed));
  RunResult b = run_spec(builtin::compositional_pin(pin_b, seed));

  ExperimentReport report("compositional");
  report.seed = seed;
  const auto point = [&](const RunResult& r) -> std::optional<TorusCoord> {
    const auto& d = r.trace.back().decoded;
    return d ? std::optional(topo.coord(*d)) : std::nullopt;
  };
  const auto pa = point(a);
  const auto pb = point(b);
  const auto text = [&](const std::optional<TorusCoord>& c) {
    return c ? format_position(topo, topo.flat(*c)) : std::string("none");
  };
  report.set_metric("pin_a", format_position(topo, topo.flat(pin_a)));
  report.set_metric("pin_b", format_position(topo, topo.flat(pin_b)));
  report.set_metric("point_a", text(pa));
  report.set_metric("point_b", text(pb));
  report.set_metric("drift_a_nodes", static_cast<long long>(a.report.number("drift_nodes")));
  report.set_metric("drift_b_nodes", static_cast<long long>(b.report.number("drift_nodes")));
  report.set_verdict("a_stable", a.report.verdict(check::kDrift));
  report.set_verdict("b_stable", b.report.verdict(check::kDrift));
  report.set_verdict("a_matches_pin", pa && *pa == pin_a);
  report.set_verdict("b_matches_pin", pb && *pb == pin_b);
  report.set_verdict("first_components_equal", pa && pb && pa->i == pb->i);
  report.set_verdict("points_distinct_iff_pins_distinct", pa && pb && ((*pa == *pb) == (pin_a == pin_b)));
  report.set_threshold("max_drift_nodes", 0.0);
  return ExperimentOutcome{std::move(report), {"compositional_a", "compositional_b"}, {std::move(a), std::move(b)}};
}

auto assess_persistence(const ExperimentSpec& spec) -> ExperimentReport {
  try {
    ExperimentReport report = run_spec(spec).report;
    report.set_metric("diverged", false);
    return report;
  } catch (const DivergenceError& e) {
    ExperimentReport report(spec.name);
    report.seed = spec.seed;
    report.set_metric("diverged", true);
    report.set_metric("divergence_t_ms", e.t_ms());
    report.set_metric("persistent", false);
    report.set_verdict(check::kPersistence, false);
    return report;
  }
}

auto experiment_bump_stability(std::uint64_t seed) -> ExperimentOutcome {
  ExperimentReport report("stability");
  report.seed = seed;

  // Published parameters verbatim: no rate cap.
  const ExperimentSpec published_spec = builtin::stability(KernelParams::published(), std::nullopt, 1.0, seed);
  RunResult published_run{published_spec, Trace(published_spec.topology, published_spec.dynamics.dt_ms),
                          ExperimentReport(published_spec.name)};
  try {
    published_run = run_spec(published_spec);
    published_run.report.set_metric("diverged", false);
  } catch (const DivergenceError&) {
    published_run.report = assess_persistence(published_spec);
  }
  const ExperimentReport& published = published_run.report;
  const bool published_persists = published.verdict(check::kPersistence);
  report.set_metric("published_persistent", published_persists);
  report.set_metric("published_diverged", std::get<bool>(*published.metric("diverged")));
  if (const auto r = published.metric("persistence_ratio")) report.set_metric("published_persistence_ratio", *r);

  KernelParams chosen = KernelParams::published();
  std::optional<double> cap = std::nullopt;
  bool found = published_persists;
  if (!published_persists) {
    const CalibrationResult cal = calibrate_ring_kernel();
    report.set_metric("calibration_candidates", static_cast<long long>(cal.candidates.size()));
    long long accepted = 0;
    for (const auto& c : cal.candidates) accepted += c.accepted() ? 1 : 0;
    report.set_metric("calibration_accepted", accepted);
    if (const auto* best = cal.best()) {
      chosen = best->params;
      cap = 1.0;
      found = true;
      report.set_metric("calibration_deviation", best->deviation);
    }
  }
  report.set_metric("kernel_source", std::string(published_persists ? "published" : "calibrated"));
  report.set_metric("j_exc", chosen.j_exc);
  report.set_metric("j_inh", chosen.j_inh);
  report.set_metric("sigma_exc", chosen.sigma_exc);
  report.set_metric("sigma_inh", chosen.sigma_inh);
  report.set_metric("rate_cap", cap ? *cap : kNaN);
  report.set_verdict("persisting_parameters_found", found);
  report.set_verdict("defaults_match_selection",
                     published_persists ? true : chosen == KernelParams::calibrated());

  ExperimentOutcome outcome;
  outcome.labels.push_back("stability_published");
  outcome.runs.push_back(std::move(published_run));

  if (found) {
    RunResult r = run_spec(builtin::stability(chosen, cap, 1.0, seed));
    const double conv = r.report.number("convergence_ms");
    report.set_metric("convergence_ms", conv);
    report.set_metric("drift_window_start_ms", r.report.number("drift_window_start_ms"));
    report.set_metric("drift_nodes", static_cast<long long>(r.report.number("drift_nodes")));
    report.set_metric("post_convergence_span_ms", r.spec.duration_ms - conv);
    report.set_metric("amplitude_mean", r.report.number("amplitude_mean"));
    report.set_metric("amplitude_cv", r.report.number("amplitude_cv"));
    report.set_metric("final_index", static_cast<long long>(r.report.number("final_index")));
    for (const auto& [name, pass] : r.report.verdicts()) report.set_verdict(name, pass);
    report.set_verdict("post_convergence_span", r.spec.duration_ms - conv >= 2000.0);
    for (const auto& [name, value] : r.report.thresholds()) report.set_threshold(name, value);
    report.set_threshold("min_post_convergence_span_ms", 2000.0);
    outcome.labels.push_back("stability_calibrated");
    outcome.runs.push_back(std::move(r));
  }
  outcome.report = std::move(report);
  return outcome;
}

auto run_named_experiment(std::string_view name, std::uint64_t seed) -> ExperimentOutcome {
  if (name == "rotation-180") return experiment_rotation_180(seed);
  if (name == "torus-independence") return experiment_torus_independence(seed);
  if (name == "compositional") return experiment_compositional_points({NodeIndex{0}, NodeIndex{0}}, {NodeIndex{0}, NodeIndex{3}}, seed);
  if (name == "stability") return experiment_bump_stability(seed);
  throw ValidationError("unknown experiment '" + std::string(name) +
                        "' (expected rotation-180, torus-independence, compositional or stability)");
}

auto write_outcome(const ExperimentOutcome& outcome, const std::filesystem::path& dir) -> OutputBundle {
  OutputBundle bundle;
  for (std::size_t k = 0; k < outcome.runs.size(); ++k) {
    const auto& run = outcome.runs[k];
    const std::string& label = outcome.labels.at(k);
    const auto trace_path = dir / (label + ".trace.csv");
    const auto config_path = dir / (label + ".config.json");
    write_text(trace_path, trace_csv(run.trace));
    write_text(config_path, to_config_text(run.spec));
    bundle.traces.push_back(trace_path);
    bundle.configs.push_back(config_path);
  }
  bundle.report = dir / (outcome.report.experiment() + ".report.json");
  write_text(bundle.report, report_json(outcome.report).dump(2) + "\n");
  return bundle;
}

auto run_from_config(const std::filesystem::path& config, std::optional<std::filesystem::path> out_dir,
                     std::optional<std::uint64_t> seed) -> std::pair<OutputBundle, ExperimentOutcome> {
  ExperimentSpec spec = load_config(config);
  if (seed) spec.seed = *seed;
  spec.validate();
  RunResult r = run_spec(spec);
  ExperimentOutcome outcome{r.report, {spec.name}, {std::move(r)}};
  const std::filesystem::path dir = out_dir ? *out_dir : std::filesystem::path(spec.output_dir);
  OutputBundle bundle = write_outcome(outcome, dir);
  return {std::move(bundle), std::move(outcome)};
}

auto sweep_row(const std::string& value, const ExperimentReport& report) -> SweepRow {
  SweepRow row;
  row.value = value;
  row.status = "ok";
  const auto p = report.metric("persistent");
  row.persistent = p && std::holds_alternative<bool>(*p) && std::get<bool>(*p);
  row.final_index = static_cast<long long>(report.number("final_index"));
  row.amplitude_mean = report.number("amplitude_mean");
  row.amplitude_cv = report.number("amplitude_cv");
  return row;
}

auto sweep(const ExperimentSpec& base, const std::string& dotted_key, const std::vector<std::string>& values,
           std::optional<std::filesystem::path> out_dir, unsigned threads) -> std::vector<SweepRow> {
  nlohmann::ordered_json resolved = to_json(base);
  // A derived schedule must follow swept velocities and centers.
  if (!base.schedule_windows) resolved["schedule"].erase("windows");
  {
    nlohmann::ordered_json probe = resolved;
    set_dotted(probe, dotted_key, nullptr);
  }
  std::vector<SweepRow> rows(values.size());
  detail::parallel_for(values.size(), threads, [&](std::size_t k) {
    nlohmann::ordered_json value;
    try {
      value = nlohmann::ordered_json::parse(values[k]);
    } catch (const nlohmann::json::parse_error&) {
      value = values[k];
    }
    const std::string value_text = value.dump();
    nlohmann::ordered_json doc = resolved;
    set_dotted(doc, dotted_key, value);
    SweepRow row;
    row.value = value_text;
    try {
      const ExperimentSpec spec = parse_config(nlohmann::json::parse(doc.dump()));
      spec.validate();
      RunResult r = run_spec(spec);
      row = sweep_row(value_text, r.report);
      if (out_dir) {
        write_outcome(ExperimentOutcome{r.report, {spec.name}, {r}}, *out_dir / std::to_string(k));
      }
    } catch (const DivergenceError&) {
      row.status = "diverged";
    } catch (const ValidationError& e) {
      row.status = std::string("invalid: ") + e.what();
    }
    rows[k] = std::move(row);
  });
  if (out_dir) write_text(*out_dir / "sweep.csv", sweep_csv(rows));
  return rows;
}

auto sweep_csv(const std::vector<SweepRow>& rows) -> std::string {
  const auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::string out = "value,status,persistent,final_index,amplitude_mean,amplitude_cv\n";
  for (const auto& r : rows) {
    out += quote(r.value) + ',' + quote(r.status) + ',' + (r.persistent ? "true" : "false") + ',' +
           std::to_string(r.final_index) + ',' + format_real(r.amplitude_mean) + ',' +
           format_real(r.amplitude_cv) + '\n';
  }
  return out;
}

}  // namespace harmonic
