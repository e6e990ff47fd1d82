#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "harmonic/errors.hpp"
#include "harmonic/experiment.hpp"
#include "oracles.hpp"

using namespace harmonic;
namespace fs = std::filesystem;

namespace {

auto slurp(const fs::path& p) -> std::string {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

auto scratch(const std::string& name) -> fs::path {
  const fs::path p = fs::temp_directory_path() / ("htsim_test_" + name);
  fs::remove_all(p);
  return p;
}

auto final_coord(const RunResult& r) -> TorusCoord { return r.spec.topology.coord(r.trace.back().decoded.value()); }

}  // namespace

TEST_CASE("rotation experiment") {
  const ExperimentOutcome o = experiment_rotation_180();
  const ExperimentReport& r = o.report;
  CHECK(r.passed());
  CHECK(r.number("final_index") == 6);
  CHECK(r.number("final_angle_deg") == 180.0);
  CHECK(r.number("accuracy") == 1.0);
  CHECK(std::get<std::string>(*r.metric("decoded_sequence")) == "0>1>2>3>4>5>6");
  CHECK(r.number("drift_nodes") == 0);
  CHECK(r.number("drift_window_start_ms") == 800.0);
}

TEST_CASE("rotation without motion stays home") {
  ExperimentSpec spec = builtin::rotation_180();
  spec.velocity.segments.clear();
  const RunResult r = run_spec(spec);
  CHECK(r.report.number("final_index") == 0);
  CHECK(r.report.number("accuracy") == 1.0);
}

TEST_CASE("reverse rotation walks the other way round") {
  ExperimentSpec spec = builtin::rotation_180();
  spec.velocity.segments.at(0).v = -1.0;
  const RunResult r = run_spec(spec);
  const auto expect = oracle::stepped_sequence(0, -6);
  std::vector<std::size_t> want(expect.begin(), expect.end());
  CHECK(decoded_sequence(r.trace) == want);
  CHECK(r.report.number("final_index") == 6);
  CHECK(r.report.passed());
}

TEST_CASE("torus independence") {
  const ExperimentOutcome o = experiment_torus_independence();
  CHECK(o.report.passed());
  const TorusCoord end = final_coord(o.runs.at(0));
  CHECK(end.i.value() == static_cast<int>(oracle::nodes_travelled(1.0, 600.0)));
  CHECK(end.j.value() == static_cast<int>(oracle::nodes_travelled(1.0, 300.0)));
}

TEST_CASE("torus without motion holds the center") {
  ExperimentSpec spec = builtin::torus_independence();
  spec.init.center = Topology::torus().flat({NodeIndex{4}, NodeIndex{7}});
  spec.velocity.segments.clear();
  const RunResult r = run_spec(spec);
  for (const auto& s : r.trace.window(100.0, spec.duration_ms)) CHECK(s.decoded == std::optional(spec.init.center));
}

TEST_CASE("diagonal torus motion") {
  ExperimentSpec spec = builtin::torus_independence();
  spec.velocity.segments = {VelocitySegment{200.0, 600.0, 1.0, 1}, VelocitySegment{200.0, 600.0, 1.0, 2}};
  spec.duration_ms = 900.0;
  const RunResult r = run_spec(spec);
  const TorusCoord end = final_coord(r);
  CHECK(end.i == end.j);
  CHECK(end.i.value() == static_cast<int>(oracle::nodes_travelled(1.0, 400.0)));
  CHECK(r.report.verdict("final_position"));
  CHECK(r.report.verdict("sequence"));
}

TEST_CASE("compositional points") {
  const ExperimentOutcome o = experiment_compositional_points();
  CHECK(o.report.passed());
  CHECK(std::get<std::string>(*o.report.metric("point_a")) == "0,0");
  CHECK(std::get<std::string>(*o.report.metric("point_b")) == "0,3");

  const ExperimentOutcome same = experiment_compositional_points({NodeIndex{2}, NodeIndex{2}}, {NodeIndex{2}, NodeIndex{2}});
  CHECK(same.report.passed());
  CHECK(final_coord(same.runs[0]) == final_coord(same.runs[1]));

  const ExperimentOutcome five = experiment_compositional_points({NodeIndex{5}, NodeIndex{2}}, {NodeIndex{5}, NodeIndex{9}});
  CHECK(five.report.passed());
  CHECK(final_coord(five.runs[0]).i.value() == 5);
  CHECK(final_coord(five.runs[1]).i.value() == 5);
}

TEST_CASE("bump stability and calibration") {
  const ExperimentOutcome o = experiment_bump_stability();
  const ExperimentReport& r = o.report;
  CHECK(r.passed());
  CHECK_FALSE(std::get<bool>(*r.metric("published_persistent")));
  CHECK(std::get<std::string>(*r.metric("kernel_source")) == "calibrated");
  CHECK(r.number("sigma_exc") == KernelParams::calibrated().sigma_exc);
  CHECK(r.number("calibration_deviation") == doctest::Approx(parameter_deviation(KernelParams::calibrated(), KernelParams::published())));
  CHECK(r.number("convergence_ms") <= 100.0);
  CHECK(r.number("post_convergence_span_ms") >= 2000.0);
  CHECK(r.number("drift_nodes") == 0);
}

TEST_CASE("zeroed kernel decays and loses persistence") {
  const ExperimentReport r = assess_persistence(builtin::stability(KernelParams::calibrated(), std::nullopt, 0.0));
  CHECK_FALSE(r.verdict("persistence"));
  CHECK(r.number("final_amplitude") < 1e-50);
}

TEST_CASE("removing inhibition without a cap diverges") {
  const ExperimentReport r = assess_persistence(builtin::stability({2.5, 0.0, 0.8, 2.5}, std::nullopt));
  CHECK(std::get<bool>(*r.metric("diverged")));
  CHECK_FALSE(r.verdict("persistence"));
  CHECK_THROWS_AS((void)run_spec(builtin::stability({2.5, 0.0, 0.8, 2.5}, std::nullopt)), DivergenceError);
}

TEST_CASE("calibration grid") {
  const CalibrationGrid g = CalibrationGrid::standard();
  CHECK(g.j_exc.size() == 9);
  CHECK(g.sigma_exc.size() == 13);
  CHECK(g.sigma_exc.front() == 0.8);
  CHECK(g.sigma_exc.back() == 2.0);
  CHECK(parameter_deviation(KernelParams::published(), KernelParams::published()) == 0.0);
  const CalibrationCandidate published = evaluate_candidate(KernelParams::published(), 1.0);
  CHECK_FALSE(published.accepted());
  const CalibrationCandidate chosen = evaluate_candidate(KernelParams::calibrated(), 1.0);
  CHECK(chosen.accepted());
  const CalibrationResult res = calibrate_ring_kernel(CalibrationGrid{{2.5}, {0.8, 1.8}}, 1.0, 2);
  REQUIRE(res.best() != nullptr);
  CHECK(res.best()->params == KernelParams::calibrated());
}

TEST_CASE("named experiments") {
  CHECK_THROWS_AS((void)run_named_experiment("rotation-90"), ValidationError);
}

TEST_CASE("outputs are deterministic and the config echo reproduces the run") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const ExperimentOutcome o = experiment_rotation_180(3);
  const OutputBundle ba = write_outcome(o, a);
  const OutputBundle bb = write_outcome(experiment_rotation_180(3), b);
  CHECK(slurp(ba.report) == slurp(bb.report));
  CHECK(slurp(ba.traces.at(0)) == slurp(bb.traces.at(0)));

  const fs::path c = scratch("det_c");
  const auto [bc, oc] = run_from_config(ba.configs.at(0), c);
  CHECK(slurp(bc.traces.at(0)) == slurp(ba.traces.at(0)));
  CHECK(oc.report.verdicts() == o.report.verdicts());
  for (const fs::path& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("trace csv layout") {
  const RunResult r = run_spec(builtin::rotation_180());
  const std::string csv = trace_csv(r.trace);
  CHECK(csv.rfind("t_ms,decoded_index,decoded_angle_deg,amplitude,r_0,r_1,", 0) == 0);
  CHECK(csv.find(",r_11\n") != std::string::npos);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.find("\n0,-1,nan,0,0,") != std::string::npos);  // quiescent first sample
  CHECK(csv.find("\n1000,6,180,") != std::string::npos);
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(1.0 / 3.0) == "0.333333333");
  CHECK(format_real(1e-20) == "1e-20");

  const RunResult t = run_spec(builtin::compositional_pin({NodeIndex{0}, NodeIndex{3}}));
  const std::string tcsv = trace_csv(t.trace);
  CHECK(tcsv.find(",r_0_0,r_0_1,") != std::string::npos);
  CHECK(tcsv.find(",r_11_11\n") != std::string::npos);
  CHECK(tcsv.find("\n600,3,0,") != std::string::npos);
}

TEST_CASE("report json") {
  const ExperimentOutcome o = experiment_rotation_180();
  const auto j = report_json(o.report);
  CHECK(j.at("schema") == 1);
  CHECK(j.at("trials") == 1);
  CHECK(j.at("experiment") == "rotation-180");
  CHECK(j.at("verdict_accuracy") == true);
  CHECK(j.at("thresholds").at("transition_tolerance_ms") == 20.0);
  CHECK(j.at("passed") == true);
}

TEST_CASE("report verdicts can be re-derived from the trace") {
  const RunResult r = run_spec(builtin::rotation_180());
  const ExperimentReport again = analyze(r.spec, r.trace);
  CHECK(again.verdicts() == r.report.verdicts());
}

TEST_CASE("sweeps") {
  const ExperimentSpec base = builtin::rotation_180();
  SUBCASE("single value equals the plain run") {
    const auto rows = sweep(base, "kernel.j_exc", {"2.5"});
    REQUIRE(rows.size() == 1);
    const SweepRow plain = sweep_row("2.5", run_spec(base).report);
    CHECK(rows[0].status == "ok");
    CHECK(rows[0].persistent == plain.persistent);
    CHECK(rows[0].final_index == plain.final_index);
    CHECK(rows[0].amplitude_mean == plain.amplitude_mean);
    CHECK(rows[0].amplitude_cv == plain.amplitude_cv);
  }
  SUBCASE("rows keep the value order") {
    const auto rows = sweep(base, "kernel.j_exc", {"3.5", "2.5", "3.0"}, std::nullopt, 3);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].value == "3.5");
    CHECK(rows[1].value == "2.5");
    CHECK(rows[2].value == "3.0");
  }
  SUBCASE("velocity sweeps move the derived schedule") {
    const auto rows = sweep(base, "velocity.0.v", {"-1"});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].final_index == 6);
    CHECK(rows[0].persistent);
  }
  SUBCASE("bad values become rows, bad keys are errors") {
    const auto rows = sweep(base, "dynamics.dt_ms", {"5.0"});
    CHECK(rows.at(0).status.rfind("invalid", 0) == 0);
    CHECK_THROWS_AS((void)sweep(base, "kernel.j_exx", {"2.5"}), ConfigError);
    CHECK(sweep(base, "kernel.j_exc", {}).empty());
  }
  SUBCASE("csv") {
    const auto rows = sweep(base, "kernel.j_exc", {"2.5"});
    const std::string csv = sweep_csv(rows);
    CHECK(csv.rfind("value,status,persistent,final_index,amplitude_mean,amplitude_cv\n", 0) == 0);
    CHECK(csv.find("\n2.5,ok,true,6,") != std::string::npos);
  }
}
