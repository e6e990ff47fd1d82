#include "harmonic/output.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace harmonic {

auto format_real(double x) -> std::string {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 9);
  if (ec != std::errc{}) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf.data(), end);
}

auto trace_csv(const Trace& trace) -> std::string {
  const Topology topo = trace.topology();
  std::string out = "t_ms,decoded_index,decoded_angle_deg,amplitude";
  for (std::size_t k = 0; k < topo.size(); ++k) {
    out += ",r_";
    if (topo.is_ring()) {
      out += std::to_string(k);
    } else {
      const TorusCoord c = topo.coord(k);
      out += std::to_string(c.i.value()) + "_" + std::to_string(c.j.value());
    }
  }
  out += '\n';
  for (const auto& s : trace.samples()) {
    out += format_real(s.t_ms);
    if (s.decoded) {
      out += ',' + std::to_string(*s.decoded) + ',' +
             format_real(kDegreesPerNode * topo.coord(*s.decoded).i.value());
    } else {
      out += ",-1,nan";
    }
    out += ',' + format_real(s.amplitude);
    for (const double r : s.rates) out += ',' + format_real(r);
    out += '\n';
  }
  return out;
}

auto report_json(const ExperimentReport& report) -> nlohmann::ordered_json {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["experiment"] = report.experiment();
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["passed"] = report.passed();
  for (const auto& [name, value] : report.metrics()) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) {
            // JSON has no NaN/inf; such metrics become null.
            j[name] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
          } else {
            j[name] = v;
          }
        },
        value);
  }
  for (const auto& [name, pass] : report.verdicts()) j["verdict_" + name] = pass;
  nlohmann::ordered_json th = nlohmann::ordered_json::object();
  for (const auto& [name, value] : report.thresholds()) th[name] = value;
  j["thresholds"] = th;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace harmonic
