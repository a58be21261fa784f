#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qnet/argand.hpp"
#include "qnet/config.hpp"
#include "qnet/csv.hpp"
#include "qnet/error.hpp"
#include "qnet/lpdos.hpp"
#include "qnet/parallel.hpp"
#include "qnet/phase.hpp"
#include "qnet/scan.hpp"
#include "qnet/scattering.hpp"
#include "qnet/units.hpp"

namespace qnet {

inline constexpr const char* version = "0.1.0";

/// Everything a command produces; files are written by write_outputs().
struct RunOutput {
  std::vector<std::pair<std::string, CsvTable>> tables;      // file name -> table
  std::vector<std::pair<std::string, std::string>> texts;  // file name -> contents
  std::string console;
  int status = 0;
};

namespace detail {

inline std::string join(const std::vector<std::string>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

inline CsvTable table_with_header(const RunConfig& cfg, const std::vector<std::string>& channels,
                                  std::vector<std::string> columns) {
  CsvTable t;
  t.add_meta("tool", std::string("qnet ") + version);
  t.add_meta("command", std::string(command_name(cfg.command)));
  t.add_meta("units", units::description);
  t.add_meta("channel-order", join(channels));
  t.add_meta("config", serialize_config(cfg, true));
  t.columns = std::move(columns);
  return t;
}

inline std::vector<std::string> smatrix_columns() { return {"E", "alpha", "gamma", "re_s", "im_s", "abs2_s", "theta"}; }

inline RunOutput run_smatrix(const RunConfig& cfg) {
  const Network net = cfg.network.build();
  const auto sol = solve_scattering(net, cfg.smatrix.energy, cfg.solver());
  const auto& s = sol.smatrix();
  auto t = table_with_header(cfg, s.channel_order, smatrix_columns());
  t.add_meta("unitarity-defect", format_double(unitarity_defect(s)));
  t.add_meta("reciprocity-defect", format_double(reciprocity_defect(s)));
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t g = 0; g < s.size(); ++g) {
      const cplx v = s(a, g);
      const double th = std::abs(v) > cfg.eps_mag ? std::arg(v) : std::numeric_limits<double>::quiet_NaN();
      CsvRow r;
      r << s.energy << s.channel_order[a] << s.channel_order[g] << v.real() << v.imag() << std::norm(v) << th;
      t.rows.push_back(r.take());
    }
  RunOutput out;
  out.tables.emplace_back("smatrix.csv", std::move(t));
  return out;
}

inline RunOutput run_scan_energy(const RunConfig& cfg) {
  const auto& sc = cfg.scan_energy;
  if (!(sc.e_min > 0.0) || !(sc.e_max > sc.e_min) || sc.points < 2)
    throw Error(ErrorCode::InvalidArgument, "scan_energy needs 0 < e_min < e_max and points >= 2");
  const Network net = cfg.network.build();
  const auto es = linspace(sc.e_min, sc.e_max, static_cast<std::size_t>(sc.points));
  const auto mats = scan_energy(net, es, cfg.workers, cfg.solver());
  const auto channels = net.channel_order();
  const std::size_t n = channels.size();
  // theta unwrapped along E for every (alpha, gamma); restarts after |s| <= eps_mag
  std::vector<double> theta(n * n, 0.0);
  std::vector<cplx> last(n * n);
  std::vector<bool> have(n * n, false);
  auto t = table_with_header(cfg, channels, smatrix_columns());
  for (const auto& s : mats)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t g = 0; g < n; ++g) {
        const std::size_t idx = a * n + g;
        const cplx v = s(a, g);
        double th = std::numeric_limits<double>::quiet_NaN();
        if (std::abs(v) > cfg.eps_mag) {
          theta[idx] = have[idx] ? theta[idx] + phase_step(last[idx], v) : std::arg(v);
          th = theta[idx];
          last[idx] = v;
          have[idx] = true;
        } else {
          have[idx] = false;
        }
        CsvRow r;
        r << s.energy << channels[a] << channels[g] << v.real() << v.imag() << std::norm(v) << th;
        t.rows.push_back(r.take());
      }
  RunOutput out;
  out.tables.emplace_back("scan_energy.csv", std::move(t));
  return out;
}

inline SweepSettings sweep_settings(const RunConfig& cfg) {
  const auto& a = cfg.argand_sweep;
  SweepSettings s;
  s.initial_points = a.initial_points;
  s.delta_step = a.delta_step;
  s.max_depth = a.max_depth;
  s.workers = cfg.workers;
  s.eps_mag = cfg.eps_mag;
  s.solver = cfg.solver();
  return s;
}

inline std::string loop_report(const ArgandTrajectory& tr, const std::vector<SubLoop>& loops) {
  std::ostringstream os;
  os << "samples: " << tr.samples.size() << "\n";
  os << "loops: " << loops.size() << "\n";
  for (std::size_t i = 0; i < loops.size(); ++i) {
    const auto& l = loops[i];
    const auto& a = tr.samples[l.start_index];
    const auto& b = tr.samples[l.end_index];
    os << "[loop " << i << "]\n";
    os << "start_index: " << l.start_index << "\n";
    os << "end_index: " << l.end_index << "\n";
    os << "start_param: " << format_double(a.param) << "\n";
    os << "end_param: " << format_double(b.param) << "\n";
    os << "closure_point: " << format_double(a.s.real()) << " " << format_double(a.s.imag()) << "\n";
    os << "closure_gap: " << format_double(l.closure_gap) << "\n";
    os << "diameter: " << format_double(l.diameter) << "\n";
    os << "relative_gap: " << format_double(l.closure_gap / l.diameter) << "\n";
    if (l.zero_on_loop) {
      os << "winding: undefined (ZERO_ON_LOOP)\n";
    } else {
      os << "winding: " << l.winding << "\n";
      os << "phase_integral: " << format_double(l.phase_integral) << "\n";
    }
    os << "magnitude_integral: " << format_double(l.magnitude_integral) << "\n";
    os << "magnitude_bound: " << format_double(2.0 * loop_max_abs(l, tr) * l.closure_gap) << "\n";
  }
  return os.str();
}

inline RunOutput run_argand(const RunConfig& cfg) {
  const auto& a = cfg.argand_sweep;
  auto family = [&](double u1) { return cfg.network.build(u1); };
  const auto tr = sweep_parameter(family, {a.alpha, a.gamma}, a.from, a.to, a.parameter, a.fixed, sweep_settings(cfg));
  const auto loops = detect_subloops(tr, {a.closure_rel, a.min_samples, cfg.eps_mag});
  auto t = table_with_header(cfg, cfg.network.build(a.parameter == SweepKind::U1 ? a.from : a.fixed).channel_order(),
                             {"param", "re_s", "im_s", "theta_unwrapped", "abs2_s", "loop_id"});
  t.add_meta("parameter", a.parameter == SweepKind::U1 ? "U1" : "k");
  t.add_meta("channel", a.alpha + "<-" + a.gamma);
  t.add_meta("loops", std::to_string(loops.size()));
  for (std::size_t n = 0; n < tr.samples.size(); ++n) {
    const auto& s = tr.samples[n];
    CsvRow r;
    r << s.param << s.s.real() << s.s.imag() << s.theta << s.mag2 << loop_id_of(loops, n);
    t.rows.push_back(r.take());
  }
  RunOutput out;
  out.console = loop_report(tr, loops);
  out.tables.emplace_back("argand.csv", std::move(t));
  out.texts.emplace_back("argand_loops.txt", out.console);
  return out;
}

inline RunOutput run_lpdos_map(const RunConfig& cfg) {
  const auto& m = cfg.lpdos_map;
  if (!(m.e_min > 0.0) || m.energy_points < 1 || m.positions < 1 || (m.energy_points > 1 && !(m.e_max > m.e_min)))
    throw Error(ErrorCode::InvalidArgument, "lpdos_map needs 0 < e_min < e_max, energy_points >= 1, positions >= 1");
  const Network net = cfg.network.build();
  const auto probe = probe_settings(cfg, m.probe);
  std::vector<std::string> edges = m.edges;
  if (edges.empty())
    for (const auto& e : net.edges()) edges.push_back(e.id);
  struct Point {
    double energy;
    Position pos;
  };
  std::vector<Point> pts;
  for (double e : linspace(m.e_min, m.e_max, static_cast<std::size_t>(m.energy_points)))
    for (const auto& id : edges) {
      const double len = net.edge(id).length;
      for (int j = 1; j <= m.positions; ++j) pts.push_back({e, {id, len * j / (m.positions + 1)}});
    }
  struct Result {
    std::vector<LpdosSample> terms;
    double nu = 0.0;
    double residual = 0.0;
    bool ok = true;
  };
  const auto results = parallel_map(pts.size(), cfg.workers, [&](std::size_t i) {
    Result r;
    r.nu = injectivity(net, pts[i].energy, pts[i].pos, m.gamma, probe.solver).value;
    try {
      const auto sr = sum_rule(net, pts[i].energy, pts[i].pos, m.gamma, probe);
      r.terms = sr.terms;
      r.residual = sr.residual;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MagnitudeTooSmall && e.code() != ErrorCode::Nonconverged) throw;
      r.ok = false;
    }
    return r;
  });
  const auto channels = net.channel_order();
  auto t = table_with_header(cfg, channels,
                             {"E", "edge", "r", "alpha", "gamma", "rho_lpd", "richardson_error", "nu",
                              "sum_rule_residual"});
  std::size_t skipped = 0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& res = results[i];
    if (!res.ok) ++skipped;
    for (std::size_t a = 0; a < channels.size(); ++a) {
      CsvRow r;
      r << pts[i].energy << pts[i].pos.edge << pts[i].pos.x << channels[a] << m.gamma;
      if (res.ok)
        r << res.terms[a].value << res.terms[a].richardson_error << res.nu << res.residual;
      else
        r << nan << nan << res.nu << nan;
      t.rows.push_back(r.take());
    }
  }
  t.add_meta("points", std::to_string(pts.size()));
  t.add_meta("undefined-points", std::to_string(skipped));
  RunOutput out;
  out.tables.emplace_back("lpdos_map.csv", std::move(t));
  return out;
}

inline Eq10Settings eq10_settings(const RunConfig& cfg) {
  const auto& q = cfg.eq10_scan;
  Eq10Settings s;
  s.points = q.points;
  s.refine_levels = q.refine_levels;
  s.flag_mag2 = q.flag_mag2;
  s.workers = cfg.workers;
  s.eps_mag = cfg.eps_mag;
  s.solver = cfg.solver();
  return s;
}

inline RunOutput run_eq10(const RunConfig& cfg) {
  const auto& q = cfg.eq10_scan;
  auto family = [&](double u1) { return cfg.network.build(u1); };
  const auto scan = eq10_scan(family, q.k_min, q.k_max, q.u1, q.delta_u1, {q.alpha, q.gamma}, eq10_settings(cfg));
  MinimaSettings ms;
  ms.points = q.minima_points;
  ms.workers = cfg.workers;
  ms.solver = cfg.solver();
  const auto minima = transmission_minima(family(q.u1), q.alpha, q.gamma, q.k_min, q.k_max, ms);

  auto t = table_with_header(cfg, family(q.u1).channel_order(), {"k", "lhs", "rhs", "flag"});
  const auto& s = scan.summary;
  t.add_meta("channel", q.alpha + "<-" + q.gamma);
  t.add_meta("flags", "0 ok, 1 near transmission zero, 2 phase undefined");
  t.add_meta("records", std::to_string(s.records));
  t.add_meta("flagged", std::to_string(s.flagged));
  t.add_meta("sign-changes-lhs", std::to_string(s.sign_changes_lhs));
  t.add_meta("sign-changes-rhs", std::to_string(s.sign_changes_rhs));
  t.add_meta("rms-difference", format_double(s.rms_difference));
  t.add_meta("pearson-full", format_double(s.pearson_full));
  t.add_meta("pearson-lower-half", format_double(s.pearson_lower));
  t.add_meta("pearson-upper-half", format_double(s.pearson_upper));
  t.add_meta("rel-discrepancy-lower-half", format_double(s.rel_discrepancy_lower));
  t.add_meta("rel-discrepancy-upper-half", format_double(s.rel_discrepancy_upper));
  std::vector<std::string> mins;
  for (const auto& mn : minima) mins.push_back(format_double(mn.k) + ":" + format_double(mn.mag2));
  t.add_meta("transmission-minima", join(mins, " "));
  for (const auto& rec : scan.records) {
    CsvRow r;
    r << rec.k << rec.lhs << rec.rhs << rec.flag;
    t.rows.push_back(r.take());
  }
  RunOutput out;
  std::ostringstream os;
  for (const auto& [k, v] : t.meta)
    if (k != "config") os << k << ": " << v << "\n";
  out.console = os.str();
  out.tables.emplace_back("eq10.csv", std::move(t));
  return out;
}

}  // namespace detail

inline RunOutput run_verify(const RunConfig& cfg);

/// Runs the configured command without touching the file system.
inline RunOutput execute(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Smatrix: return detail::run_smatrix(cfg);
    case Command::ScanEnergy: return detail::run_scan_energy(cfg);
    case Command::ArgandSweep: return detail::run_argand(cfg);
    case Command::LpdosMap: return detail::run_lpdos_map(cfg);
    case Command::Eq10Scan: return detail::run_eq10(cfg);
    case Command::Verify: return run_verify(cfg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown command");
}

inline void write_outputs(const RunOutput& out, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
  for (const auto& [name, table] : out.tables) write_csv_file((std::filesystem::path(dir) / name).string(), table);
  for (const auto& [name, text] : out.texts) {
    std::ofstream os(std::filesystem::path(dir) / name, std::ios::binary);
    os << text;
    if (!os) throw Error(ErrorCode::IoError, "cannot write '" + name + "'");
  }
}

}  // namespace qnet

#include "qnet/verify.hpp"
