#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qnet/argand.hpp"
#include "qnet/config.hpp"
#include "qnet/csv.hpp"
#include "qnet/lpdos.hpp"
#include "qnet/network.hpp"
#include "qnet/random_network.hpp"
#include "qnet/run.hpp"
#include "qnet/scan.hpp"
#include "qnet/scattering.hpp"

namespace qnet {

struct CheckResult {
  std::string module;
  std::string name;
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Closed forms shared by verify, tests and the acceptance binary

namespace oracle {

/// Two leads joined at one vertex carrying a delta of strength u.
inline Network delta_barrier(double u) { return Network({{"v", u}}, {}, {{"1", "v"}, {"2", "v"}}); }

/// Transmission through a delta barrier, 1 / (1 + i u / 2k).
inline cplx delta_transmission(double k, double u) { return 1.0 / cplx(1.0, u / (2.0 * k)); }

inline Network free_wire(double length) {
  return Network({{"a", 0.0}, {"b", 0.0}}, {{"w", "a", "b", length, 0.0}}, {{"1", "a"}, {"2", "b"}});
}

inline Network junction(int leads) {
  std::vector<Lead> ls;
  for (int i = 0; i < leads; ++i) ls.push_back({std::to_string(i + 1), "j"});
  return Network({{"j", 0.0}}, {}, std::move(ls));
}

/// Wire a -d1- b(delta l1) -d- c(delta l2) -d3- f with leads at a and f.
inline Network double_delta(double d1, double d, double d3, double l1, double l2) {
  return Network({{"a", 0.0}, {"b", l1}, {"c", l2}, {"f", 0.0}},
                 {{"e1", "a", "b", d1, 0.0}, {"e2", "b", "c", d, 0.0}, {"e3", "c", "f", d3, 0.0}},
                 {{"1", "a"}, {"2", "f"}});
}

/// (s11, s21) of double_delta by plane-wave transfer matrices, with the lead
/// phase convention of solve_scattering (reference points at a and f).
inline std::pair<cplx, cplx> double_delta_smatrix(double k, double d1, double d, double d3, double l1, double l2) {
  using M = std::array<std::array<cplx, 2>, 2>;
  const cplx i(0, 1);
  auto delta_at = [&](double x0, double lam) {
    const cplx g = i * lam / (2.0 * k);
    return M{{{1.0 - g, -g * std::exp(-2.0 * i * k * x0)}, {g * std::exp(2.0 * i * k * x0), 1.0 + g}}};
  };
  auto mul = [](const M& a, const M& b) {
    M c{};
    for (int r = 0; r < 2; ++r)
      for (int col = 0; col < 2; ++col) c[r][col] = a[r][0] * b[0][col] + a[r][1] * b[1][col];
    return c;
  };
  const M m = mul(delta_at(d1 + d, l2), delta_at(d1, l1));
  const cplx r = -m[1][0] / m[1][1];
  const cplx t = m[0][0] + m[0][1] * r;
  return {r, t * std::exp(i * k * (d1 + d + d3))};
}

/// Point value Re(psi_alpha psi_gamma s*_{alpha gamma}) / (4 pi k) of the local partial density of states.
inline double lpdos_point(const ScatteringSolution& sol, std::string_view alpha, std::string_view gamma,
                          const Position& pos) {
  const auto& sm = sol.smatrix();
  const auto a = sm.channel(alpha), g = sm.channel(gamma);
  const auto e = sol.edge_index(pos.edge);
  const cplx v = sol.psi(a, e, pos.x) * sol.psi(g, e, pos.x) * std::conj(sm(a, g));
  return v.real() / (4.0 * std::numbers::pi * std::sqrt(sm.energy));
}

/// Largest mismatch of psi between edge ends meeting at a vertex, over all incident leads.
inline double continuity_defect(const Network& net, const ScatteringSolution& sol) {
  double worst = 0.0;
  for (std::size_t g = 0; g < net.leads().size(); ++g)
    for (const auto& v : net.vertices()) {
      std::vector<cplx> vals;
      for (std::size_t e = 0; e < net.edges().size(); ++e) {
        const auto& ed = net.edges()[e];
        if (ed.from == v.id) vals.push_back(sol.psi(g, e, 0.0));
        if (ed.to == v.id) vals.push_back(sol.psi(g, e, ed.length));
      }
      for (std::size_t l = 0; l < net.leads().size(); ++l)
        if (net.leads()[l].vertex == v.id) vals.push_back((l == g ? 1.0 : 0.0) + sol.smatrix()(l, g));
      for (std::size_t i = 1; i < vals.size(); ++i) worst = std::max(worst, std::abs(vals[i] - vals[0]));
    }
  return worst;
}

}  // namespace oracle

/// Random configuration covering every field, for round-trip property tests.
inline RunConfig random_config(std::mt19937_64& rng) {
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto uni_int = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  RunConfig c;
  c.command = all_commands[uni_int(0, 5)];
  if (uni(0, 1) < 0.5) {
    auto& p = c.network.preset;
    p.l2 = uni(0.1, 3);
    p.l3 = uni(0.1, 3);
    p.l5 = uni(0.1, 3);
    p.l6 = uni(0.1, 1);
    p.v2 = uni(-5, 5);
    p.v3 = uni(-5, 5);
    p.v5 = uni(-5, 5);
    p.u1 = uni(-1000, 1000);
    p.barrier = uni(0, 1) < 0.5 ? BarrierModel::Edge : BarrierModel::Delta;
  } else {
    const Network net = random_network(rng);
    c.network.use_preset = false;
    c.network.vertices = net.vertices();
    c.network.edges = net.edges();
    c.network.leads = net.leads();
    c.network.u1_edge = net.edges().front().id;
  }
  c.output = "out" + std::to_string(uni_int(0, 99));
  c.workers = uni_int(1, 8);
  c.seed = rng();
  c.eps_mag = uni(1e-14, 1e-10);
  c.threshold_eps = uni(1e-12, 1e-8);
  c.min_rcond = uni(1e-15, 1e-12);
  c.smatrix.energy = uni(0.1, 50);
  c.scan_energy = {uni(0.1, 1), uni(2, 30), uni_int(2, 1000)};
  c.argand_sweep = {std::to_string(uni_int(1, 3)), std::to_string(uni_int(1, 3)),
                    uni(0, 1) < 0.5 ? SweepKind::U1 : SweepKind::K, uni(-100, 0), uni(-2000, -100), uni(0.5, 20),
                    uni_int(2, 4096), uni(1e-4, 0.1), uni_int(1, 40), uni(1e-4, 0.1), uni_int(2, 64)};
  c.lpdos_map.gamma = std::to_string(uni_int(1, 3));
  c.lpdos_map.e_min = uni(0.1, 2);
  c.lpdos_map.e_max = uni(3, 20);
  c.lpdos_map.energy_points = uni_int(1, 20);
  for (int i = uni_int(0, 3); i > 0; --i) c.lpdos_map.edges.push_back("e" + std::to_string(uni_int(0, 9)));
  c.lpdos_map.positions = uni_int(1, 50);
  c.lpdos_map.probe = {std::nullopt, uni(1e-4, 0.1), std::nullopt, uni(1e-6, 1e-3), uni(0.01, 0.5)};
  if (uni(0, 1) < 0.5) c.lpdos_map.probe.width = uni(1e-4, 0.01);
  if (uni(0, 1) < 0.5) c.lpdos_map.probe.delta_u = uni(-10, 10);
  c.eq10_scan = {std::to_string(uni_int(1, 3)), std::to_string(uni_int(1, 3)), uni(0.1, 1), uni(2, 10),
                 uni(-500, 500), uni(-1, 1), uni_int(2, 5000), uni_int(0, 12), uni(1e-14, 1e-6), uni_int(3, 9000)};
  c.verify = {uni_int(1, 500), uni_int(1, 500)};
  return c;
}

namespace detail {

using Check = std::function<std::pair<bool, std::string>()>;

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

// Sum-rule survey on a grid of (E, r); points near transmission zeros or
// wavefunction nodes are excluded.
struct SumRuleSurvey {
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double min_injectivity = std::numeric_limits<double>::infinity();
  std::vector<double> residuals;
};

inline SumRuleSurvey sum_rule_survey(const Network& net, const std::string& gamma, int target_points,
                                     const ProbeSettings& probe, int workers) {
  const auto n_edges = static_cast<int>(net.edges().size());
  const int per_edge = 3;
  const int n_e = std::max(1, (target_points + per_edge * n_edges - 1) / (per_edge * n_edges));
  struct Pt {
    double energy;
    Position pos;
  };
  std::vector<Pt> pts;
  for (double k : linspace(0.7, 2.9, static_cast<std::size_t>(n_e)))
    for (const auto& e : net.edges())
      for (double f : {0.23, 0.5, 0.77}) pts.push_back({k * k, {e.id, f * e.length}});
  struct R {
    bool used = false;
    double residual = 0.0;
    double nu = 0.0;
  };
  const auto g = net.lead_index(gamma);
  const auto res = parallel_map(pts.size(), workers, [&](std::size_t i) {
    R r;
    const auto sol = solve_scattering(net, pts[i].energy, probe.solver);
    for (std::size_t a = 0; a < net.leads().size(); ++a)
      if (std::norm(sol.smatrix()(a, g)) < 1e-6) return r;
    const cplx psi = wavefunction_at(sol, gamma, pts[i].pos.edge, pts[i].pos.x);
    if (std::norm(psi) < 1e-6) return r;
    try {
      const auto sr = sum_rule(net, pts[i].energy, pts[i].pos, gamma, probe);
      r = {true, sr.residual, sr.injectivity};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MagnitudeTooSmall && e.code() != ErrorCode::Nonconverged) throw;
    }
    return r;
  });
  SumRuleSurvey s;
  for (const auto& r : res) {
    if (!r.used) {
      ++s.excluded;
      continue;
    }
    ++s.evaluated;
    s.residuals.push_back(r.residual);
    s.max_residual = std::max(s.max_residual, r.residual);
    s.mean_residual += r.residual;
    s.min_injectivity = std::min(s.min_injectivity, r.nu);
  }
  if (s.evaluated) s.mean_residual /= static_cast<double>(s.evaluated);
  return s;
}

struct NegativeLpdos {
  bool found = false;
  LpdosSample sample;
  double fano_k = 0.0;
};

/// Most negative certified LPDOS sample (value < 0 and Richardson error below
/// |value|/10) on a grid around the deepest transmission minimum of s_{alpha gamma}.
inline NegativeLpdos find_negative_lpdos(const Network& net, const std::string& alpha, const std::string& gamma,
                                         double k_min, double k_max, const SolverOptions& solver, int workers) {
  MinimaSettings ms;
  ms.points = 2000;
  ms.workers = workers;
  ms.solver = solver;
  const auto mins = transmission_minima(net, alpha, gamma, k_min, k_max, ms);
  NegativeLpdos out;
  if (mins.empty()) return out;
  const auto deepest = *std::min_element(mins.begin(), mins.end(), [](auto& a, auto& b) { return a.mag2 < b.mag2; });
  out.fano_k = deepest.k;
  ProbeSettings probe;
  probe.solver = solver;
  for (double off : {0.002, -0.002, 0.005, -0.005, 0.01, -0.01, 0.02, -0.02}) {
    const double e = std::pow(deepest.k * (1.0 + off), 2);
    for (const auto& edge : net.edges())
      for (int j = 1; j <= 5; ++j) {
        const Position pos{edge.id, edge.length * j / 6.0};
        try {
          const auto samples = lpdos_all_channels(net, e, pos, gamma, probe);
          for (const auto& smp : samples)
            if (smp.out_channel == alpha && smp.value < 0.0 &&
                smp.richardson_error < std::abs(smp.value) / 10.0 && (!out.found || smp.value < out.sample.value)) {
              out.found = true;
              out.sample = smp;
            }
        } catch (const Error& err) {
          if (err.code() != ErrorCode::MagnitudeTooSmall && err.code() != ErrorCode::Nonconverged) throw;
        }
      }
  }
  return out;
}

inline std::vector<CheckResult> verify_checks(const RunConfig& cfg) {
  std::vector<CheckResult> out;
  auto run = [&](const char* module, const char* name, const Check& f) {
    CheckResult r{module, name, false, ""};
    try {
      std::tie(r.pass, r.detail) = f();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(r));
  };
  const auto solver = cfg.solver();
  const Network net = cfg.network.build();
  auto family = [&](double u1) { return cfg.network.build(u1); };

  // network-model
  run("network-model", "preset passes validation", [&] {
    std::size_t bad = 0;
    for (auto barrier : {BarrierModel::Edge, BarrierModel::Delta})
      for (double u1 : {-1000.0, -10.0, 0.0, 100.0}) {
        ThreeProngParams p = cfg.network.preset;
        p.barrier = barrier;
        p.u1 = u1;
        bad += validate_network(three_prong_preset(p)).size();
      }
    bad += validate_network(net).size();
    return std::pair{bad == 0, std::to_string(bad) + " diagnostics"};
  });
  run("network-model", "zero-strength probe leaves S unchanged (1e-12)", [&] {
    double worst = 0.0;
    for (double e : {1.0, 4.0, 7.3}) {
      const auto s0 = solve_scattering(net, e, solver).smatrix();
      for (const auto& edge : net.edges()) {
        const auto pert = apply_perturbation(net, {edge.id, 0.5 * edge.length, edge.length / 20.0, 0.0});
        const auto s1 = solve_scattering(pert, e, solver).smatrix();
        worst = std::max(worst, (s1.elements - s0.elements).cwiseAbs().maxCoeff());
      }
    }
    return std::pair{worst < 1e-12, "max |dS| = " + fmt(worst)};
  });
  run("network-model", "lengths and potentials round-trip through config", [&] {
    const auto back = parse_config(serialize_config(cfg));
    return std::pair{back.network == cfg.network && back.network.build() == net, "serialize/parse"};
  });

  // scattering-core
  run("scattering-core", "unitarity, reciprocity, column sums on random networks (1e-10)", [&] {
    std::mt19937_64 rng(cfg.seed);
    double u = 0, rc = 0, col = 0;
    int done = 0, redraws = 0;
    while (done < cfg.verify.random_networks) {
      const Network rn = random_network(rng);
      const double e = random_energy_above(rng, rn);
      try {
        const auto s = solve_scattering(rn, e, solver).smatrix();
        u = std::max(u, unitarity_defect(s));
        rc = std::max(rc, reciprocity_defect(s));
        for (Eigen::Index g = 0; g < s.elements.cols(); ++g)
          col = std::max(col, std::abs(s.elements.col(g).squaredNorm() - 1.0));
        ++done;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::SingularSystem) throw;
        ++redraws;
      }
    }
    return std::pair{u < 1e-10 && rc < 1e-10 && col < 1e-10,
                     std::to_string(done) + " networks, unitarity " + fmt(u) + ", reciprocity " + fmt(rc) +
                         ", column sums " + fmt(col) + ", singular redraws " + std::to_string(redraws)};
  });
  run("scattering-core", "delta barrier, junction, free wire closed forms (1e-12)", [&] {
    double worst = 0.0;
    for (double k : {0.3, 1.0, 2.5, 6.0})
      for (double u : {-20.0, -2.0, 0.5, 2.0, 20.0}) {
        const auto s = solve_scattering(oracle::delta_barrier(u), k * k, solver).smatrix();
        worst = std::max(worst, std::abs(s(1, 0) - oracle::delta_transmission(k, u)));
      }
    const auto j = solve_scattering(oracle::junction(3), 2.0, solver).smatrix();
    for (int a = 0; a < 3; ++a)
      for (int g = 0; g < 3; ++g) worst = std::max(worst, std::abs(j(a, g) - (a == g ? -1.0 / 3.0 : 2.0 / 3.0)));
    for (double k : {0.5, 1.7}) {
      const auto w = solve_scattering(oracle::free_wire(1.3), k * k, solver).smatrix();
      worst = std::max({worst, std::abs(w(0, 0)), std::abs(std::abs(w(1, 0)) - 1.0),
                        std::abs(w(1, 0) - std::exp(cplx(0, k * 1.3)))});
    }
    return std::pair{worst < 1e-12, "max deviation " + fmt(worst)};
  });
  run("scattering-core", "two deltas in series match transfer matrices (1e-10)", [&] {
    double worst = 0.0;
    for (double k : {0.4, 1.1, 2.9})
      for (auto [l1, l2] : {std::pair{1.5, -0.7}, std::pair{3.0, 3.0}, std::pair{-2.0, 0.4}}) {
        const auto s = solve_scattering(oracle::double_delta(0.3, 1.2, 0.8, l1, l2), k * k, solver).smatrix();
        const auto [r, t] = oracle::double_delta_smatrix(k, 0.3, 1.2, 0.8, l1, l2);
        worst = std::max({worst, std::abs(s(0, 0) - r), std::abs(s(1, 0) - t)});
      }
    return std::pair{worst < 1e-10, "max deviation " + fmt(worst)};
  });
  run("scattering-core", "wavefunction continuous at vertices (1e-10)", [&] {
    double worst = 0.0;
    for (double e : {0.5, 2.0, 4.0, 9.0, 30.0}) worst = std::max(worst, oracle::continuity_defect(net, solve_scattering(net, e, solver)));
    return std::pair{worst < 1e-10, "max jump " + fmt(worst)};
  });

  // lpdos-engine
  run("lpdos-engine", "free-wire lpdos = 1/(4 pi k) (1e-6 relative, 10 points)", [&] {
    double worst = 0.0;
    const Network wire = oracle::free_wire(1.0);
    int n = 0;
    for (double k : {0.6, 1.3, 2.2, 3.7, 5.1})
      for (double x : {0.31, 0.62}) {
        const auto s = lpdos(wire, k * k, "2", {"w", x}, "1");
        worst = std::max(worst, std::abs(s.value * 4.0 * std::numbers::pi * k - 1.0));
        ++n;
      }
    return std::pair{worst < 1e-6, std::to_string(n) + " points, max relative error " + fmt(worst)};
  });
  ProbeSettings fine_probe;
  fine_probe.solver = solver;
  fine_probe.eps_mag = cfg.eps_mag;
  fine_probe.width_fraction = 1e-3;
  run("lpdos-engine", "sum rule sum_alpha rho = nu on the network (1e-4 relative)", [&] {
    const auto s = sum_rule_survey(net, cfg.lpdos_map.gamma, cfg.verify.sum_rule_points, fine_probe, cfg.workers);
    return std::pair{s.evaluated >= 50 && s.max_residual < 1e-4 && s.min_injectivity >= 0.0,
                     std::to_string(s.evaluated) + " points (" + std::to_string(s.excluded) +
                         " excluded), max residual " + fmt(s.max_residual) + ", min nu " + fmt(s.min_injectivity)};
  });
  run("lpdos-engine", "sum-rule residual shrinks when dU*w is halved", [&] {
    ProbeSettings p1;
    p1.solver = solver;
    p1.eps_mag = cfg.eps_mag;
    p1.width_fraction = 1e-2;
    ProbeSettings p2 = p1;
    p2.width_fraction = 5e-3;
    p2.target_phase = p1.target_phase / 2.0;
    const auto a = sum_rule_survey(net, cfg.lpdos_map.gamma, cfg.verify.sum_rule_points, p1, cfg.workers);
    const auto b = sum_rule_survey(net, cfg.lpdos_map.gamma, cfg.verify.sum_rule_points, p2, cfg.workers);
    return std::pair{b.mean_residual < a.mean_residual,
                     "mean residual " + fmt(a.mean_residual) + " -> " + fmt(b.mean_residual)};
  });
  run("lpdos-engine", "lpdos stable under probe-width halving (2x Richardson error + width bias)", [&] {
    int n = 0, bad = 0;
    double worst = 0.0;
    for (double e : {1.2, 3.1, 6.5}) {
      const auto sol = solve_scattering(net, e, solver);
      for (const auto& edge : net.edges()) {
        const Position pos{edge.id, 0.4 * edge.length};
        const double w = edge.length / 100.0;
        ProbeSettings p = fine_probe;
        p.width = w;
        try {
          const auto a = lpdos_all_channels(net, e, pos, cfg.lpdos_map.gamma, p);
          p.width = w / 2.0;
          const auto b = lpdos_all_channels(net, e, pos, cfg.lpdos_map.gamma, p);
          const cplx ke = sol.edges()[sol.edge_index(edge.id)].k;
          for (std::size_t i = 0; i < a.size(); ++i) {
            const double ba = lpdos_probe_bias(sol, a[i].out_channel, a[i].in_channel, pos, w);
            const double bb = lpdos_probe_bias(sol, a[i].out_channel, a[i].in_channel, pos, w / 2.0);
            const double diff = std::abs((a[i].value - b[i].value) - (ba - bb));
            const double tol = 2.0 * (a[i].richardson_error + b[i].richardson_error) +
                               0.1 * std::abs(ba) * w * w * std::norm(ke) + 1e-12 * std::abs(a[i].value);
            worst = std::max(worst, diff / tol);
            bad += diff > tol;
            ++n;
          }
        } catch (const Error& err) {
          if (err.code() != ErrorCode::MagnitudeTooSmall && err.code() != ErrorCode::Nonconverged) throw;
        }
      }
    }
    return std::pair{bad == 0 && n > 0,
                     std::to_string(n) + " samples, " + std::to_string(bad) + " outside, worst diff/tol " + fmt(worst)};
  });
  const auto& q = cfg.eq10_scan;
  run("lpdos-engine", "certified negative lpdos sample near a Fano resonance", [&] {
    const auto neg = find_negative_lpdos(family(q.u1), q.alpha, q.gamma, q.k_min, q.k_max, solver, cfg.workers);
    if (!neg.found) return std::pair{false, std::string("none found near k = ") + fmt(neg.fano_k)};
    const auto& s = neg.sample;
    return std::pair{true, "rho(" + s.out_channel + "<-" + s.in_channel + ", E = " + fmt(s.energy) + ", " +
                               s.position.edge + "@" + fmt(s.position.x) + ") = " + fmt(s.value) + " +- " +
                               fmt(s.richardson_error) + ", Fano zero at k = " + fmt(neg.fano_k)};
  });

  // argand-tracer
  const auto& a = cfg.argand_sweep;
  ArgandTrajectory traj;
  std::vector<SubLoop> loops;
  run("argand-tracer", "U1 sweep: >= 3 closed sub-loops, winding 0, phase and |s|^2 integrals vanish", [&] {
    traj = sweep_parameter(family, {a.alpha, a.gamma}, a.from, a.to, a.parameter, a.fixed, sweep_settings(cfg));
    loops = detect_subloops(traj, {a.closure_rel, a.min_samples, cfg.eps_mag});
    bool ok = loops.size() >= 3;
    double worst_phase = 0.0, worst_gap = 0.0, worst_mag = 0.0;
    for (const auto& l : loops) {
      const double bound = 2.0 * loop_max_abs(l, traj) * l.closure_gap;
      ok = ok && !l.zero_on_loop && l.winding == 0 && l.closure_gap <= a.closure_rel * l.diameter &&
           std::abs(l.phase_integral) < 1e-3 && std::abs(l.magnitude_integral) <= bound;
      worst_phase = std::max(worst_phase, std::abs(l.phase_integral));
      worst_gap = std::max(worst_gap, l.closure_gap / l.diameter);
      worst_mag = std::max(worst_mag, bound > 0 ? std::abs(l.magnitude_integral) / bound : 0.0);
    }
    return std::pair{ok, std::to_string(loops.size()) + " loops, max gap/diameter " + fmt(worst_gap) +
                             ", max |phase integral| " + fmt(worst_phase) + ", max |mag integral|/bound " +
                             fmt(worst_mag)};
  });
  run("argand-tracer", "unwrapped phase steps never exceed pi", [&] {
    double worst = 0.0;
    for (std::size_t n = 1; n < traj.samples.size(); ++n)
      if (!traj.samples[n].near_zero && !traj.samples[n - 1].near_zero)
        worst = std::max(worst, std::abs(traj.samples[n].theta - traj.samples[n - 1].theta));
    return std::pair{!traj.samples.empty() && worst <= std::numbers::pi, "max step " + fmt(worst)};
  });
  run("argand-tracer", "trajectory winding = sum over sub-loops + remainder", [&] {
    const auto& s = traj.samples;
    if (s.size() < 2) return std::pair{false, std::string("empty trajectory")};
    double total = 0.0;
    for (std::size_t n = 1; n < s.size(); ++n) total += phase_step(s[n - 1].s, s[n].s);
    total += phase_step(s.back().s, s.front().s);
    // remainder: trajectory with each loop excised (jump s_start -> s_end), closed by the chord
    double rem = 0.0;
    int loop_sum = 0;
    std::size_t n = 0;
    while (n + 1 < s.size()) {
      auto it = std::find_if(loops.begin(), loops.end(), [&](const SubLoop& l) { return l.start_index == n; });
      if (it != loops.end()) {
        rem += phase_step(s[n].s, s[it->end_index].s);
        loop_sum += it->winding;
        n = it->end_index;
      } else {
        rem += phase_step(s[n].s, s[n + 1].s);
        ++n;
      }
    }
    rem += phase_step(s.back().s, s.front().s);
    const auto tw = std::lround(total / (2 * std::numbers::pi));
    const auto rw = std::lround(rem / (2 * std::numbers::pi));
    return std::pair{tw == loop_sum + rw, "trajectory " + std::to_string(tw) + " = loops " + std::to_string(loop_sum) +
                                              " + remainder " + std::to_string(rw)};
  });
  run("argand-tracer", "winding-1 loop has phase integral 2 pi (1e-3)", [&] {
    ArgandTrajectory circle;
    const int n = 400;
    for (int j = 0; j <= n; ++j) {
      const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * j / n);
      circle.samples.push_back({static_cast<double>(j), z, std::arg(z), 1.0, false});
    }
    const auto ls = detect_subloops(circle);
    if (ls.size() != 1) return std::pair{false, std::to_string(ls.size()) + " loops"};
    const double dev = std::abs(ls[0].phase_integral - 2.0 * std::numbers::pi);
    return std::pair{ls[0].winding == 1 && dev < 1e-3, "winding " + std::to_string(ls[0].winding) + ", |phase - 2pi| " + fmt(dev)};
  });
  run("argand-tracer", "transmission zero: min |s|^2 < 1e-8 over the k range", [&] {
    MinimaSettings ms;
    ms.points = q.minima_points;
    ms.workers = cfg.workers;
    ms.solver = solver;
    const auto mins = transmission_minima(family(q.u1), q.alpha, q.gamma, q.k_min, q.k_max, ms);
    double best = std::numeric_limits<double>::infinity(), kb = 0.0;
    for (const auto& m : mins)
      if (m.mag2 < best) best = m.mag2, kb = m.k;
    return std::pair{best < 1e-8, "min " + fmt(best) + " at k = " + fmt(kb)};
  });
  run("argand-tracer", "eq10 scan: both series change sign >= 6 times (correlation reported)", [&] {
    const auto sc = eq10_scan(family, q.k_min, q.k_max, q.u1, q.delta_u1, {q.alpha, q.gamma}, eq10_settings(cfg));
    const auto& s = sc.summary;
    return std::pair{s.sign_changes_lhs >= 6 && s.sign_changes_rhs >= 6,
                     "sign changes " + std::to_string(s.sign_changes_lhs) + "/" + std::to_string(s.sign_changes_rhs) +
                         ", pearson upper half " + fmt(s.pearson_upper) + ", rel discrepancy lower/upper " +
                         fmt(s.rel_discrepancy_lower) + "/" + fmt(s.rel_discrepancy_upper)};
  });
  run("argand-tracer", "repeated sweep is bit-identical", [&] {
    RunConfig c = cfg;
    c.command = Command::ArgandSweep;
    const auto x = to_csv_string(run_argand(c).tables.front().second);
    const auto y = to_csv_string(run_argand(c).tables.front().second);
    return std::pair{x == y, std::to_string(x.size()) + " bytes"};
  });

  // cli-io
  run("cli-io", "CSV numbers round-trip exactly", [&] {
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    CsvTable t;
    t.columns = {"x"};
    std::vector<double> xs{0.0, -0.0, 1.0 / 3.0, 1e-308, 4.9e-324, 1.7976931348623157e308, -2.5e-17};
    for (int i = 0; i < 2000; ++i) {
      const std::uint64_t bits = rng();
      double d;
      std::memcpy(&d, &bits, sizeof d);
      if (std::isfinite(d)) xs.push_back(d);
    }
    for (double x : xs) {
      CsvRow r;
      r << x;
      t.rows.push_back(r.take());
    }
    const auto back = read_csv_string(to_csv_string(t)).numbers("x");
    bool same = back.size() == xs.size();
    for (std::size_t i = 0; same && i < xs.size(); ++i)
      same = std::memcmp(&back[i], &xs[i], sizeof(double)) == 0;
    return std::pair{same, std::to_string(xs.size()) + " values"};
  });
  run("cli-io", "config serialize/parse round-trip on generated configs", [&] {
    std::mt19937_64 rng(cfg.seed + 17);
    int bad = 0;
    for (int i = 0; i < 100; ++i) {
      const auto c = random_config(rng);
      bad += !(parse_config(serialize_config(c)) == c) || !(parse_config(serialize_config(c, true)) == c);
    }
    return std::pair{bad == 0, std::to_string(bad) + " of 100 differ"};
  });
  return out;
}

}  // namespace detail

inline RunOutput run_verify(const RunConfig& cfg) {
  const auto checks = detail::verify_checks(cfg);
  RunOutput out;
  auto t = detail::table_with_header(cfg, cfg.network.build().channel_order(), {"module", "check", "status", "detail"});
  std::ostringstream os;
  std::size_t failed = 0;
  for (const auto& c : checks) {
    CsvRow r;
    r << c.module << c.name << (c.pass ? "PASS" : "FAIL") << c.detail;
    t.rows.push_back(r.take());
    os << (c.pass ? "PASS  " : "FAIL  ") << c.module << ": " << c.name << "  [" << c.detail << "]\n";
    failed += !c.pass;
  }
  os << (checks.size() - failed) << "/" << checks.size() << " checks passed\n";
  t.add_meta("failed", std::to_string(failed));
  out.console = os.str();
  out.tables.emplace_back("verify.csv", std::move(t));
  out.status = failed ? 1 : 0;
  return out;
}

}  // namespace qnet
