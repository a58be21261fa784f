#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/error.hpp"
#include "qnet/network.hpp"
#include "qnet/phase.hpp"
#include "qnet/scattering.hpp"
#include "qnet/units.hpp"

namespace qnet {

/// A callable producing the network for a given value of the swept potential U1.
template <class F>
concept NetworkFamily = std::invocable<const F&, double> &&
                        std::convertible_to<std::invoke_result_t<const F&, double>, Network>;

/// Finite-difference probe used for the functional derivative d(theta)/dU(r).
struct ProbeSettings {
  /// Probe width; unset selects width_fraction * edge length.
  std::optional<double> width;
  double width_fraction = 0.01;
  /// Potential step; unset selects it so that the phase change is about target_phase.
  std::optional<double> delta_u;
  double target_phase = 1e-4;
  double eps_mag = default_eps_mag;
  /// NONCONVERGED when the Richardson discrepancy exceeds this fraction of the value.
  double max_rel_discrepancy = 0.1;
  SolverOptions solver{};

  bool operator==(const ProbeSettings& o) const {
    return width == o.width && width_fraction == o.width_fraction && delta_u == o.delta_u &&
           target_phase == o.target_phase && eps_mag == o.eps_mag && max_rel_discrepancy == o.max_rel_discrepancy;
  }
};

struct Sensitivity {
  double value = 0.0;             // d(theta)/dU(r), Richardson-extrapolated
  double richardson_error = 0.0;  // |extrapolated - finer central difference|
  double delta_u = 0.0;
  double width = 0.0;
};

struct LpdosSample {
  double energy = 0.0;
  std::string out_channel;
  std::string in_channel;
  Position position;
  double value = 0.0;
  double richardson_error = 0.0;
  PerturbationSpec probe;
};

struct InjectivitySample {
  double energy = 0.0;
  std::string in_channel;
  Position position;
  double value = 0.0;
};

namespace detail {

struct ChannelSensitivities {
  std::vector<cplx> s;  // unperturbed s_{alpha gamma} for every alpha
  std::vector<Sensitivity> per_alpha;
  // Channels with |s| <= eps_mag (only when zero_ok): value holds the
  // |s|^2-weighted derivative Im(s* ds/dU), which is finite where theta is not.
  std::vector<bool> zero;
};

// Sensitivities of every s_{alpha gamma} (alpha in `alphas`) to a potential
// probe at `pos`; all channels share the same perturbed solves.
inline ChannelSensitivities phase_sensitivities(const Network& net, double energy, std::size_t gamma,
                                                const std::vector<std::size_t>& alphas, const Position& pos,
                                                const ProbeSettings& probe, bool zero_ok = false) {
  const Edge& edge = net.edge(pos.edge);
  const double w = probe.width ? *probe.width : probe.width_fraction * edge.length;
  if (probe.delta_u && !(*probe.delta_u != 0.0 && std::isfinite(*probe.delta_u)))
    throw Error(ErrorCode::InvalidArgument, "delta_u must be nonzero and finite");
  const auto base = solve_scattering(net, energy, probe.solver);
  ChannelSensitivities out;
  for (std::size_t a = 0; a < base.smatrix().size(); ++a) out.s.push_back(base.smatrix()(a, gamma));
  for (auto a : alphas) {
    const bool z = !(std::abs(out.s[a]) > probe.eps_mag);
    if (z && !zero_ok)
      throw Error(ErrorCode::MagnitudeTooSmall, "|s_" + net.leads()[a].id + "," + net.leads()[gamma].id +
                                                    "| below eps at E = " + std::to_string(energy));
    out.zero.push_back(z);
  }

  auto column = [&](double du) {
    const auto pert = apply_perturbation(net, {pos.edge, pos.x, w, du});
    const auto sol = solve_scattering(pert, energy, probe.solver);
    std::vector<cplx> col;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const cplx v = sol.smatrix()(alphas[i], gamma);
      if (!out.zero[i] && !(std::abs(v) > probe.eps_mag))
        throw Error(ErrorCode::MagnitudeTooSmall, "perturbed |s| below eps at E = " + std::to_string(energy));
      col.push_back(v);
    }
    return col;
  };
  auto central = [&](double du) {
    const auto plus = column(du);
    const auto minus = column(-du);
    std::vector<double> d;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const cplx s0 = out.s[alphas[i]];
      if (out.zero[i])
        d.push_back((std::conj(s0) * (plus[i] - minus[i])).imag() / (2.0 * du * w));
      else
        d.push_back((phase_step(s0, plus[i]) - phase_step(s0, minus[i])) / (2.0 * du * w));
    }
    return d;
  };

  double du = probe.delta_u.value_or(0.0);
  if (!probe.delta_u) {
    const auto pilot = central(1e-6 / w);
    double scale = 0.0;
    for (std::size_t i = 0; i < pilot.size(); ++i)
      if (!out.zero[i]) scale = std::max(scale, std::abs(pilot[i]));
    double duw = scale > 0.0 ? probe.target_phase / scale : 1e-2;
    duw = std::clamp(duw, 1e-10, 1e-2);
    du = duw / w;
  }
  const auto coarse = central(du);
  const auto fine = central(0.5 * du);
  const double k = std::sqrt(energy);
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double extrap = (4.0 * fine[i] - coarse[i]) / 3.0;
    const double err = std::abs(extrap - fine[i]);
    if (!out.zero[i] && err > probe.max_rel_discrepancy * std::abs(extrap) + 1e-9 / (2.0 * k))
      throw Error(ErrorCode::Nonconverged, "Richardson discrepancy " + std::to_string(err) + " vs value " +
                                               std::to_string(extrap) + " at E = " + std::to_string(energy));
    out.per_alpha.push_back({extrap, err, du, w});
  }
  return out;
}

inline double lpdos_prefactor(cplx s) { return -std::norm(s) / (2.0 * std::numbers::pi); }

inline LpdosSample make_sample(const ChannelSensitivities& cs, std::size_t i, std::size_t alpha, double energy,
                               std::string out_channel, std::string_view gamma, const Position& pos) {
  const auto& sens = cs.per_alpha[i];
  // zero channels already carry the |s|^2 weight
  const double pre = cs.zero[i] ? -1.0 / (2.0 * std::numbers::pi) : lpdos_prefactor(cs.s[alpha]);
  return {energy,
          std::move(out_channel),
          std::string(gamma),
          pos,
          pre * sens.value,
          std::abs(pre) * sens.richardson_error,
          {pos.edge, pos.x, sens.width, sens.delta_u}};
}

}  // namespace detail

/// Functional derivative d(theta_{alpha gamma})/dU(r) by a central difference in
/// the probe potential with one Richardson step (dU and dU/2).
inline Sensitivity phase_sensitivity(const Network& net, double energy, std::string_view alpha,
                                     std::string_view gamma, const Position& pos, const ProbeSettings& probe = {}) {
  const auto a = net.lead_index(alpha);
  const auto g = net.lead_index(gamma);
  return detail::phase_sensitivities(net, energy, g, {a}, pos, probe).per_alpha.front();
}

/// rho_lpd(E, alpha, r, gamma) = -(1/2pi) |s_{alpha gamma}|^2 d(theta)/dU(r). May be negative.
inline LpdosSample lpdos(const Network& net, double energy, std::string_view alpha, const Position& pos,
                         std::string_view gamma, const ProbeSettings& probe = {}) {
  const auto a = net.lead_index(alpha);
  const auto g = net.lead_index(gamma);
  const auto cs = detail::phase_sensitivities(net, energy, g, {a}, pos, probe);
  return detail::make_sample(cs, 0, a, energy, std::string(alpha), gamma, pos);
}

/// rho_lpd for every outgoing channel alpha, sharing one set of perturbed solves.
/// A channel with |s_{alpha gamma}| <= eps_mag is evaluated in the weighted form
/// -(1/2pi) Im(s* ds/dU), which vanishes with s instead of being undefined.
inline std::vector<LpdosSample> lpdos_all_channels(const Network& net, double energy, const Position& pos,
                                                   std::string_view gamma, const ProbeSettings& probe = {}) {
  const auto g = net.lead_index(gamma);
  std::vector<std::size_t> alphas(net.leads().size());
  for (std::size_t i = 0; i < alphas.size(); ++i) alphas[i] = i;
  const auto cs = detail::phase_sensitivities(net, energy, g, alphas, pos, probe, true);
  std::vector<LpdosSample> out;
  for (std::size_t a = 0; a < alphas.size(); ++a)
    out.push_back(detail::make_sample(cs, a, a, energy, net.leads()[a].id, gamma, pos));
  return out;
}

/// nu(r, gamma) = |psi_gamma(r)|^2 / (h v) with v = 2k in the leads.
inline InjectivitySample injectivity(const ScatteringSolution& sol, const Position& pos, std::string_view gamma) {
  const double energy = sol.smatrix().energy;
  const double v = 2.0 * std::sqrt(energy) * units::hbar / units::two_m;
  const cplx psi = wavefunction_at(sol, gamma, pos.edge, pos.x);
  return {energy, std::string(gamma), pos, std::norm(psi) / (units::h * v)};
}

inline InjectivitySample injectivity(const Network& net, double energy, const Position& pos, std::string_view gamma,
                                     const SolverOptions& opt = {}) {
  return injectivity(solve_scattering(net, energy, opt), pos, gamma);
}

/// Leading bias of a width-w rectangular probe relative to the point value:
/// (w^2/24) d^2(rho_lpd)/dr^2, using rho_lpd = Re(psi_alpha psi_gamma s*)/(4 pi k)
/// and psi'' = -(E - V) psi on the edge.
inline double lpdos_probe_bias(const ScatteringSolution& sol, std::string_view alpha, std::string_view gamma,
                               const Position& pos, double width) {
  const auto& sm = sol.smatrix();
  const auto a = sm.channel(alpha);
  const auto g = sm.channel(gamma);
  const auto e = sol.edge_index(pos.edge);
  const cplx ke = sol.edges()[e].k;
  const cplx pa = sol.psi(a, e, pos.x), pg = sol.psi(g, e, pos.x);
  const cplx da = sol.dpsi(a, e, pos.x), dg = sol.dpsi(g, e, pos.x);
  const cplx second = -2.0 * ke * ke * pa * pg + 2.0 * da * dg;
  const double k = std::sqrt(sm.energy);
  return width * width / 24.0 * (second * std::conj(sm(a, g))).real() / (4.0 * std::numbers::pi * k);
}

struct SumRule {
  double sum_lpdos = 0.0;
  double injectivity = 0.0;
  double residual = 0.0;  // |sum - nu| / max(nu, eps_mag)
  std::vector<LpdosSample> terms;
};

/// Local sum rule sum_alpha rho_lpd(E, alpha, r, gamma) = nu(r, gamma).
inline SumRule sum_rule(const Network& net, double energy, const Position& pos, std::string_view gamma,
                        const ProbeSettings& probe = {}) {
  SumRule r;
  r.terms = lpdos_all_channels(net, energy, pos, gamma, probe);
  for (const auto& t : r.terms) r.sum_lpdos += t.value;
  r.injectivity = injectivity(net, energy, pos, gamma, probe.solver).value;
  r.residual = std::abs(r.sum_lpdos - r.injectivity) / std::max(r.injectivity, probe.eps_mag);
  return r;
}

inline double sum_rule_residual(const Network& net, double energy, const Position& pos, std::string_view gamma,
                                const ProbeSettings& probe = {}) {
  return sum_rule(net, energy, pos, gamma, probe).residual;
}

struct QuadratureSettings {
  int panels = 64;  // initial Simpson panels per edge (even)
  double rel_tol = 1e-8;
  int max_doublings = 12;
};

/// Integral of the injectivity over every sample edge (composite Simpson,
/// panels doubled per edge until the relative change drops below rel_tol).
inline double injectance(const ScatteringSolution& sol, std::string_view gamma, const QuadratureSettings& q = {}) {
  const std::size_t g = sol.smatrix().channel(gamma);
  const double k = std::sqrt(sol.smatrix().energy);
  const double norm = 1.0 / (units::h * 2.0 * k);
  auto simpson = [&](std::size_t e, int n) {
    const double len = sol.edges()[e].length;
    const double hstep = len / n;
    double acc = std::norm(sol.psi(g, e, 0.0)) + std::norm(sol.psi(g, e, len));
    for (int j = 1; j < n; ++j) acc += (j % 2 ? 4.0 : 2.0) * std::norm(sol.psi(g, e, j * hstep));
    return acc * hstep / 3.0;
  };
  double total = 0.0;
  for (std::size_t e = 0; e < sol.edges().size(); ++e) {
    int n = std::max(2, q.panels + q.panels % 2);
    double prev = simpson(e, n);
    for (int d = 0; d < q.max_doublings; ++d) {
      n *= 2;
      const double next = simpson(e, n);
      const bool done = std::abs(next - prev) <= q.rel_tol * std::abs(next);
      prev = next;
      if (done) break;
    }
    total += prev;
  }
  return total * norm;
}

inline double injectance(const Network& net, double energy, std::string_view gamma,
                         const QuadratureSettings& q = {}, const SolverOptions& opt = {}) {
  return injectance(solve_scattering(net, energy, opt), gamma, q);
}

struct Eq10Pair {
  double lhs = 0.0;  // |s(u1')|^2 - |s(u1)|^2
  double rhs = 0.0;  // -|s(u1)|^2 (theta(u1) - theta(u1'))
  cplx s;
  cplx s_prime;
};

/// Finite-difference pair comparing the change of |s|^2 with the phase change
/// weighted by |s|^2 for two nearby values of U1. No equality is implied.
template <NetworkFamily Family>
Eq10Pair eq10_pair(const Family& family, double energy, double u1, double u1_prime, std::string_view alpha,
                   std::string_view gamma, double eps_mag = default_eps_mag, const SolverOptions& opt = {}) {
  const auto sol = solve_scattering(family(u1), energy, opt);
  const auto a = sol.smatrix().channel(alpha);
  const auto g = sol.smatrix().channel(gamma);
  const cplx s = sol.smatrix()(a, g);
  const cplx sp = u1_prime == u1 ? s : solve_scattering(family(u1_prime), energy, opt).smatrix()(a, g);
  if (!(std::abs(s) > eps_mag) || !(std::abs(sp) > eps_mag))
    throw Error(ErrorCode::MagnitudeTooSmall, "|s| below eps at E = " + std::to_string(energy));
  // theta' - theta unwrapped as a pair
  const double dtheta = phase_step(s, sp);
  return {std::norm(sp) - std::norm(s), std::norm(s) * dtheta, s, sp};
}

}  // namespace qnet
