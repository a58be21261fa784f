#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/error.hpp"
#include "qnet/network.hpp"
#include "qnet/units.hpp"

namespace qnet {

using cplx = std::complex<double>;

/// Local wavenumber on the branch Im k >= 0, with Re k > 0 for propagating waves
/// and k = i*kappa (kappa > 0) for evanescent ones.
struct Wavenumber {
  cplx value;

  bool evanescent() const noexcept { return value.imag() > 0.0; }
};

inline Wavenumber wavenumber(double energy, double potential, double threshold_eps = 1e-9) {
  const double gap = energy - potential;
  if (std::abs(gap) < threshold_eps)
    throw Error(ErrorCode::NearThreshold, "E - V = " + std::to_string(gap) + " at E = " + std::to_string(energy) +
                                              "; shift the energy");
  const double d = units::two_m * gap / (units::hbar * units::hbar);
  if (d > 0.0) return {cplx(std::sqrt(d), 0.0)};
  return {cplx(0.0, std::sqrt(-d))};
}

struct SolverOptions {
  double threshold_eps = 1e-9;
  /// Reciprocal condition number (after row equilibration) below which the
  /// matching system is rejected as singular.
  double min_rcond = 1e-13;
};

struct SMatrix {
  double energy = 0.0;
  std::vector<std::string> channel_order;
  Eigen::MatrixXcd elements;

  std::size_t size() const noexcept { return channel_order.size(); }

  std::size_t channel(std::string_view id) const {
    for (std::size_t i = 0; i < channel_order.size(); ++i)
      if (channel_order[i] == id) return i;
    throw Error(ErrorCode::UnknownChannel, "no channel '" + std::string(id) + "'");
  }

  /// s_{alpha gamma}: amplitude for incidence in gamma, exit through alpha.
  cplx operator()(std::size_t alpha, std::size_t gamma) const { return elements(alpha, gamma); }
  cplx element(std::string_view alpha, std::string_view gamma) const {
    return elements(channel(alpha), channel(gamma));
  }
};

/// (A, B) with psi(x) = A e^{ikx} + B e^{-ikx} on an edge.
struct EdgeAmplitudes {
  cplx a;
  cplx b;
};

/// S-matrix plus interior wavefunctions for every incident lead.
///
/// Internally each edge stores end-referenced amplitudes (a, b) with
/// psi(x) = a e^{ikx} + b e^{ik(L-x)}, so that both basis functions stay
/// bounded on evanescent edges.
class ScatteringSolution {
 public:
  struct EdgeData {
    std::string id;
    double length;
    cplx k;
  };

  ScatteringSolution(SMatrix s, std::vector<EdgeData> edges, Eigen::MatrixXcd edge_coeffs)
      : smatrix_(std::move(s)), edges_(std::move(edges)), coeffs_(std::move(edge_coeffs)) {}

  const SMatrix& smatrix() const noexcept { return smatrix_; }
  const std::vector<EdgeData>& edges() const noexcept { return edges_; }

  std::size_t edge_index(std::string_view id) const {
    for (std::size_t i = 0; i < edges_.size(); ++i)
      if (edges_[i].id == id) return i;
    throw Error(ErrorCode::UnknownEdge, "no edge '" + std::string(id) + "'");
  }

  /// Amplitudes in the e^{+-ikx} convention for incidence from channel `gamma`.
  EdgeAmplitudes amplitudes(std::size_t gamma, std::size_t edge) const {
    const auto& e = edges_[edge];
    const cplx a = coeffs_(2 * edge, gamma);
    const cplx b = coeffs_(2 * edge + 1, gamma);
    return {a, b * std::exp(cplx(0, 1) * e.k * e.length)};
  }

  cplx psi(std::size_t gamma, std::size_t edge, double x) const {
    const auto& e = edges_[edge];
    const cplx i(0, 1);
    return coeffs_(2 * edge, gamma) * std::exp(i * e.k * x) +
           coeffs_(2 * edge + 1, gamma) * std::exp(i * e.k * (e.length - x));
  }

  cplx dpsi(std::size_t gamma, std::size_t edge, double x) const {
    const auto& e = edges_[edge];
    const cplx i(0, 1);
    return i * e.k *
           (coeffs_(2 * edge, gamma) * std::exp(i * e.k * x) -
            coeffs_(2 * edge + 1, gamma) * std::exp(i * e.k * (e.length - x)));
  }

 private:
  SMatrix smatrix_;
  std::vector<EdgeData> edges_;
  Eigen::MatrixXcd coeffs_;
};

namespace detail {

// One incidence of an edge end or lead on a vertex, expressed as linear
// functionals of the unknown vector (value and outward derivative) plus the
// per-incident-lead inhomogeneous part.
struct Incidence {
  std::vector<std::pair<std::size_t, cplx>> value;
  std::vector<std::pair<std::size_t, cplx>> deriv;
  int lead = -1;  // channel index when the incidence is a lead
};

}  // namespace detail

/// Solves the matching problem (continuity, delta/Kirchhoff current condition,
/// unit incoming wave in one lead) for every incident lead at energy E.
inline ScatteringSolution solve_scattering(const Network& net, double energy, const SolverOptions& opt = {}) {
  if (!(energy > 0.0) || !std::isfinite(energy))
    throw Error(ErrorCode::InvalidEnergy, "E = " + std::to_string(energy) + " must be > 0");
  require_valid(net);

  const cplx i(0, 1);
  const std::size_t ne = net.edges().size();
  const std::size_t nl = net.leads().size();
  const std::size_t n = 2 * ne + nl;
  const cplx k0 = wavenumber(energy, 0.0, opt.threshold_eps).value;

  std::vector<ScatteringSolution::EdgeData> edata;
  edata.reserve(ne);
  std::vector<std::vector<detail::Incidence>> at(net.vertices().size());
  for (std::size_t e = 0; e < ne; ++e) {
    const Edge& edge = net.edges()[e];
    const cplx k = wavenumber(energy, edge.potential, opt.threshold_eps).value;
    const cplx ph = std::exp(i * k * edge.length);
    edata.push_back({edge.id, edge.length, k});
    const std::size_t ca = 2 * e, cb = 2 * e + 1;
    // x = 0 end: outward is +x.
    at[*net.find_vertex(edge.from)].push_back({{{ca, 1.0}, {cb, ph}}, {{ca, i * k}, {cb, -i * k * ph}}, -1});
    // x = L end: outward is -x.
    at[*net.find_vertex(edge.to)].push_back({{{ca, ph}, {cb, 1.0}}, {{ca, -i * k * ph}, {cb, i * k}}, -1});
  }
  for (std::size_t l = 0; l < nl; ++l) {
    // psi = delta e^{-ikx} + s e^{ikx}, x outward: value = s + delta, derivative = ik(s - delta).
    at[*net.find_vertex(net.leads()[l].vertex)].push_back(
        {{{2 * ne + l, 1.0}}, {{2 * ne + l, i * k0}}, static_cast<int>(l)});
  }

  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, nl);
  std::size_t row = 0;
  for (std::size_t v = 0; v < at.size(); ++v) {
    const auto& inc = at[v];
    const auto& first = inc.front();
    for (std::size_t j = 1; j < inc.size(); ++j, ++row) {
      for (auto [c, x] : first.value) m(row, c) += x;
      for (auto [c, x] : inc[j].value) m(row, c) -= x;
      if (inc[j].lead >= 0) rhs(row, inc[j].lead) += 1.0;
      if (first.lead >= 0) rhs(row, first.lead) -= 1.0;
    }
    const double lambda = net.vertices()[v].delta_strength;
    for (const auto& it : inc) {
      for (auto [c, x] : it.deriv) m(row, c) += x;
      if (it.lead >= 0) rhs(row, it.lead) += i * k0;
    }
    for (auto [c, x] : first.value) m(row, c) -= lambda * x;
    if (first.lead >= 0) rhs(row, first.lead) += lambda;
    ++row;
  }

  for (std::size_t r = 0; r < n; ++r) {
    const double scale = m.row(r).cwiseAbs().maxCoeff();
    if (scale > 0.0) {
      m.row(r) /= scale;
      rhs.row(r) /= scale;
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const double rc = lu.rcond();
  if (!(rc >= opt.min_rcond))
    throw Error(ErrorCode::SingularSystem, "rcond = " + std::to_string(rc) + " at E = " + std::to_string(energy) +
                                               "; offset the energy slightly");
  Eigen::MatrixXcd x = lu.solve(rhs);

  SMatrix s{energy, net.channel_order(), x.bottomRows(nl)};
  return ScatteringSolution(std::move(s), std::move(edata), x.topRows(2 * ne));
}

inline cplx wavefunction_at(const ScatteringSolution& sol, std::string_view gamma, std::string_view edge, double x) {
  const std::size_t g = sol.smatrix().channel(gamma);
  const std::size_t e = sol.edge_index(edge);
  const double len = sol.edges()[e].length;
  const double slack = 1e-12 * len;
  if (!(x >= -slack && x <= len + slack))
    throw Error(ErrorCode::PositionOutOfRange,
                "x = " + std::to_string(x) + " outside [0, " + std::to_string(len) + "] on '" + std::string(edge) + "'");
  return sol.psi(g, e, std::clamp(x, 0.0, len));
}

/// max |(S^dagger S - I)_{ij}|
inline double unitarity_defect(const SMatrix& s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  return (s.elements.adjoint() * s.elements - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

/// max |(S - S^T)_{ij}|
inline double reciprocity_defect(const SMatrix& s) {
  return (s.elements - s.elements.transpose()).cwiseAbs().maxCoeff();
}

/// (e0/h)|s_{alpha gamma}|^2, the coherent current per unit energy window.
inline double coherent_current(const SMatrix& s, std::string_view alpha, std::string_view gamma) {
  return units::e0 / units::h * std::norm(s.element(alpha, gamma));
}

}  // namespace qnet
