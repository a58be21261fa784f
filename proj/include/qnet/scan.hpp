#pragma once

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qnet/error.hpp"
#include "qnet/network.hpp"
#include "qnet/parallel.hpp"
#include "qnet/scattering.hpp"

namespace qnet {

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {a};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = b;
  return v;
}

/// S-matrices on an energy grid, in grid order.
inline std::vector<SMatrix> scan_energy(const Network& net, const std::vector<double>& energies, int workers = 1,
                                        const SolverOptions& opt = {}) {
  return parallel_map(energies.size(), workers,
                      [&](std::size_t i) { return solve_scattering(net, energies[i], opt).smatrix(); });
}

struct TransmissionMinimum {
  double k = 0.0;
  double mag2 = 0.0;
};

struct MinimaSettings {
  int points = 2000;
  int workers = 1;
  int brent_bits = 40;
  std::uintmax_t brent_max_iter = 200;
  SolverOptions solver{};
};

/// Local minima of |s_{alpha gamma}(k)|^2 over a k grid, each refined with
/// Brent's method on its bracketing grid interval pair. Sorted by k.
inline std::vector<TransmissionMinimum> transmission_minima(const Network& net, const std::string& alpha,
                                                            const std::string& gamma, double k_min, double k_max,
                                                            const MinimaSettings& cfg = {}) {
  if (!(k_min > 0.0) || !(k_max > k_min) || cfg.points < 3)
    throw Error(ErrorCode::InvalidArgument, "k range must satisfy 0 < k_min < k_max with >= 3 points");
  const auto a = net.lead_index(alpha);
  const auto g = net.lead_index(gamma);
  auto mag2 = [&](double k) { return std::norm(solve_scattering(net, k * k, cfg.solver).smatrix()(a, g)); };
  const auto ks = linspace(k_min, k_max, static_cast<std::size_t>(cfg.points));
  const auto vals = parallel_map(ks.size(), cfg.workers, [&](std::size_t i) { return mag2(ks[i]); });

  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < ks.size(); ++i)
    if (vals[i] <= vals[i - 1] && vals[i] < vals[i + 1]) idx.push_back(i);
  return parallel_map(idx.size(), cfg.workers, [&](std::size_t m) {
    const auto i = idx[m];
    std::uintmax_t iters = cfg.brent_max_iter;
    const auto [k, v] = boost::math::tools::brent_find_minima(mag2, ks[i - 1], ks[i + 1], cfg.brent_bits, iters);
    return v < vals[i] ? TransmissionMinimum{k, v} : TransmissionMinimum{ks[i], vals[i]};
  });
}

}  // namespace qnet
