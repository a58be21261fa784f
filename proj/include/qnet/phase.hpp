#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qnet/error.hpp"

namespace qnet {

inline constexpr double default_eps_mag = 1e-12;

/// Phase step from a to b taken in (-pi, pi].
inline double phase_step(std::complex<double> a, std::complex<double> b) {
  return std::arg(b * std::conj(a));
}

/// Continuous-branch argument of a sequence: theta_0 = arg(values[0]) and each
/// later theta lies in (theta_prev - pi, theta_prev + pi].
inline std::vector<double> unwrap_phase(std::span<const std::complex<double>> values,
                                        double eps_mag = default_eps_mag) {
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(std::abs(values[i]) > eps_mag))
      throw Error(ErrorCode::MagnitudeTooSmall,
                  "|value[" + std::to_string(i) + "]| = " + std::to_string(std::abs(values[i])) +
                      "; phase undefined, refine the scan around the zero");
    out.push_back(i == 0 ? std::arg(values[0]) : out.back() + phase_step(values[i - 1], values[i]));
  }
  return out;
}

struct PhaseTrace {
  std::vector<double> parameter_values;
  std::vector<double> phases;
  std::vector<double> magnitudes;
  bool undersampled = false;
};

/// Adjacent steps larger than this are ambiguous after unwrapping.
inline constexpr double undersample_step = std::numbers::pi / 2;

inline PhaseTrace make_phase_trace(std::span<const double> params, std::span<const std::complex<double>> values,
                                   double eps_mag = default_eps_mag) {
  if (params.size() != values.size())
    throw Error(ErrorCode::InvalidArgument, "parameter/value length mismatch");
  PhaseTrace t;
  t.parameter_values.assign(params.begin(), params.end());
  t.phases = unwrap_phase(values, eps_mag);
  t.magnitudes.reserve(values.size());
  for (auto v : values) t.magnitudes.push_back(std::abs(v));
  for (std::size_t i = 1; i < t.phases.size(); ++i)
    if (std::abs(t.phases[i] - t.phases[i - 1]) > undersample_step) t.undersampled = true;
  return t;
}

}  // namespace qnet
