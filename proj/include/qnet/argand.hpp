#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "qnet/error.hpp"
#include "qnet/lpdos.hpp"
#include "qnet/parallel.hpp"
#include "qnet/phase.hpp"
#include "qnet/scattering.hpp"

namespace qnet {

enum class SweepKind { U1, K };

struct Channel {
  std::string alpha;  // outgoing
  std::string gamma;  // incoming
};

struct ArgandSample {
  double param = 0.0;
  cplx s;
  double theta = std::numeric_limits<double>::quiet_NaN();  // unwrapped; NaN where |s| <= eps_mag
  double mag2 = 0.0;
  bool near_zero = false;
};

/// Sampled curve (Re s, Im s) of one S-matrix element under a parameter sweep.
/// Parameter values are strictly monotone in sweep direction.
struct ArgandTrajectory {
  Channel channel;
  SweepKind kind = SweepKind::U1;
  double fixed = 0.0;  // energy for U1 sweeps, U1 for k sweeps
  std::vector<ArgandSample> samples;
};

struct SweepSettings {
  int initial_points = 256;
  double delta_step = 0.02;  // max |s_{n+1} - s_n| after refinement
  int max_depth = 30;        // bisections per initial interval
  int workers = 1;
  double eps_mag = default_eps_mag;
  SolverOptions solver{};
};

/// Adaptive sweep of an arbitrary complex-valued function of one parameter:
/// intervals with |delta s| >= delta_step are bisected until the step bound holds.
template <class Eval>
  requires std::invocable<const Eval&, double> && std::convertible_to<std::invoke_result_t<const Eval&, double>, cplx>
std::vector<ArgandSample> adaptive_sweep(const Eval& eval, double from, double to, const SweepSettings& cfg) {
  if (!(from != to) || !std::isfinite(from) || !std::isfinite(to) || cfg.initial_points < 2)
    throw Error(ErrorCode::InvalidArgument, "sweep range must be nonempty with >= 2 initial points");
  struct Point {
    double p;
    cplx s;
    int depth;
  };
  const auto n0 = static_cast<std::size_t>(cfg.initial_points);
  auto initial = parallel_map(n0, cfg.workers, [&](std::size_t j) {
    const double p = j + 1 == n0 ? to : from + (to - from) * static_cast<double>(j) / static_cast<double>(n0 - 1);
    return Point{p, cplx(eval(p)), 0};
  });
  std::vector<Point> pts = std::move(initial);
  for (;;) {
    std::vector<std::size_t> coarse;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      if (std::abs(pts[i + 1].s - pts[i].s) >= cfg.delta_step) coarse.push_back(i);
    if (coarse.empty()) break;
    for (auto i : coarse)
      if (std::max(pts[i].depth, pts[i + 1].depth) >= cfg.max_depth)
        throw Error(ErrorCode::SubdivisionCapExceeded,
                    "interval [" + std::to_string(pts[i].p) + ", " + std::to_string(pts[i + 1].p) + "]");
    auto mids = parallel_map(coarse.size(), cfg.workers, [&](std::size_t m) {
      const auto i = coarse[m];
      const double p = 0.5 * (pts[i].p + pts[i + 1].p);
      return Point{p, cplx(eval(p)), std::max(pts[i].depth, pts[i + 1].depth) + 1};
    });
    std::vector<Point> merged;
    merged.reserve(pts.size() + mids.size());
    std::size_t m = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      merged.push_back(pts[i]);
      if (m < coarse.size() && coarse[m] == i) merged.push_back(mids[m++]);
    }
    pts = std::move(merged);
  }

  std::vector<ArgandSample> out;
  out.reserve(pts.size());
  bool have_prev = false;
  for (const auto& pt : pts) {
    ArgandSample a;
    a.param = pt.p;
    a.s = pt.s;
    a.mag2 = std::norm(pt.s);
    if (std::abs(pt.s) > cfg.eps_mag) {
      a.theta = have_prev ? out.back().theta + phase_step(out.back().s, pt.s) : std::arg(pt.s);
      have_prev = true;
    } else {
      a.near_zero = true;
      have_prev = false;
    }
    out.push_back(a);
  }
  return out;
}

/// Sweeps U1 at fixed energy (kind U1) or k at fixed U1 (kind K) and records
/// the Argand trajectory of s_{alpha gamma}.
template <NetworkFamily Family>
ArgandTrajectory sweep_parameter(const Family& family, const Channel& ch, double from, double to, SweepKind kind,
                                 double fixed, const SweepSettings& cfg = {}) {
  ArgandTrajectory t{ch, kind, fixed, {}};
  if (kind == SweepKind::U1) {
    const Network probe_net = family(from);
    const auto a = probe_net.lead_index(ch.alpha);
    const auto g = probe_net.lead_index(ch.gamma);
    t.samples = adaptive_sweep(
        [&](double u1) { return solve_scattering(family(u1), fixed, cfg.solver).smatrix()(a, g); }, from, to, cfg);
  } else {
    const Network net = family(fixed);
    const auto a = net.lead_index(ch.alpha);
    const auto g = net.lead_index(ch.gamma);
    t.samples = adaptive_sweep(
        [&](double k) { return solve_scattering(net, k * k, cfg.solver).smatrix()(a, g); }, from, to, cfg);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Sub-loops

struct LoopSettings {
  double closure_rel = 1e-2;  // closure gap relative to loop size
  int min_samples = 16;
  double eps_mag = default_eps_mag;
};

struct SubLoop {
  std::size_t start_index = 0;
  std::size_t end_index = 0;
  double closure_gap = 0.0;  // |s_end - s_start|
  double diameter = 0.0;
  bool zero_on_loop = false;  // winding and phase integral undefined when set
  int winding = 0;
  double phase_integral = 0.0;
  double magnitude_integral = 0.0;
};

/// Winding about the origin of the loop closed by the chord s_end -> s_start.
inline int winding_number(const SubLoop& loop, const ArgandTrajectory& traj, double eps_mag = default_eps_mag) {
  const auto& s = traj.samples;
  double total = 0.0;
  for (std::size_t n = loop.start_index; n <= loop.end_index; ++n) {
    if (!(std::abs(s[n].s) > eps_mag))
      throw Error(ErrorCode::ZeroOnLoop, "|s| below eps at sample " + std::to_string(n));
    if (n > loop.start_index) total += phase_step(s[n - 1].s, s[n].s);
  }
  total += phase_step(s[loop.end_index].s, s[loop.start_index].s);
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

/// Sum of phase steps along the sampled loop from start to closure sample.
/// Equals 2*pi*winding up to the phase subtended by the closure gap.
inline double loop_phase_integral(const SubLoop& loop, const ArgandTrajectory& traj,
                                  double eps_mag = default_eps_mag) {
  const auto& s = traj.samples;
  double total = 0.0;
  for (std::size_t n = loop.start_index; n <= loop.end_index; ++n) {
    if (!(std::abs(s[n].s) > eps_mag))
      throw Error(ErrorCode::ZeroOnLoop, "|s| below eps at sample " + std::to_string(n));
    if (n > loop.start_index) total += phase_step(s[n - 1].s, s[n].s);
  }
  return total;
}

/// Sum of |s|^2 increments along the loop (telescopes to the closure mismatch).
inline double loop_magnitude_integral(const SubLoop& loop, const ArgandTrajectory& traj) {
  const auto& s = traj.samples;
  double total = 0.0;
  for (std::size_t n = loop.start_index + 1; n <= loop.end_index; ++n) total += s[n].mag2 - s[n - 1].mag2;
  return total;
}

/// Largest |s| on the loop, for the closure-gap bound 2 |s|max gap on the
/// magnitude integral.
inline double loop_max_abs(const SubLoop& loop, const ArgandTrajectory& traj) {
  double m = 0.0;
  for (std::size_t n = loop.start_index; n <= loop.end_index; ++n) m = std::max(m, std::abs(traj.samples[n].s));
  return m;
}

/// Finds closed sub-loops: for each start i the first j >= i + min_samples
/// with |s_j - s_i| <= closure_rel * max_{i<=m<=j} |s_m - s_i| (moved on to
/// the nearest local minimum of the gap). The reported loops are the largest
/// disjoint subset of candidates (shared endpoints allowed), ties broken by
/// the smaller summed relative gap, in sweep order.
inline std::vector<SubLoop> detect_subloops(const ArgandTrajectory& traj, const LoopSettings& cfg = {}) {
  const auto& s = traj.samples;
  const std::size_t n = s.size();
  const auto nmin = static_cast<std::size_t>(std::max(cfg.min_samples, 1));

  struct Candidate {
    double rel;
    std::size_t i, j;
    double gap;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    auto closes = [&](std::size_t j, double d) { return j - i >= nmin && radius > 0.0 && d <= cfg.closure_rel * radius; };
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = std::abs(s[j].s - s[i].s);
      radius = std::max(radius, d);
      if (!closes(j, d)) continue;
      while (j + 1 < n) {
        const double dn = std::abs(s[j + 1].s - s[i].s);
        if (dn > d) break;
        radius = std::max(radius, dn);
        if (!closes(j + 1, dn)) break;
        ++j;
        d = dn;
      }
      cands.push_back({d / radius, i, j, d});
      break;
    }
  }
  // Weighted interval scheduling: most disjoint loops, then smallest summed
  // relative gap.
  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) { return std::tie(a.j, a.i) < std::tie(b.j, b.i); });
  struct Best {
    std::size_t count = 0;
    double rel_sum = 0.0;
    bool better_than(const Best& o) const { return count != o.count ? count > o.count : rel_sum < o.rel_sum; }
  };
  std::vector<Best> best(cands.size() + 1);
  std::vector<bool> take(cands.size(), false);
  std::vector<std::size_t> prev(cands.size(), 0);
  for (std::size_t c = 0; c < cands.size(); ++c) {
    // candidates [0, p) end at or before this start
    const auto p = static_cast<std::size_t>(
        std::upper_bound(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(c), cands[c].i,
                         [](std::size_t v, const Candidate& x) { return v < x.j; }) -
        cands.begin());
    prev[c] = p;
    const Best with{best[p].count + 1, best[p].rel_sum + cands[c].rel};
    take[c] = with.better_than(best[c]);
    best[c + 1] = take[c] ? with : best[c];
  }
  std::vector<SubLoop> loops;
  for (std::size_t c = cands.size(); c > 0;) {
    if (take[c - 1]) {
      const auto& cd = cands[c - 1];
      SubLoop l;
      l.start_index = cd.i;
      l.end_index = cd.j;
      l.closure_gap = cd.gap;
      loops.push_back(l);
      c = prev[c - 1];
    } else {
      --c;
    }
  }
  std::sort(loops.begin(), loops.end(), [](const SubLoop& a, const SubLoop& b) { return a.start_index < b.start_index; });

  for (auto& l : loops) {
    double diam = 0.0;
    for (std::size_t a = l.start_index; a <= l.end_index; ++a)
      for (std::size_t b = a + 1; b <= l.end_index; ++b) diam = std::max(diam, std::abs(s[a].s - s[b].s));
    l.diameter = diam;
    l.magnitude_integral = loop_magnitude_integral(l, traj);
    try {
      l.winding = winding_number(l, traj, cfg.eps_mag);
      l.phase_integral = loop_phase_integral(l, traj, cfg.eps_mag);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroOnLoop) throw;
      l.zero_on_loop = true;
    }
  }
  return loops;
}

/// Index of the loop containing sample n (start inclusive, end exclusive), or -1.
inline int loop_id_of(const std::vector<SubLoop>& loops, std::size_t n) {
  for (std::size_t i = 0; i < loops.size(); ++i)
    if (n >= loops[i].start_index && n < loops[i].end_index) return static_cast<int>(i);
  return -1;
}

// ---------------------------------------------------------------------------
// Comparison scan of |s|^2 change against |s|^2-weighted phase change over k

enum Eq10Flag : int { kEq10Ok = 0, kEq10NearZero = 1, kEq10Undefined = 2 };

struct Eq10Record {
  double k = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  int flag = kEq10Ok;
};

struct Eq10Summary {
  int sign_changes_lhs = 0;
  int sign_changes_rhs = 0;
  double rms_difference = 0.0;
  double pearson_full = 0.0;
  double pearson_lower = 0.0;
  double pearson_upper = 0.0;
  double rel_discrepancy_lower = 0.0;  // |lhs - rhs| / (|lhs| + |rhs|), weighted L2 norms
  double rel_discrepancy_upper = 0.0;
  std::size_t records = 0;
  std::size_t flagged = 0;
};

struct Eq10Scan {
  std::vector<Eq10Record> records;
  Eq10Summary summary;
};

struct Eq10Settings {
  int points = 801;
  int refine_levels = 8;     // bisection rounds around sign changes
  double flag_mag2 = 1e-10;  // |s|^2 below this marks a record as near a zero
  int workers = 1;
  double eps_mag = default_eps_mag;
  SolverOptions solver{};
};

namespace detail {

inline int sign_changes(const std::vector<double>& v) {
  int count = 0;
  int prev = 0;
  for (double x : v) {
    const int sg = (x > 0.0) - (x < 0.0);
    if (sg == 0) continue;
    if (prev != 0 && sg != prev) ++count;
    prev = sg;
  }
  return count;
}

// Trapezoid weights in k so that refined regions are not over-represented.
inline std::vector<double> trapezoid_weights(const std::vector<double>& k) {
  std::vector<double> w(k.size(), 0.0);
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double h = 0.5 * (k[i + 1] - k[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

inline double weighted_pearson(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& w) {
  double sw = 0, mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    mx += w[i] * x[i];
    my += w[i] * y[i];
  }
  if (sw <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  mx /= sw;
  my /= sw;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    syy += w[i] * (y[i] - my) * (y[i] - my);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

inline Eq10Summary summarize(const std::vector<Eq10Record>& recs, double k_mid) {
  Eq10Summary sum;
  sum.records = recs.size();
  std::vector<double> k, l, r;
  for (const auto& rec : recs) {
    if (rec.flag != kEq10Ok) {
      ++sum.flagged;
      continue;
    }
    k.push_back(rec.k);
    l.push_back(rec.lhs);
    r.push_back(rec.rhs);
  }
  sum.sign_changes_lhs = sign_changes(l);
  sum.sign_changes_rhs = sign_changes(r);

  auto stats = [&](auto pick, double& pearson, double* rel) {
    std::vector<double> ks, ls, rs;
    for (std::size_t i = 0; i < k.size(); ++i)
      if (pick(k[i])) {
        ks.push_back(k[i]);
        ls.push_back(l[i]);
        rs.push_back(r[i]);
      }
    const auto w = trapezoid_weights(ks);
    pearson = weighted_pearson(ls, rs, w);
    double dd = 0, ll = 0, rr = 0, sw = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      dd += w[i] * (ls[i] - rs[i]) * (ls[i] - rs[i]);
      ll += w[i] * ls[i] * ls[i];
      rr += w[i] * rs[i] * rs[i];
      sw += w[i];
    }
    if (rel) *rel = (ll + rr) > 0.0 ? std::sqrt(dd) / (std::sqrt(ll) + std::sqrt(rr)) : 0.0;
    return sw > 0.0 ? std::sqrt(dd / sw) : 0.0;
  };
  sum.rms_difference = stats([](double) { return true; }, sum.pearson_full, nullptr);
  stats([&](double kk) { return kk < k_mid; }, sum.pearson_lower, &sum.rel_discrepancy_lower);
  stats([&](double kk) { return kk >= k_mid; }, sum.pearson_upper, &sum.rel_discrepancy_upper);
  return sum;
}

}  // namespace detail

/// Scans k over [k_min, k_max] and records (lhs, rhs) of eq10_pair for U1 and
/// U1 + delta_u1; the grid is bisected where either series changes sign.
template <NetworkFamily Family>
Eq10Scan eq10_scan(const Family& family, double k_min, double k_max, double u1, double delta_u1, const Channel& ch,
                   const Eq10Settings& cfg = {}) {
  if (delta_u1 == 0.0 || !std::isfinite(delta_u1))
    throw Error(ErrorCode::InvalidArgument, "delta_u1 must be nonzero");
  if (!(k_max > k_min) || !(k_min > 0.0) || cfg.points < 2)
    throw Error(ErrorCode::InvalidArgument, "k range must satisfy 0 < k_min < k_max with >= 2 points");
  const Network net0 = family(u1);
  const Network net1 = family(u1 + delta_u1);
  auto pair_family = [&](double u) -> const Network& { return u == u1 ? net0 : net1; };

  auto eval = [&](double k) {
    Eq10Record rec{k, 0.0, 0.0, kEq10Ok};
    try {
      const auto p = eq10_pair(pair_family, k * k, u1, u1 + delta_u1, ch.alpha, ch.gamma, cfg.eps_mag, cfg.solver);
      rec.lhs = p.lhs;
      rec.rhs = p.rhs;
      if (std::norm(p.s) < cfg.flag_mag2 || std::norm(p.s_prime) < cfg.flag_mag2) rec.flag = kEq10NearZero;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MagnitudeTooSmall && e.code() != ErrorCode::NearThreshold &&
          e.code() != ErrorCode::SingularSystem)
        throw;
      rec.flag = kEq10Undefined;
    }
    return rec;
  };

  const auto n0 = static_cast<std::size_t>(cfg.points);
  auto recs = parallel_map(n0, cfg.workers, [&](std::size_t j) {
    const double k = j + 1 == n0 ? k_max : k_min + (k_max - k_min) * static_cast<double>(j) / static_cast<double>(n0 - 1);
    return eval(k);
  });

  auto differs = [](double a, double b) { return (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0); };
  for (int level = 0; level < cfg.refine_levels; ++level) {
    std::vector<std::size_t> split;
    for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
      const auto& a = recs[i];
      const auto& b = recs[i + 1];
      if (a.flag != kEq10Ok || b.flag != kEq10Ok) continue;
      if (differs(a.lhs, b.lhs) || differs(a.rhs, b.rhs)) split.push_back(i);
    }
    if (split.empty()) break;
    auto mids = parallel_map(split.size(), cfg.workers,
                             [&](std::size_t m) { return eval(0.5 * (recs[split[m]].k + recs[split[m] + 1].k)); });
    std::vector<Eq10Record> merged;
    merged.reserve(recs.size() + mids.size());
    std::size_t m = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      merged.push_back(recs[i]);
      if (m < split.size() && split[m] == i) merged.push_back(mids[m++]);
    }
    recs = std::move(merged);
  }

  Eq10Scan out;
  out.summary = detail::summarize(recs, 0.5 * (k_min + k_max));
  out.records = std::move(recs);
  return out;
}

}  // namespace qnet
