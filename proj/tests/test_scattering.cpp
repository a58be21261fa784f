#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qnet/random_network.hpp"
#include "qnet/scattering.hpp"
#include "qnet/verify.hpp"
#include "test_util.hpp"

using namespace qnet;
using qnet::test::code_of;

namespace {

const cplx I(0, 1);

// lead-1-j-lead-2 with a dead-end stub of length len and potential v at j
Network stub(double len, double v) {
  return Network({{"j", 0.0}, {"d", 0.0}}, {{"s", "j", "d", len, v}}, {{"1", "j"}, {"2", "j"}});
}

}  // namespace

TEST(Wavenumber, Branches) {
  EXPECT_EQ(wavenumber(4.0, 0.0).value, cplx(2.0, 0.0));
  EXPECT_FALSE(wavenumber(4.0, 0.0).evanescent());
  const auto k = wavenumber(1.0, 4.0);
  EXPECT_TRUE(k.evanescent());
  EXPECT_DOUBLE_EQ(k.value.real(), 0.0);
  EXPECT_NEAR(k.value.imag(), std::sqrt(3.0), 1e-15);
  EXPECT_DOUBLE_EQ(wavenumber(2.0, 1.0).value.real(), 1.0);
  EXPECT_EQ(code_of([] { wavenumber(1.0, 1.0 + 1e-12); }), ErrorCode::NearThreshold);
}

TEST(Solver, RejectsBadEnergy) {
  const auto net = oracle::free_wire(1.0);
  EXPECT_EQ(code_of([&] { solve_scattering(net, 0.0); }), ErrorCode::InvalidEnergy);
  EXPECT_EQ(code_of([&] { solve_scattering(net, -1.0); }), ErrorCode::InvalidEnergy);
}

TEST(Solver, ConditionGuard) {
  SolverOptions opt;
  opt.min_rcond = 2.0;  // no system can meet this
  EXPECT_EQ(code_of([&] { solve_scattering(oracle::free_wire(1.0), 1.0, opt); }), ErrorCode::SingularSystem);
}

TEST(ClosedForm, FreeWire) {
  for (double len : {0.3, 1.0, 2.7})
    for (double k : {0.4, 1.0, 3.3}) {
      const auto s = solve_scattering(oracle::free_wire(len), k * k).smatrix();
      EXPECT_LT(std::abs(s.element("2", "1") - std::exp(I * k * len)), 1e-12);
      EXPECT_LT(std::abs(s.element("1", "2") - std::exp(I * k * len)), 1e-12);
      EXPECT_LT(std::abs(s.element("1", "1")), 1e-12);
      EXPECT_LT(std::abs(s.element("2", "2")), 1e-12);
    }
}

TEST(ClosedForm, DeltaBarrier) {
  const auto s = solve_scattering(oracle::delta_barrier(2.0), 1.0).smatrix();
  EXPECT_LT(std::abs(s.element("2", "1") - cplx(0.5, -0.5)), 1e-12);
  EXPECT_LT(std::abs(s.element("1", "1") - cplx(-0.5, -0.5)), 1e-12);
  EXPECT_NEAR(std::norm(s.element("2", "1")), 0.5, 1e-12);
  for (double u : {-3.0, 0.5, 40.0})
    for (double k : {0.2, 1.7, 6.0}) {
      const auto sk = solve_scattering(oracle::delta_barrier(u), k * k).smatrix();
      const cplx t = 1.0 / (1.0 + I * u / (2.0 * k));
      EXPECT_LT(std::abs(sk.element("2", "1") - t), 1e-12);
      EXPECT_LT(std::abs(sk.element("1", "1") - (t - 1.0)), 1e-12);
    }
}

TEST(ClosedForm, KirchhoffJunction) {
  for (int n : {2, 3, 5}) {
    const auto s = solve_scattering(oracle::junction(n), 2.3).smatrix();
    for (int a = 0; a < n; ++a)
      for (int g = 0; g < n; ++g) {
        const double expect = (a == g ? 2.0 / n - 1.0 : 2.0 / n);
        EXPECT_LT(std::abs(s(a, g) - expect), 1e-12);
      }
  }
  const auto s3 = solve_scattering(oracle::junction(3), 1.0).smatrix();
  EXPECT_NEAR(s3(0, 0).real(), -1.0 / 3.0, 1e-12);
  EXPECT_NEAR(s3(1, 0).real(), 2.0 / 3.0, 1e-12);
}

TEST(ClosedForm, TwoDeltasMatchTransferMatrix) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> len(0.2, 2.0), lam(-4.0, 4.0), kk(0.3, 4.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double d1 = len(rng), d = len(rng), d3 = len(rng), l1 = lam(rng), l2 = lam(rng), k = kk(rng);
    const auto s = solve_scattering(oracle::double_delta(d1, d, d3, l1, l2), k * k).smatrix();
    const auto [r, t] = oracle::double_delta_smatrix(k, d1, d, d3, l1, l2);
    EXPECT_LT(std::abs(s.element("1", "1") - r), 1e-10);
    EXPECT_LT(std::abs(s.element("2", "1") - t), 1e-10);
  }
}

TEST(ClosedForm, EvanescentStubActsAsDelta) {
  // A closed stub under a barrier loads the vertex like a delta of strength kappa tanh(kappa L).
  for (double len : {0.5, 2.0, 8.0}) {
    const double e = 1.0, v = 10.0, kappa = std::sqrt(v - e);
    const auto s = solve_scattering(stub(len, v), e).smatrix();
    const cplx t = 1.0 / (1.0 + I * kappa * std::tanh(kappa * len) / 2.0);
    EXPECT_LT(std::abs(s.element("2", "1") - t), 1e-12) << "L = " << len;
  }
}

TEST(Wavefunction, FreeWireEnds) {
  const double len = 1.3, k = 1.7;
  const auto sol = solve_scattering(oracle::free_wire(len), k * k);
  EXPECT_LT(std::abs(wavefunction_at(sol, "1", "w", 0.0) - 1.0), 1e-12);
  EXPECT_LT(std::abs(wavefunction_at(sol, "1", "w", len) - std::exp(I * k * len)), 1e-12);
  EXPECT_LT(std::abs(wavefunction_at(sol, "1", "w", 0.4) - std::exp(I * k * 0.4)), 1e-12);
  EXPECT_EQ(code_of([&] { wavefunction_at(sol, "1", "w", -0.1); }), ErrorCode::PositionOutOfRange);
  EXPECT_EQ(code_of([&] { wavefunction_at(sol, "1", "w", len + 0.1); }), ErrorCode::PositionOutOfRange);
  EXPECT_EQ(code_of([&] { wavefunction_at(sol, "9", "w", 0.1); }), ErrorCode::UnknownChannel);
  EXPECT_EQ(code_of([&] { wavefunction_at(sol, "1", "q", 0.1); }), ErrorCode::UnknownEdge);
}

TEST(Wavefunction, EvanescentProfileDecays) {
  const double len = 3.0, e = 1.0, v = 50.0, kappa = std::sqrt(v - e);
  const auto sol = solve_scattering(stub(len, v), e);
  const cplx psi0 = wavefunction_at(sol, "1", "s", 0.0);
  double prev = std::abs(psi0);
  for (int j = 1; j <= 30; ++j) {
    const double x = len * j / 30.0;
    const cplx psi = wavefunction_at(sol, "1", "s", x);
    const double expect = std::cosh(kappa * (len - x)) / std::cosh(kappa * len);
    EXPECT_LT(std::abs(psi / psi0 - expect), 1e-10 + 1e-10 * expect) << "x = " << x;
    EXPECT_LE(std::abs(psi), prev * (1.0 + 1e-12));
    prev = std::abs(psi);
  }
}

TEST(Wavefunction, PlaneWaveAmplitudesReproducePsi) {
  const auto net = three_prong_preset({});
  const auto sol = solve_scattering(net, 5.3);
  for (std::size_t e = 0; e < sol.edges().size(); ++e) {
    const auto& ed = sol.edges()[e];
    if (std::abs(ed.k.imag()) * ed.length > 20.0) continue;  // e^{-ikx} overflows the plane-wave form
    for (std::size_t g = 0; g < 3; ++g) {
      const auto [a, b] = sol.amplitudes(g, e);
      for (double f : {0.0, 0.3, 1.0}) {
        const double x = f * ed.length;
        const cplx direct = a * std::exp(I * ed.k * x) + b * std::exp(-I * ed.k * x);
        EXPECT_LT(std::abs(direct - sol.psi(g, e, x)), 1e-10 * (1.0 + std::abs(direct)));
      }
    }
  }
}

TEST(Wavefunction, ContinuousAtVertices) {
  const auto net = three_prong_preset({});
  for (double e : {0.5, 3.85, 17.0}) EXPECT_LT(oracle::continuity_defect(net, solve_scattering(net, e)), 1e-10);
}

TEST(Defects, IdentityAndSymmetric) {
  SMatrix s{1.0, {"1", "2"}, Eigen::MatrixXcd::Identity(2, 2)};
  EXPECT_EQ(unitarity_defect(s), 0.0);
  EXPECT_EQ(reciprocity_defect(s), 0.0);
  s.elements(0, 1) = 0.5;
  EXPECT_NEAR(reciprocity_defect(s), 0.5, 1e-15);
  EXPECT_GT(unitarity_defect(s), 0.1);
}

TEST(Defects, PresetAcrossEnergies) {
  const auto net = three_prong_preset({});
  for (int j = 1; j <= 50; ++j) {
    const auto s = solve_scattering(net, 0.37 * j).smatrix();
    EXPECT_LT(unitarity_defect(s), 1e-10);
    EXPECT_LT(reciprocity_defect(s), 1e-10);
  }
}

TEST(Property, RandomNetworksUnitaryAndReciprocal) {
  std::mt19937_64 rng(2026);
  int solved = 0;
  for (int n = 0; n < 150; ++n) {
    const auto net = random_network(rng);
    ASSERT_TRUE(validate_network(net).empty());
    const double e = random_energy_above(rng, net);
    try {
      const auto sol = solve_scattering(net, e);
      const auto& s = sol.smatrix();
      EXPECT_LT(unitarity_defect(s), 1e-10) << "network " << n;
      EXPECT_LT(reciprocity_defect(s), 1e-10) << "network " << n;
      for (Eigen::Index g = 0; g < s.elements.cols(); ++g)
        EXPECT_NEAR(s.elements.col(g).squaredNorm(), 1.0, 1e-10);
      EXPECT_LT(oracle::continuity_defect(net, sol), 1e-10);
      ++solved;
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::SingularSystem);
    }
  }
  EXPECT_GE(solved, 100);
}

TEST(Current, CoherentCurrent) {
  const auto wire = solve_scattering(oracle::free_wire(1.0), 2.0).smatrix();
  EXPECT_NEAR(coherent_current(wire, "2", "1"), 1.0 / (2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(coherent_current(wire, "1", "1"), 0.0, 1e-12);
  const auto barrier = solve_scattering(oracle::delta_barrier(2.0), 1.0).smatrix();
  EXPECT_NEAR(coherent_current(barrier, "2", "1"), 0.0795775, 1e-7);
  EXPECT_EQ(code_of([&] { coherent_current(barrier, "7", "1"); }), ErrorCode::UnknownChannel);
}
