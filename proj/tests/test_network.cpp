#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qnet/network.hpp"
#include "qnet/scattering.hpp"
#include "qnet/units.hpp"
#include "qnet/verify.hpp"
#include "test_util.hpp"

using namespace qnet;
using qnet::test::code_of;

namespace {

bool has(const std::vector<Diagnostic>& d, DiagnosticCode c) {
  for (const auto& x : d)
    if (x.code == c) return true;
  return false;
}

}  // namespace

TEST(Units, PlanckAndVelocity) {
  EXPECT_DOUBLE_EQ(units::h, 2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(units::hbar, 1.0);
  EXPECT_DOUBLE_EQ(units::two_m, 1.0);
}

TEST(Validate, FreeWireIsClean) { EXPECT_TRUE(validate_network(oracle::free_wire(1.0)).empty()); }

TEST(Validate, ZeroLengthEdge) {
  const Network net({{"a", 0}, {"b", 0}}, {{"w", "a", "b", 0.0, 0.0}}, {{"1", "a"}, {"2", "b"}});
  const auto d = validate_network(net);
  ASSERT_FALSE(d.empty());
  EXPECT_TRUE(has(d, DiagnosticCode::EdgeLengthNonpositive));
  EXPECT_EQ(code_of([&] { solve_scattering(net, 1.0); }), ErrorCode::InvalidNetwork);
}

TEST(Validate, StructuralDiagnostics) {
  EXPECT_TRUE(has(validate_network(Network({{"a", 0}, {"a", 0}}, {}, {{"1", "a"}, {"2", "a"}})),
                  DiagnosticCode::DuplicateId));
  EXPECT_TRUE(has(validate_network(Network({{"a", 0}}, {{"w", "a", "zz", 1, 0}}, {{"1", "a"}, {"2", "a"}})),
                  DiagnosticCode::UnknownVertex));
  EXPECT_TRUE(has(validate_network(Network({{"a", 0}}, {{"w", "a", "a", 1, 0}}, {{"1", "a"}, {"2", "a"}})),
                  DiagnosticCode::LoopEdge));
  EXPECT_TRUE(has(validate_network(Network({{"a", 0}, {"b", 0}}, {{"w", "a", "b", 1, 0}, {"x", "b", "a", 2, 0}},
                                           {{"1", "a"}, {"2", "b"}})),
                  DiagnosticCode::MultiEdge));
  EXPECT_TRUE(has(validate_network(Network({{"a", 0}, {"b", 0}, {"c", 0}}, {{"w", "a", "b", 1, 0}},
                                           {{"1", "a"}, {"2", "b"}})),
                  DiagnosticCode::IsolatedVertex));
  EXPECT_TRUE(has(validate_network(Network({{"a", 0}, {"b", 0}, {"c", 0}, {"d", 0}},
                                           {{"w", "a", "b", 1, 0}, {"x", "c", "d", 1, 0}},
                                           {{"1", "a"}, {"2", "c"}})),
                  DiagnosticCode::Disconnected));
  EXPECT_TRUE(has(validate_network(Network({{"a", 0}, {"b", 0}}, {{"w", "a", "b", 1, 0}}, {{"1", "a"}})),
                  DiagnosticCode::TooFewLeads));
  EXPECT_TRUE(has(validate_network(Network({{"a", 0}, {"b", 0}},
                                           {{"w", "a", "b", 1, std::numeric_limits<double>::quiet_NaN()}},
                                           {{"1", "a"}, {"2", "b"}})),
                  DiagnosticCode::NonfiniteValue));
}

TEST(Preset, DefaultIsValidWithThreeLeads) {
  const auto net = three_prong_preset({});
  EXPECT_TRUE(validate_network(net).empty());
  EXPECT_EQ(net.channel_order(), (std::vector<std::string>{"1", "2", "3"}));
  EXPECT_EQ(net.edges().size(), 4u);
  EXPECT_DOUBLE_EQ(net.edge("VI").potential, 100.0);
}

TEST(Preset, SweepEndpointsConstruct) {
  for (double u1 : {-10.0, -1000.0}) {
    ThreeProngParams p;
    p.u1 = u1;
    const auto net = three_prong_preset(p);
    EXPECT_TRUE(validate_network(net).empty());
    EXPECT_DOUBLE_EQ(net.edge("VI").potential, u1);
  }
}

TEST(Preset, NonpositiveLengthRejected) {
  ThreeProngParams p;
  p.l5 = 0.0;
  p.l6 = 0.0;
  EXPECT_EQ(code_of([&] { three_prong_preset(p); }), ErrorCode::NonpositiveLength);
}

TEST(Preset, DeltaModelPutsBarrierOnVertex) {
  ThreeProngParams p;
  p.barrier = BarrierModel::Delta;
  p.u1 = 7.0;
  p.l6 = 0.0;  // unused
  const auto net = three_prong_preset(p);
  EXPECT_TRUE(validate_network(net).empty());
  EXPECT_EQ(net.edges().size(), 3u);
  EXPECT_DOUBLE_EQ(net.vertices()[*net.find_vertex("D")].delta_strength, 7.0);
}

TEST(Perturbation, SplitsEdgeAndLeavesInputAlone) {
  const auto net = three_prong_preset({});
  const auto before = net;
  const auto p = apply_perturbation(net, {"V", 0.7, 0.01, 2.5});
  EXPECT_EQ(net, before);
  EXPECT_EQ(p.edges().size(), net.edges().size() + 2);
  EXPECT_EQ(p.vertices().size(), net.vertices().size() + 2);
  EXPECT_TRUE(validate_network(p).empty());
  double total = 0.0;
  for (const auto& e : p.edges())
    if (e.id.rfind("V#", 0) == 0) total += e.length;
  EXPECT_NEAR(total, 1.5, 1e-15);
  EXPECT_DOUBLE_EQ(p.edge("V#P").potential, 2.5);
  EXPECT_NEAR(p.edge("V#P").length, 0.01, 1e-15);
  EXPECT_NEAR(p.edge("V#L").length, 0.695, 1e-15);
}

TEST(Perturbation, ZeroStrengthIsIdentity) {
  const auto net = three_prong_preset({});
  for (double e : {0.7, 3.1, 12.0}) {
    const auto s0 = solve_scattering(net, e).smatrix().elements;
    const auto s1 = solve_scattering(apply_perturbation(net, {"II", 0.31, 0.02, 0.0}), e).smatrix().elements;
    EXPECT_LT((s0 - s1).cwiseAbs().maxCoeff(), 1e-12) << "E = " << e;
  }
}

TEST(Perturbation, FreeWirePhaseShift) {
  const double len = 1.0, e = 4.0, w = 0.05, du = 0.01;
  const auto net = oracle::free_wire(len);
  const cplx t0 = solve_scattering(net, e).smatrix().element("2", "1");
  const cplx t1 = solve_scattering(apply_perturbation(net, {"w", 0.4, w, du}), e).smatrix().element("2", "1");
  const double expected = (std::sqrt(e - du) - std::sqrt(e)) * w;
  EXPECT_NEAR(std::arg(t1 / t0), expected, 1e-3 * std::abs(expected));
}

TEST(Perturbation, RangeAndWidthErrors) {
  const auto net = oracle::free_wire(1.0);
  EXPECT_EQ(code_of([&] { apply_perturbation(net, {"w", 0.995, 0.02, 1.0}); }), ErrorCode::ProbeOutOfRange);
  EXPECT_EQ(code_of([&] { apply_perturbation(net, {"w", 0.005, 0.02, 1.0}); }), ErrorCode::ProbeOutOfRange);
  EXPECT_EQ(code_of([&] { apply_perturbation(net, {"w", 0.5, 0.2, 1.0}); }), ErrorCode::ProbeTooWide);
  EXPECT_EQ(code_of([&] { apply_perturbation(net, {"w", 0.5, 0.0, 1.0}); }), ErrorCode::ProbeTooWide);
  EXPECT_EQ(code_of([&] { apply_perturbation(net, {"nope", 0.5, 0.01, 1.0}); }), ErrorCode::UnknownEdge);
}

TEST(Errors, ExitStatusIsOffsetCode) {
  EXPECT_EQ(exit_status(ErrorCode::InvalidNetwork), 10 + static_cast<int>(ErrorCode::InvalidNetwork));
  EXPECT_EQ(error_name(ErrorCode::MagnitudeTooSmall), "MAGNITUDE_TOO_SMALL");
}
