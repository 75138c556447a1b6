#include <gtest/gtest.h>

#include <cmath>

#include "hypmin/error.hpp"
#include "hypmin/invariants.hpp"
#include "support.hpp"

namespace hypmin {
namespace {

using invariants::InvariantReport;
using test::basis;
using test::kPi;
using test::scaled;
using test::surface;
using test::zero_like;

struct Solved4 {
  germ::GermData4 data;
  germ::GermSolution sol;
  InvariantReport rep;
};

Solved4 solve4(int r, int l, double a1, double a2, int i1 = 0, int i2 = 0) {
  const auto m = surface(2, r);
  const bundles::LineBundle L = bundles::make_line_bundle(*m, l);
  const auto th1 = a1 == 0.0 ? zero_like(*m, 2, -1, l) : scaled(basis(*m, L, 2, -1, 3 - l).sections[i1], a1);
  const auto th2 = a2 == 0.0 ? zero_like(*m, 2, 1, l) : scaled(basis(*m, L, 2, 1, 3 + l).sections[i2], a2);
  Solved4 s{germ::make_germ4(m, L, th1, th2), {}, {}};
  s.sol = germ::solve_gauss_ricci4(s.data);
  s.rep = invariants::compute_invariants(s.data, s.sol);
  return s;
}

TEST(Invariants, TotallyGeodesic) {
  const Solved4 s = solve4(4, 0, 0.0, 0.0);
  const InvariantReport& r = s.rep;
  EXPECT_LT((r.kappa_gamma.array() + 1.0).abs().maxCoeff(), 1e-9);
  EXPECT_LT(r.kappa_perp.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(r.area, 4.0 * kPi, 1e-8);
  EXPECT_NEAR(r.euler_integral, 0.0, 1e-9);
  const double tol = invariants::identity_tolerance(r, 10.0);
  for (const auto& [k, v] : r.residuals) {
    const bool defect_based = k == "kappaperp_identity" || k == "supermin_identity";
    EXPECT_LE(v, defect_based ? tol : 1e-6) << k;
  }
  for (const auto& [k, v] : invariants::frame_equation_residuals(s.data, s.sol)) EXPECT_LE(v, 1e-6) << k;
  EXPECT_EQ(invariants::superminimal_test(r, 1e-10), invariants::Superminimal::Plus);
}

TEST(Invariants, SuperminimalPlus) {
  const Solved4 s = solve4(4, 1, 0.0, 2.5);
  const InvariantReport& r = s.rep;
  ASSERT_TRUE(s.sol.converged);
  EXPECT_NEAR(r.euler_integral, 1.0, 0.02);
  const double tol = invariants::identity_tolerance(r, 10.0);
  EXPECT_LT((r.kappa_perp.array() + 1.0 + r.kappa_gamma.array()).abs().maxCoeff(), tol);
  EXPECT_LT((r.kappa_perp - r.ii_norm_sq).cwiseAbs().maxCoeff(), tol);
  EXPECT_EQ(r.u4_norm_sq.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(invariants::superminimal_test(r, 1e-10), invariants::Superminimal::Plus);
  EXPECT_LE(r.residuals.at("ricci_frame"), tol);
}

TEST(Invariants, SuperminimalMinus) {
  const Solved4 s = solve4(4, -1, 2.5, 0.0);
  ASSERT_TRUE(s.sol.converged);
  EXPECT_NEAR(s.rep.euler_integral, -1.0, 0.02);
  EXPECT_EQ(invariants::superminimal_test(s.rep, 1e-10), invariants::Superminimal::Minus);
}

TEST(Invariants, GenericIdentities) {
  const Solved4 s = solve4(4, 0, 0.7, 0.7, 0, 1);
  const InvariantReport& r = s.rep;
  ASSERT_TRUE(s.sol.converged);
  EXPECT_EQ(invariants::superminimal_test(r, 1e-10), invariants::Superminimal::No);
  EXPECT_GT(r.u4_norm_sq.maxCoeff(), 1e-3);
  const double tol = invariants::identity_tolerance(r, 10.0);
  const Eigen::ArrayXd lhs = r.kappa_perp.array().square();
  const Eigen::ArrayXd rhs = r.ii_norm_sq.array().square() - r.u4_norm_sq.array();
  EXPECT_LT((lhs - rhs).abs().maxCoeff(), tol);
  EXPECT_LE(r.residuals.at("kappaperp_identity"), tol);
  EXPECT_LE(r.residuals.at("area_identity"), 1e-9);
  EXPECT_LT(r.area, 4.0 * kPi);
  EXPECT_NEAR(r.euler_integral, 0.0, 0.02);
}

TEST(Invariants, HopfDifferentialInRH3) {
  const auto m = surface(2, 4);
  const bundles::LineBundle L = bundles::make_line_bundle(*m, 0);
  const germ::GermData3 d = germ::make_germ3(m, scaled(basis(*m, L, 2, 0, 3).sections[0], 1.0));
  const germ::GermSolution sol = germ::solve_gauss3(d);
  const InvariantReport r = invariants::compute_invariants(d, sol);
  EXPECT_EQ(r.n, 3);
  EXPECT_EQ(r.kappa_perp.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT((r.u4_norm_sq - r.ii_norm_sq.cwiseAbs2()).cwiseAbs().maxCoeff(), 1e-14);
  const double tol = invariants::identity_tolerance(r, 10.0);
  EXPECT_LE(r.residuals.at("gauss_identity"), tol);
  EXPECT_LE(r.residuals.at("gauss_frame"), tol);
  EXPECT_LE(r.residuals.at("kappaperp_identity"), tol);
  EXPECT_NEAR(r.area, 4.0 * kPi - mesh::integrate(*m, r.ii_norm_sq, sol.u), 1e-9);
}

TEST(Invariants, RefusesStaleSolution) {
  const auto m = surface(2, 3);
  const germ::GermData3 d = germ::make_germ3(m, zero_like(*m, 2, 0, 0));
  germ::GermSolution sol = germ::solve_gauss3(d);
  sol.converged = false;
  try {
    invariants::compute_invariants(d, sol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StaleSolution);
  }
  sol.converged = true;
  sol.mesh_hash ^= 1;
  EXPECT_THROW(invariants::compute_invariants(d, sol), Error);
}

TEST(Invariants, FrameScaleAtOrigin) {
  EXPECT_DOUBLE_EQ(invariants::frame_scale_sq(0.0, 0.0), 2.0);
  EXPECT_NEAR(invariants::frame_scale_sq(0.5, 0.0), 2.0 * std::exp(1.0), 1e-14);
}

TEST(Invariants, IdentityResidualShrinksUnderRefinement) {
  double prev = 0.0;
  for (int r = 4; r <= 5; ++r) {
    const Solved4 s = solve4(r, 0, 0.7, 0.7, 0, 1);
    const double res = s.rep.residuals.at("kappaperp_identity");
    if (r > 4) EXPECT_GT(prev / res, 3.0);
    prev = res;
  }
}

}  // namespace
}  // namespace hypmin
