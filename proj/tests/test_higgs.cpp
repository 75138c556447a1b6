#include <gtest/gtest.h>

#include <cmath>

#include "hypmin/error.hpp"
#include "hypmin/higgs.hpp"
#include "support.hpp"

namespace hypmin {
namespace {

using higgs::HiggsAssembly;
using test::basis;
using test::scaled;
using test::surface;
using test::zero_like;

struct Germ {
  invariants::GermData data;
  germ::GermSolution sol;
};

Germ rh3(int r, double amplitude) {
  const auto m = surface(2, r);
  const bundles::LineBundle L = bundles::make_line_bundle(*m, 0);
  const auto q = amplitude == 0.0 ? zero_like(*m, 2, 0, 0) : scaled(basis(*m, L, 2, 0, 3).sections[0], amplitude);
  const germ::GermData3 d = germ::make_germ3(m, q);
  return {d, germ::solve_gauss3(d)};
}

Germ rh4(int r, int l, double a1, double a2) {
  const auto m = surface(2, r);
  const bundles::LineBundle L = bundles::make_line_bundle(*m, l);
  const auto th1 = a1 == 0.0 ? zero_like(*m, 2, -1, l) : scaled(basis(*m, L, 2, -1, 3 - l).sections[0], a1);
  const auto th2 = a2 == 0.0 ? zero_like(*m, 2, 1, l) : scaled(basis(*m, L, 2, 1, 3 + l).sections[1], a2);
  const germ::GermData4 d = germ::make_germ4(m, L, th1, th2);
  return {d, germ::solve_gauss_ricci4(d)};
}

TEST(Higgs, TotallyGeodesicIsDirectSum) {
  const Germ g = rh3(3, 0.0);
  const HiggsAssembly a = higgs::build_from_germ(g.data, g.sol);
  EXPECT_EQ(a.n, 3);
  EXPECT_EQ(a.size(), 3);
  for (const auto& b : a.betas()) EXPECT_EQ(b.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(higgs::check_structure(a).ok());
  const HiggsAssembly s = higgs::gauge_scale(a, 3.0);
  EXPECT_EQ(higgs::block_distance(a, s), 0.0);
  EXPECT_EQ(s.phi, (a.phi * cplx(3.0)).eval());
}

TEST(Higgs, HopfDifferentialGivesNontrivialClass) {
  const Germ g = rh3(4, 1.0);
  const HiggsAssembly a = higgs::build_from_germ(g.data, g.sol);
  EXPECT_TRUE(higgs::check_structure(a).ok());
  ASSERT_EQ(a.beta_blocks.size(), 1u);
  const bundles::ClassTest t = bundles::class_is_trivial(*a.mesh, *a.L, a.beta_blocks[0], g.sol.u);
  EXPECT_FALSE(t.trivial);
  EXPECT_GT(t.norm, 10.0 * 0.05);
  const nlohmann::json man = a.manifest();
  EXPECT_TRUE(man.contains("blocks"));
}

TEST(Higgs, RefusesBadInput) {
  const auto m = surface(2, 3);
  const germ::GermData3 forced = germ::make_forced_germ3(m, Eigen::VectorXd::Zero(m->num_vertices()));
  const germ::GermSolution sol = germ::solve_gauss3(forced);
  try {
    higgs::build_from_germ(forced, sol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
  }
  Germ g = rh3(3, 0.0);
  g.sol.converged = false;
  try {
    higgs::build_from_germ(g.data, g.sol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StaleSolution);
  }
}

TEST(Higgs, SuperminimalSplits) {
  const Germ g = rh4(4, 1, 0.0, 2.5);
  const HiggsAssembly a = higgs::build_from_germ(g.data, g.sol);
  EXPECT_TRUE(higgs::check_structure(a).ok());
  EXPECT_TRUE(higgs::hodge_flag(a, 1e-10));
  const auto b = a.betas();
  EXPECT_EQ(b[0].cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(b[1].cwiseAbs().maxCoeff(), 0.0);
  // V = (K⁻¹ ⊕ L) ⊕ (L⁻¹ ⊕ K) holomorphically.
  for (int i : {0, 1}) {
    for (int j : {2, 3}) {
      if (a.blocks[i][j].kind == higgs::BlockKind::Form) EXPECT_EQ(a.block_values(i, j).cwiseAbs().maxCoeff(), 0.0);
      EXPECT_NE(a.blocks[i][j].kind, higgs::BlockKind::Dbar);
    }
  }
}

TEST(Higgs, GenericIsNotHodge) {
  const Germ g = rh4(4, 0, 0.7, 0.7);
  const HiggsAssembly a = higgs::build_from_germ(g.data, g.sol);
  EXPECT_TRUE(higgs::check_structure(a).ok());
  EXPECT_FALSE(higgs::hodge_flag(a, 1e-10));
  const Germ z = rh4(3, 0, 0.0, 0.0);
  EXPECT_TRUE(higgs::hodge_flag(higgs::build_from_germ(z.data, z.sol), 1e-10));
}

TEST(Higgs, GaugeScaling) {
  const Germ g = rh4(4, 0, 0.7, 0.7);
  const HiggsAssembly a = higgs::build_from_germ(g.data, g.sol);
  EXPECT_EQ(higgs::block_distance(a, higgs::gauge_scale(a, 1.0)), 0.0);
  const HiggsAssembly two = higgs::gauge_scale(a, 2.0);
  for (std::size_t k = 0; k < a.betas().size(); ++k) EXPECT_EQ(two.betas()[k], (a.betas()[k] * cplx(0.5)).eval());
  EXPECT_EQ(two.phi, (a.phi * cplx(2.0)).eval());
  EXPECT_TRUE(higgs::check_structure(two).ok());
  const cplx lambda(2.0, 1.0);
  EXPECT_LE(higgs::block_distance(higgs::gauge_scale(higgs::gauge_scale(a, lambda), 1.0 / lambda), a), 1e-12);
  EXPECT_EQ(higgs::q_v_defect(a, {2.0, 1.0, 1.0, 0.5}), 0.0);
  try {
    higgs::gauge_scale(a, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
  }
}

TEST(Higgs, CStarLiftIsExact) {
  const Germ g = rh4(4, 0, 0.7, 0.7);
  const HiggsAssembly a = higgs::build_from_germ(g.data, g.sol);
  const cplx s(0.0, 2.0);
  const HiggsAssembly lifted = higgs::lift_cstar(a, s);
  std::vector<bundles::FaceForm> moved = a.beta_blocks;
  moved[0].values *= s;
  moved[1].values *= 1.0 / s;
  const HiggsAssembly direct = higgs::build_from_beta(a.mesh, a.L, 4, moved);
  EXPECT_EQ(lifted.betas()[0], direct.betas()[0]);
  EXPECT_EQ(lifted.betas()[1], direct.betas()[1]);
  EXPECT_EQ(higgs::q_v_defect(a, {1.0, s, 1.0 / s, 1.0}), 0.0);
  EXPECT_TRUE(higgs::check_structure(lifted).ok());
}

// Gauge T = exp(N) of the well-definedness argument for n = 3, with N₀₁ = ψ and
// N₁₂ = −ψ (so θ = −ψ²/2 in the corner), ψ a smooth section of K⁻¹.
struct GaugeT {
  const mesh::SurfaceMesh& mesh;
  const bundles::LineBundle& L;
  Eigen::VectorXcd psi;       // vertices
  Eigen::VectorXcd psi_face;  // faces, chart of the face

  GaugeT(const mesh::SurfaceMesh& m, const bundles::LineBundle& l, Eigen::VectorXcd p)
      : mesh(m), L(l), psi(std::move(p)), psi_face(m.num_faces()) {
    for (int f = 0; f < m.num_faces(); ++f) {
      cplx acc = 0.0;
      for (int q = 0; q < 3; ++q) acc += bundles::corner_value(m, l, f, q, psi[m.faces[f].v[q]], -1, 0, 0);
      psi_face[f] = acc / 3.0;
    }
  }

  static Eigen::VectorXcd act(const Eigen::VectorXcd& x, const Eigen::VectorXcd& p, double sign) {
    const Eigen::Index n = p.size();
    Eigen::VectorXcd y = x;
    const Eigen::ArrayXcd s1 = x.segment(n, n).array(), s2 = x.segment(2 * n, n).array();
    y.segment(0, n).array() += sign * p.array() * s1 - 0.5 * p.array().square() * s2;
    y.segment(n, n).array() -= sign * p.array() * s2;
    return y;
  }
  Eigen::VectorXcd forward(const Eigen::VectorXcd& sections) const { return act(sections, psi, 1.0); }
  Eigen::VectorXcd inverse_at_faces(const Eigen::VectorXcd& forms) const { return act(forms, psi_face, -1.0); }
};

std::pair<double, double> gauge_witness_defect(int r) {
  const auto m = surface(2, r);
  const bundles::LineBundle L = bundles::make_line_bundle(*m, 0);
  auto Lp = std::make_shared<const bundles::LineBundle>(L);
  const bundles::HolomorphicBasis k = basis(*m, L, 1, 0, 2);
  const bundles::HolomorphicBasis q = basis(*m, L, 2, 0, 3);
  const Eigen::VectorXcd psi = 0.5 * (k.sections[0].values + cplx(0.3, 0.4) * k.sections[1].values).conjugate();
  const bundles::FaceForm beta = bundles::vertex_form_to_faces(*m, L, -1, 0, q.sections[0].values.conjugate());
  bundles::FaceForm moved = beta;
  moved.values -= bundles::dbar_operator(*m, L, -1, 0).apply(psi).values;
  const HiggsAssembly a = higgs::build_from_beta(m, Lp, 3, {beta});
  const HiggsAssembly b = higgs::build_from_beta(m, Lp, 3, {moved});

  const int nv = m->num_vertices();
  Eigen::VectorXcd s(3 * nv);
  s << psi, Eigen::VectorXcd::Constant(nv, 1.0), k.sections[0].values;
  const GaugeT T(*m, L, psi);
  const Eigen::VectorXcd lhs = T.inverse_at_faces(a.apply(T.forward(s)));
  const Eigen::Map<const Eigen::VectorXd> w(m->face_areas.data(), m->num_faces());
  const int nf = m->num_faces();
  auto rel = [&](const Eigen::VectorXcd& rhs) {
    double num = 0.0, den = 0.0;
    for (int c = 0; c < 3; ++c) {
      num += w.dot((lhs - rhs).segment(c * nf, nf).cwiseAbs2());
      den += w.dot(rhs.segment(c * nf, nf).cwiseAbs2());
    }
    return std::sqrt(num / den);
  };
  return {rel(b.apply(s)), rel(a.apply(s))};
}

TEST(Higgs, CohomologousBetasAreGaugeEquivalent) {
  const auto [coarse, control] = gauge_witness_defect(4);
  const double fine = gauge_witness_defect(5).first;
  EXPECT_GT(control, 0.1);
  RecordProperty("defect_r4", std::to_string(coarse));
  RecordProperty("defect_r5", std::to_string(fine));
  EXPECT_LT(fine, coarse / 1.8);
  EXPECT_LT(fine, 0.05);
}

}  // namespace
}  // namespace hypmin
