#include "hypmin/higgs.hpp"

#include <cmath>
#include <limits>

#include "hypmin/error.hpp"

namespace hypmin::higgs {

namespace {

std::string bundle_name(int m, int n) {
  auto power = [](const char* base, int k) -> std::string {
    if (k == 0) return "";
    if (k == 1) return base;
    return std::string(base) + "^" + std::to_string(k);
  };
  std::string out = power("K", m);
  const std::string l = power("L", n);
  if (!out.empty() && !l.empty()) out += " ";
  out += l;
  return out.empty() ? "1" : out;
}

std::vector<Component> layout(int n) {
  if (n == 3) return {{"K^-1", -1, 0}, {"1", 0, 0}, {"K", 1, 0}};
  return {{"K^-1", -1, 0}, {"L", 0, 1}, {"L^-1", 0, -1}, {"K", 1, 0}};
}

HiggsAssembly skeleton(std::shared_ptr<const mesh::SurfaceMesh> mesh,
                       std::shared_ptr<const bundles::LineBundle> L, int n) {
  HiggsAssembly a;
  a.n = n;
  a.degree = L->degree;
  a.mesh_hash = mesh->hash();
  a.components = layout(n);
  const int k = a.size();
  a.blocks.assign(k, std::vector<Block>(k));
  for (int i = 0; i < k; ++i) {
    const Component& c = a.components[i];
    a.blocks[i][i].kind = BlockKind::Dbar;
    a.blocks[i][i].coeff = 1.0;
    a.blocks[i][i].dbar = std::make_shared<const DbarOperator>(bundles::dbar_operator(*mesh, *L, c.m, c.n));
  }
  a.q_v = Eigen::MatrixXi::Zero(k, k);
  a.q_w_partner.resize(k);
  for (int i = 0; i < k; ++i) {
    a.q_w_partner[i] = k - 1 - i;
    a.q_v(i, k - 1 - i) = 1;
  }
  auto form = [&](int row, int col, int index, double sign) {
    a.blocks[row][col].kind = BlockKind::Form;
    a.blocks[row][col].coeff = sign;
    a.blocks[row][col].form = index;
  };
  if (n == 3) {
    form(0, 1, 0, -1.0);
    form(1, 2, 0, 1.0);
  } else {
    form(1, 3, 0, 1.0);   // β₁ : K → L
    form(2, 3, 1, 1.0);   // β₂ : K → L⁻¹
    form(0, 1, 1, -1.0);  // −β₂ : L → K⁻¹
    form(0, 2, 0, -1.0);  // −β₁ : L⁻¹ → K⁻¹
  }
  a.phi = Eigen::VectorXcd::Zero(k);
  a.phi[0] = 1.0;
  a.mesh = std::move(mesh);
  a.L = std::move(L);
  return a;
}

void check_forms(const HiggsAssembly& a, const std::vector<FaceForm>& betas, const char* op) {
  const int expected = a.n == 3 ? 1 : 2;
  if (static_cast<int>(betas.size()) != expected) {
    throw Error(ErrorKind::Shape, "higgs", op, "wrong number of beta blocks",
                {{"expected", expected}, {"got", betas.size()}});
  }
  for (int j = 0; j < expected; ++j) {
    const int n = a.n == 3 ? 0 : (j == 0 ? 1 : -1);
    if (betas[j].m != -1 || betas[j].n != n || betas[j].values.size() != a.mesh->num_faces()) {
      throw Error(ErrorKind::Shape, "higgs", op, "beta block has the wrong bundle or length",
                  {{"index", j}, {"m", betas[j].m}, {"n", betas[j].n}});
    }
  }
}

}  // namespace

const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::Zero: return "zero";
    case BlockKind::Dbar: return "dbar";
    case BlockKind::Form: return "form";
  }
  return "unknown";
}

Eigen::VectorXcd HiggsAssembly::block_values(int row, int col) const {
  const Block& b = blocks.at(row).at(col);
  if (b.kind != BlockKind::Form) return Eigen::VectorXcd::Zero(mesh->num_faces());
  return b.coeff * beta_blocks[b.form].values;
}

std::vector<Eigen::VectorXcd> HiggsAssembly::betas() const {
  std::vector<Eigen::VectorXcd> out;
  const int last = size() - 1;
  for (int i = 1; i < last; ++i) out.push_back(block_values(i, last));
  return out;
}

Eigen::VectorXcd HiggsAssembly::apply(const Eigen::VectorXcd& sections) const {
  const int nv = mesh->num_vertices();
  const int nf = mesh->num_faces();
  const int k = size();
  if (sections.size() != k * nv) {
    throw Error(ErrorKind::Shape, "higgs", "apply", "stacked section length does not match",
                {{"expected", k * nv}, {"got", sections.size()}});
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(k * nf);
  for (int j = 0; j < k; ++j) {
    const Eigen::VectorXcd s = sections.segment(j * nv, nv);
    Eigen::VectorXcd at_faces;
    for (int i = 0; i < k; ++i) {
      const Block& b = blocks[i][j];
      if (b.kind == BlockKind::Dbar) {
        out.segment(i * nf, nf) += b.dbar->matrix * s;
      } else if (b.kind == BlockKind::Form) {
        if (at_faces.size() == 0) {
          at_faces.resize(nf);
          const Component& c = components[j];
          for (int f = 0; f < nf; ++f) {
            cplx acc = 0.0;
            for (int q = 0; q < 3; ++q) {
              acc += bundles::corner_value(*mesh, *L, f, q, s[mesh->faces[f].v[q]], c.m, 0, c.n);
            }
            at_faces[f] = acc / 3.0;
          }
        }
        out.segment(i * nf, nf) += (block_values(i, j).array() * at_faces.array()).matrix();
      }
    }
  }
  return out;
}

nlohmann::json HiggsAssembly::manifest() const {
  nlohmann::json j;
  j["n"] = n;
  j["degree"] = degree;
  j["mesh_hash"] = mesh_hash;
  nlohmann::json comps = nlohmann::json::array();
  for (const Component& c : components) comps.push_back({{"name", c.name}, {"m", c.m}, {"n", c.n}});
  j["components"] = comps;
  nlohmann::json blist = nlohmann::json::array();
  for (int r = 0; r < size(); ++r) {
    for (int c = 0; c < size(); ++c) {
      const Block& b = blocks[r][c];
      if (b.kind == BlockKind::Zero) continue;
      const Component& src = components[c];
      const Component& dst = components[r];
      nlohmann::json e{{"row", r},
                       {"col", c},
                       {"kind", to_string(b.kind)},
                       {"bundle", "E^{0,1}(Hom(" + src.name + ", " + dst.name + ")) = E^{0,1}(" +
                                      bundle_name(dst.m - src.m, dst.n - src.n) + ")"}};
      if (b.kind == BlockKind::Form) {
        e["form"] = b.form;
        e["coeff"] = {b.coeff.real(), b.coeff.imag()};
        e["sup_norm"] = block_values(r, c).cwiseAbs().maxCoeff();
      }
      blist.push_back(e);
    }
  }
  j["blocks"] = blist;
  nlohmann::json phi_j = nlohmann::json::array();
  for (int i = 0; i < phi.size(); ++i) phi_j.push_back({phi[i].real(), phi[i].imag()});
  j["phi"] = phi_j;
  return j;
}

HiggsAssembly build_from_beta(std::shared_ptr<const mesh::SurfaceMesh> mesh,
                              std::shared_ptr<const bundles::LineBundle> L, int n,
                              const std::vector<FaceForm>& betas) {
  if (n != 3 && n != 4) {
    throw Error(ErrorKind::InvalidParameter, "higgs", "build_from_beta", "n must be 3 or 4", {{"n", n}});
  }
  if (L->mesh_hash != mesh->hash()) {
    throw Error(ErrorKind::Shape, "higgs", "build_from_beta", "L was built on a different mesh");
  }
  if (n == 3 && L->degree != 0) {
    throw Error(ErrorKind::InvalidParameter, "higgs", "build_from_beta", "W is trivial for n = 3");
  }
  HiggsAssembly a = skeleton(std::move(mesh), std::move(L), n);
  check_forms(a, betas, "build_from_beta");
  a.beta_blocks = betas;
  return a;
}

HiggsAssembly build_from_germ(const GermData& data, const GermSolution& sol) {
  if (!sol.converged) {
    throw Error(ErrorKind::StaleSolution, "higgs", "build_from_germ", "solution did not converge");
  }
  if (const auto* d3 = std::get_if<germ::GermData3>(&data)) {
    const mesh::SurfaceMesh& mesh = *d3->mesh;
    if (sol.n != 3 || sol.mesh_hash != mesh.hash()) {
      throw Error(ErrorKind::StaleSolution, "higgs", "build_from_germ", "solution does not belong to this data");
    }
    if (!d3->q) {
      throw Error(ErrorKind::InvalidParameter, "higgs", "build_from_germ",
                  "forced data carries no Hopf differential");
    }
    auto L = std::make_shared<const bundles::LineBundle>(bundles::make_line_bundle(mesh, 0));
    // β = q̄ ⊗ γ̂⁻¹ in the unitary frame of K⁻¹K̄.
    const Eigen::VectorXcd vals =
        (d3->q->values.conjugate().array() * (-2.0 * sol.u.array()).exp().cast<cplx>()).matrix();
    return build_from_beta(d3->mesh, L, 3, {bundles::vertex_form_to_faces(mesh, *L, -1, 0, vals)});
  }
  const auto& d4 = std::get<germ::GermData4>(data);
  const mesh::SurfaceMesh& mesh = *d4.mesh;
  if (sol.n != 4 || !sol.w || sol.mesh_hash != mesh.hash()) {
    throw Error(ErrorKind::StaleSolution, "higgs", "build_from_germ", "solution does not belong to this data");
  }
  auto L = std::make_shared<const bundles::LineBundle>(d4.L);
  const Eigen::ArrayXd u = sol.u.array();
  const Eigen::ArrayXd w = sol.w->array();
  // β_j = θ̄_j / ‖Z‖²_γ; the conjugate fibre L̄^{∓1} is identified with L^{±1} by e^{2w}h_L.
  const Eigen::VectorXcd b1 =
      (d4.theta1.values.conjugate().array() * (-2.0 * u - 2.0 * w).exp().cast<cplx>()).matrix();
  const Eigen::VectorXcd b2 =
      (d4.theta2.values.conjugate().array() * (-2.0 * u + 2.0 * w).exp().cast<cplx>()).matrix();
  return build_from_beta(d4.mesh, L, 4,
                         {bundles::vertex_form_to_faces(mesh, *L, -1, 1, b1),
                          bundles::vertex_form_to_faces(mesh, *L, -1, -1, b2)});
}

HiggsAssembly conjugate(const HiggsAssembly& asm_, const std::vector<cplx>& d, const std::vector<cplx>& dinv) {
  const int k = asm_.size();
  if (static_cast<int>(d.size()) != k || static_cast<int>(dinv.size()) != k) {
    throw Error(ErrorKind::Shape, "higgs", "conjugate", "gauge size does not match the assembly");
  }
  HiggsAssembly out = asm_;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      Block& b = out.blocks[i][j];
      if (b.kind == BlockKind::Form) b.coeff = asm_.blocks[i][j].coeff * (d[i] * dinv[j]);
    }
  }
  return out;
}

HiggsAssembly gauge_scale(const HiggsAssembly& asm_, cplx lambda) {
  if (lambda == cplx(0.0)) {
    throw Error(ErrorKind::InvalidParameter, "higgs", "gauge_scale", "lambda must be nonzero");
  }
  const int k = asm_.size();
  const cplx inv = 1.0 / lambda;
  std::vector<cplx> d(k, 1.0), dinv(k, 1.0);
  // g_λ⁻¹ ∂̄_V g_λ: entry (i,j) picks up (g_λ)_i⁻¹ (g_λ)_j.
  d[0] = inv;
  d[k - 1] = lambda;
  dinv[0] = lambda;
  dinv[k - 1] = inv;
  HiggsAssembly out = conjugate(asm_, d, dinv);
  out.phi = asm_.phi * lambda;
  const auto before = asm_.betas();
  const auto after = out.betas();
  for (std::size_t j = 0; j < before.size(); ++j) {
    const double scale = std::max(before[j].cwiseAbs().maxCoeff(), 1e-300);
    const double dev = (after[j] - before[j] * inv).cwiseAbs().maxCoeff() / scale;
    if (dev > 1e-12) {
      throw Error(ErrorKind::Shape, "higgs", "gauge_scale", "beta block did not scale by 1/lambda",
                  {{"deviation", dev}});
    }
  }
  return out;
}

HiggsAssembly lift_cstar(const HiggsAssembly& asm_, cplx a) {
  if (asm_.n != 4) {
    throw Error(ErrorKind::InvalidParameter, "higgs", "lift_cstar", "SO(Q_W) is trivial for n = 3");
  }
  if (a == cplx(0.0)) {
    throw Error(ErrorKind::InvalidParameter, "higgs", "lift_cstar", "a must be nonzero");
  }
  const cplx inv = 1.0 / a;
  // g ∂̄_V g⁻¹ with g = diag(1, a, a⁻¹, 1).
  return conjugate(asm_, {1.0, a, inv, 1.0}, {1.0, inv, a, 1.0});
}

double q_v_defect(const HiggsAssembly& asm_, const std::vector<cplx>& d) {
  const int k = asm_.size();
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const cplx v = d[i] * static_cast<double>(asm_.q_v(i, j)) * d[j];
      worst = std::max(worst, std::abs(v - static_cast<double>(asm_.q_v(i, j))));
    }
  }
  return worst;
}

bool hodge_flag(const HiggsAssembly& asm_, double tol) {
  if (asm_.n != 4) {
    throw Error(ErrorKind::InvalidParameter, "higgs", "hodge_flag", "Hodge criterion applies to n = 4");
  }
  const auto b = asm_.betas();
  return b[0].cwiseAbs().maxCoeff() < tol || b[1].cwiseAbs().maxCoeff() < tol;
}

StructureCheck check_structure(const HiggsAssembly& a) {
  StructureCheck s;
  const int k = a.size();
  const int last = k - 1;
  s.upper_triangular = true;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const BlockKind kind = a.blocks[i][j].kind;
      if ((i > j && kind != BlockKind::Zero) || (i == j && kind != BlockKind::Dbar)) {
        s.upper_triangular = false;
      }
    }
  }
  s.q_v_holomorphic = a.blocks[0][last].kind == BlockKind::Zero;
  for (int j = 1; j < last; ++j) {
    const Block& a1 = a.blocks[0][j];
    const Block& a3 = a.blocks[a.q_w_partner[j]][last];
    if (a1.kind != BlockKind::Form || a3.kind != BlockKind::Form || a1.form != a3.form ||
        a1.coeff != -a3.coeff) {
      s.q_v_holomorphic = false;
    }
    for (int i = 1; i < last; ++i) {
      if (i != j && a.blocks[i][j].kind != BlockKind::Zero) s.q_v_holomorphic = false;
    }
  }
  cplx iso = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) iso += a.phi[i] * static_cast<double>(a.q_v(i, j)) * a.phi[j];
  }
  s.isotropic_phi = iso == cplx(0.0);
  return s;
}

double block_distance(const HiggsAssembly& a, const HiggsAssembly& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::Shape, "higgs", "block_distance", "assemblies have different sizes");
  }
  double worst = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < a.size(); ++j) {
      if (a.blocks[i][j].kind != b.blocks[i][j].kind) return std::numeric_limits<double>::infinity();
      if (a.blocks[i][j].kind != BlockKind::Form) continue;
      const Eigen::VectorXcd va = a.block_values(i, j);
      const Eigen::VectorXcd vb = b.block_values(i, j);
      const double scale = std::max({va.cwiseAbs().maxCoeff(), vb.cwiseAbs().maxCoeff(), 1e-300});
      worst = std::max(worst, (va - vb).cwiseAbs().maxCoeff() / scale);
    }
  }
  return worst;
}

}  // namespace hypmin::higgs
