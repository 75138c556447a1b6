#include "hypmin/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "hypmin/error.hpp"

namespace hypmin::moduli {

namespace {

double weighted_norm(const Eigen::VectorXcd& v, const Eigen::VectorXd& w) {
  return std::sqrt(w.dot(v.cwiseAbs2()));
}

void check_genus(int g, const char* op) {
  if (g < 2) throw Error(ErrorKind::InvalidParameter, "moduli", op, "genus must be at least 2", {{"genus", g}});
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "Stable";
    case Verdict::StableDecomposable: return "StableDecomposable";
    case Verdict::Polystable: return "Polystable";
    case Verdict::Unstable: return "Unstable";
    case Verdict::OutOfRange: return "OutOfRange";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "unknown";
}

int h1(int g, int l) { return 3 * (g - 1) + l; }

int component_count(int g) { return 4 * g - 5; }

bool admissible(int g, int l) { return std::abs(l) < 2 * (g - 1); }

Dims dimensions(int g, int n, int l) {
  Dims d;
  if (n == 3) {
    d.total_dim = 6 * (g - 1);
    d.components = 1;
    return d;
  }
  d.h1 = h1(g, l);
  d.fiber_dim = 10 * (g - 1);
  d.total_dim = 10 * (g - 1);
  d.components = component_count(g);
  return d;
}

SecantCertificate secant_genericity(int g, int l) {
  check_genus(g, "secant_genericity");
  if (l < 1 || l >= 2 * (g - 1)) {
    throw Error(ErrorKind::InvalidParameter, "moduli", "secant_genericity", "l must satisfy 1 <= l < 2(g-1)",
                {{"genus", g}, {"l", l}});
  }
  SecantCertificate c;
  c.h0_K_lambda = l + 3 * (g - 1);
  c.secant_dim = 2 * l - 1;
  c.ambient_dim = l + 3 * g - 4;
  c.generic_ok = c.secant_dim < c.ambient_dim;
  return c;
}

nlohmann::json SecantCertificate::to_json() const {
  return {{"h0_K_lambda", h0_K_lambda},
          {"secant_dim", secant_dim},
          {"ambient_dim", ambient_dim},
          {"generic_ok", generic_ok}};
}

ModuliDescriptor classify(int g, int n, int l, const ClassFlags& flags, bool superminimal) {
  check_genus(g, "classify");
  if (n != 3 && n != 4) {
    throw Error(ErrorKind::InvalidParameter, "moduli", "classify", "n must be 3 or 4", {{"n", n}});
  }
  ModuliDescriptor d;
  d.genus = g;
  d.n = n;
  d.l = n == 4 ? l : 0;
  d.class_flags = flags;
  d.superminimal = superminimal;
  d.dims = dimensions(g, n, d.l);
  d.w2 = n == 4 ? ((d.l % 2) + 2) % 2 : 0;
  const bool margin_ok = flags.margin >= kStableMargin;

  if (n == 3) {
    if (!flags.beta) {
      d.verdict = Verdict::Polystable;
      d.decomposable = true;
    } else {
      d.verdict = margin_ok ? Verdict::Stable : Verdict::Undetermined;
    }
  } else if (!admissible(g, d.l)) {
    d.verdict = Verdict::OutOfRange;
  } else if (d.l != 0) {
    // l ≥ 1 needs [β₂] ≠ 0; l ≤ −1 is the mirror with [β₁].
    const bool cls = d.l > 0 ? flags.beta2 : flags.beta1;
    if (!cls) {
      d.verdict = Verdict::Unstable;
    } else {
      d.generic_certificate = secant_genericity(g, std::abs(d.l)).generic_ok;
      d.verdict = margin_ok && d.generic_certificate ? Verdict::Stable : Verdict::Undetermined;
    }
  } else if (!flags.beta1 && !flags.beta2) {
    d.verdict = Verdict::Polystable;
    d.decomposable = true;
  } else if (!flags.beta1 || !flags.beta2) {
    d.verdict = Verdict::Unstable;
  } else if (!margin_ok) {
    d.verdict = Verdict::Undetermined;
  } else if (flags.proportional) {
    d.verdict = Verdict::StableDecomposable;
    d.decomposable = true;
    d.z2_boundary = true;
  } else {
    d.verdict = Verdict::Stable;
  }
  d.linearly_full = d.verdict == Verdict::Stable;
  return d;
}

nlohmann::json ModuliDescriptor::to_json() const {
  nlohmann::json j;
  j["genus"] = genus;
  j["n"] = n;
  if (n == 4) j["l"] = l;
  nlohmann::json flags;
  if (n == 3) {
    flags["beta"] = class_flags.beta;
  } else {
    flags["beta1"] = class_flags.beta1;
    flags["beta2"] = class_flags.beta2;
    flags["proportional"] = class_flags.proportional;
  }
  if (std::isfinite(class_flags.margin)) flags["margin"] = class_flags.margin;
  j["class_flags"] = flags;
  j["verdict"] = to_string(verdict);
  j["decomposable"] = decomposable;
  j["z2_boundary"] = z2_boundary;
  j["linearly_full"] = linearly_full;
  j["superminimal"] = superminimal;
  j["generic_certificate"] = generic_certificate;
  j["w2"] = w2;
  if (n == 4) {
    j["dims"] = {{"h1", dims.h1},
                 {"fiber_dim", dims.fiber_dim},
                 {"total_dim", dims.total_dim},
                 {"components", dims.components}};
  } else {
    j["dims"] = {{"total_dim", dims.total_dim}};
  }
  return j;
}

OrbitNormalForm orbit_normal_form(const Eigen::VectorXcd& beta1, const Eigen::VectorXcd& beta2,
                                  const Eigen::VectorXd& weight1, const Eigen::VectorXd& weight2) {
  if (beta1.size() != weight1.size() || beta2.size() != weight2.size()) {
    throw Error(ErrorKind::Shape, "moduli", "orbit_normal_form", "weights do not match the forms");
  }
  const double n1 = weighted_norm(beta1, weight1);
  const double n2 = weighted_norm(beta2, weight2);
  if (n1 == 0.0 && n2 == 0.0) {
    throw Error(ErrorKind::DegenerateOrbit, "moduli", "orbit_normal_form", "both classes vanish");
  }
  OrbitNormalForm out;
  if (n1 > 0.0 && n2 > 0.0) {
    out.scale = std::sqrt(n2 / n1);
    out.beta1 = beta1 * out.scale;
    out.beta2 = beta2 / out.scale;
  } else if (n1 > 0.0) {
    out.scale = 1.0 / n1;
    out.beta1 = beta1 * out.scale;
    out.beta2 = beta2;
  } else {
    out.scale = 1.0 / n2;
    out.beta1 = beta1;
    out.beta2 = beta2 * out.scale;
  }
  return out;
}

double angular_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, const Eigen::VectorXd& weight) {
  const double na = weighted_norm(a, weight);
  const double nb = weighted_norm(b, weight);
  if (na == 0.0 || nb == 0.0) return std::acos(0.0);
  const std::complex<double> inner =
      (b.conjugate().array() * weight.array().cast<std::complex<double>>() * a.array()).sum();
  const Eigen::VectorXcd r = a - b * (inner / (nb * nb));
  return std::asin(std::min(1.0, weighted_norm(r, weight) / na));
}

}  // namespace hypmin::moduli
