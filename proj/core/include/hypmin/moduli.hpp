#pragma once

#include <complex>
#include <limits>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace hypmin::moduli {

enum class Verdict { Stable, StableDecomposable, Polystable, Unstable, OutOfRange, Undetermined };
const char* to_string(Verdict v);

/// Class flags from the harmonic parts of β. `margin` is the smallest ratio of
/// a nonzero class norm to the class tolerance (infinite when not measured).
struct ClassFlags {
  bool beta = false;          // [β] ≠ 0, n = 3
  bool beta1 = false;         // [β₁] ≠ 0, n = 4
  bool beta2 = false;         // [β₂] ≠ 0, n = 4
  bool proportional = false;  // harmonic parts proportional after normal form
  double margin = std::numeric_limits<double>::infinity();
};

struct Dims {
  int h1 = 0;
  int fiber_dim = 0;
  int total_dim = 0;
  int components = 0;
};

struct ModuliDescriptor {
  int genus = 2;
  int n = 3;
  int l = 0;
  ClassFlags class_flags;
  Verdict verdict = Verdict::Undetermined;
  bool decomposable = false;
  bool z2_boundary = false;  // the ℝH³ boundary copy, up to orientation reversal
  bool linearly_full = false;
  bool superminimal = false;
  bool generic_certificate = false;
  int w2 = 0;
  Dims dims;

  nlohmann::json to_json() const;
};

/// h¹(K⁻¹L) dimension 3(g−1) + l.
int h1(int g, int l);

/// Number of admissible Euler numbers, 4g − 5.
int component_count(int g);

bool admissible(int g, int l);

Dims dimensions(int g, int n, int l);

/// Required margin of a nonzero class norm over the class tolerance.
inline constexpr double kStableMargin = 10.0;

ModuliDescriptor classify(int g, int n, int l, const ClassFlags& flags, bool superminimal = false);

struct SecantCertificate {
  int h0_K_lambda = 0;
  int secant_dim = 0;
  int ambient_dim = 0;
  bool generic_ok = false;
  nlohmann::json to_json() const;
};

SecantCertificate secant_genericity(int g, int l);

struct OrbitNormalForm {
  Eigen::VectorXcd beta1;
  Eigen::VectorXcd beta2;
  double scale = 1.0;
};

/// Normal form of the ℂ× orbit a·(β₁,β₂) = (aβ₁, a⁻¹β₂) for harmonic parts
/// with weights: equal norms when both are nonzero, otherwise unit norm.
OrbitNormalForm orbit_normal_form(const Eigen::VectorXcd& beta1, const Eigen::VectorXcd& beta2,
                                  const Eigen::VectorXd& weight1, const Eigen::VectorXd& weight2);

/// Angular distance between two weighted vectors, in [0, π/2].
double angular_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, const Eigen::VectorXd& weight);

/// Proportionality threshold for the decomposable case.
inline constexpr double kProportionalAngle = 1e-6;

}  // namespace hypmin::moduli
