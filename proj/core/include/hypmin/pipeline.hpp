#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hypmin/germsolve.hpp"
#include "hypmin/hypmesh.hpp"
#include "hypmin/invariants.hpp"

namespace hypmin::pipeline {

enum class Target { RH3, RH4 };
enum class DataKind { Zero, BasisElement, Random, File, Manufactured };

const char* to_string(Target t);
const char* to_string(DataKind k);
Target parse_target(const std::string& s);
DataKind parse_data_kind(const std::string& s);

/// Germ data. For rh3 (index, amplitude) select q; for rh4 they select θ₂ and
/// (kind1, index1, amplitude1) select θ₁, with kind1 defaulting to kind.
/// Random data prescribes seeded values at the first quotient vertices, so the
/// datum is the same across resolutions.
struct DataSpec {
  DataKind kind = DataKind::Zero;
  std::optional<DataKind> kind1;
  int index = 0;
  double amplitude = 1.0;
  int index1 = 0;
  double amplitude1 = 0.0;
  std::string path;   // q or θ₂ section file
  std::string path1;  // θ₁ section file
  double u_star = 0.1;
};

struct Tolerances {
  double identity_scale = 10.0;   // C in C·h²·(1 + max‖II‖⁴)
  double class_tol = 0.05;        // relative harmonic norm of a trivial class
  double superminimal_tol = 1e-10;
  double quadrature_tol = 1e-6;   // slack on the area bound
};

struct RunConfig {
  int genus = 2;
  int resolution = 5;
  Target target = Target::RH4;
  int l = 1;
  DataSpec data;
  germ::SolverOptions solver;
  Tolerances tolerances;
  std::uint64_t seed = 0x5eed;
  std::string output_dir;
  bool write_fields = true;

  nlohmann::json to_json() const;
  /// Overlays the keys present in j onto base.
  static RunConfig from_json(const nlohmann::json& j, const RunConfig& base);
  static RunConfig from_json(const nlohmann::json& j);
  /// Checks every numeric field against the module preconditions.
  void validate() const;
};

/// u* = −A + (A/20)(1 − s²)⁴ with s = ρ / (0.95 · inradius) about the centre,
/// and the forcing t = e^{2u*}(Δu* − e^{2u*} + 1) with the exact Δu*.
struct Manufactured {
  Eigen::VectorXd u_star;
  Eigen::VectorXd forcing;
};
Manufactured manufactured_solution(const mesh::SurfaceMesh& mesh, double amplitude);

enum class Stage { Solve, Invariants, Full };

struct RunResult {
  nlohmann::json report;
  bool passed = false;
  std::map<std::string, bool> checks;
  std::shared_ptr<const mesh::SurfaceMesh> mesh;
  std::optional<germ::GermSolution> solution;
  std::optional<invariants::InvariantReport> invariants;
  std::optional<invariants::GermData> data;
};

/// mesh → bundles → solve → invariants → higgs → moduli. Module errors end
/// the run with a "failed_at" entry; files are written when output_dir is set.
RunResult run(const RunConfig& config, Stage stage = Stage::Full);

/// Writes report.json and fields.csv for a finished run into dir.
void write_outputs(const RunResult& result, const std::string& dir);

enum class Axis { Resolution, Amplitude, L, BasisIndex };
const char* to_string(Axis a);
Axis parse_axis(const std::string& s);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  double area = 0.0;
  double euler_integral = 0.0;
  double max_identity_residual = 0.0;
  std::string verdict;
  std::string error;
  double mesh_size = 0.0;
  double mms_error = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string csv() const;
};

/// One run per value; amplitude values scale both data amplitudes. Failures
/// are recorded per row and the sweep continues.
SweepResult sweep(const RunConfig& base, Axis axis, const std::vector<double>& values);

}  // namespace hypmin::pipeline
