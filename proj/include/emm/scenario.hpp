// Scenario-driven front end: plain-text configs with explicit sections are
// parsed into a validated model, dispatched to the experiment runners, and
// reported as CSV series plus JSON summaries.  Fixed seeds give byte-identical
// outputs on one platform.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emm/assembly.hpp"

namespace emm {

enum class ScenarioKind { Identities, Decay, AdVsId, Spectral, LimitingAmplitude };

std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

struct MeshSpec {
  std::string file;  // when set, load from file; otherwise a rect mesh
  int nx = 8;
  int ny = 8;
  std::vector<std::string> dirichlet_sides = {"left"};  // of left/right/bottom/top, or "all"
};

struct BranchSpec {
  double eta = 1.0;
  std::vector<double> c_lower;  // m x m lower triangle, row-major (6 entries for m = 3)
  bool degenerate = false;
};

struct TimeBlock {
  double dt = 0.01;
  double T = 10.0;
  double t0 = 1.0;
};

struct FreqBlock {
  std::vector<double> kappa = {1.0};
  double sigma = 0.0;
  double mu = 1.0;
  std::string profile = "parabolic-x";  // parabolic-x | parabolic-y | uniform
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::Decay;
  std::uint64_t seed = 1;
  std::string out = "out";
  MeshSpec mesh;
  double rho = 1.0;
  std::vector<BranchSpec> branches;
  TimeBlock time;
  FreqBlock freq;
  int trials = 1000;                                       // identities
  std::vector<double> lambda_re = {0.1, 0.5, 1.0, 2.0, 10.0};  // spectral probes
  std::vector<double> lambda_im = {0.5, 1.0, 5.0};
};

// Thrown for malformed or invalid configs; the message carries file:line
// where applicable.  The CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario(const std::string& text, const std::string& path_for_errors = "config");
Scenario load_scenario(const std::string& path);
std::string serialize(const Scenario& s);  // canonical text form; parse(serialize(x)) == x
void validate(const Scenario& s);          // throws ConfigError

Mesh2D make_mesh(const MeshSpec& spec);
EmmMaterial make_material(const Scenario& s);
Vector make_profile_field(const Mesh2D& mesh, const std::string& profile);

struct RunOutcome {
  bool passed = true;
  std::vector<std::string> failures;
};

// Runs one scenario, writing artifacts into out_dir (created if missing).
RunOutcome run_scenario(const Scenario& s, const std::string& out_dir,
                        const std::string& config_hash);

// The randomized tensor-identity suite shared by the identities scenario and
// `check-identities`: elimination identity, shifted-inverse split, the
// Laplace-domain stress equality, and the Kelvin-Mandel contraction
// equivalence.  Returns per-family worst residuals in a JSON report.
struct IdentityResult {
  double elimination = 0.0;
  double resolvent_split = 0.0;
  double laplace_stress = 0.0;
  double contraction = 0.0;
  bool passed = false;
};
IdentityResult run_identity_suite(int trials, std::uint64_t seed);

}  // namespace emm
