// Extended Maxwell materials: per-branch stiffness/viscosity pairs plus the
// closed-form rheological objects built from them (relaxation kernels, the
// complex modulus, and the split frequency-domain modulus).
//
// A branch with the `degenerate` flag set is a purely elastic unit (the
// extended standard-linear-solid case): eta^{-1}C is treated as absent, the
// branch carries no augmented internal variable, and it contributes C
// directly to the stress.
#pragma once

#include <optional>
#include <vector>

#include "emm/voigt.hpp"

namespace emm {

struct MaxwellBranch {
  Matrix c;                 // m x m Kelvin-Mandel stiffness (Pa)
  double eta = 1.0;         // dashpot viscosity (Pa s)
  bool degenerate = false;  // elastic unit: eta^{-1}C treated as absent

  Matrix relaxation_rate() const { return degenerate ? Matrix::Zero(c.rows(), c.cols()) : Matrix(c / eta); }
};

// Pointwise material record: density plus the branch list.
struct MaterialPoint {
  double rho = 1.0;  // kg/m^3
  std::vector<MaxwellBranch> branches;

  int voigt_m() const { return branches.empty() ? 0 : static_cast<int>(branches[0].c.rows()); }
};

// Material field over a mesh: piecewise constant per element.  An empty
// element_region means region 0 everywhere.  All regions must share the same
// branch count and degeneracy pattern so the internal-variable layout is
// uniform across the mesh.
struct EmmMaterial {
  std::vector<MaterialPoint> regions;
  std::vector<int> element_region;

  static EmmMaterial uniform(MaterialPoint p) { return {{std::move(p)}, {}}; }

  const MaterialPoint& at(int element) const {
    return regions[element_region.empty() ? 0 : element_region[element]];
  }
  int branch_count() const { return static_cast<int>(regions.at(0).branches.size()); }
  bool branch_degenerate(int j) const { return regions.at(0).branches.at(j).degenerate; }
  int voigt_m() const { return regions.at(0).voigt_m(); }
};

struct MaterialValidation {
  double alpha0_rel = 1e-8;  // strong convexity: lmin(C) >= alpha0_rel * lmax(C)
  double beta0 = 0.0;        // eta > beta0
  double gamma0 = 0.0;       // rho > gamma0
};

// Throws with a message naming the region/branch on the first violation.
void validate(const EmmMaterial& mat, const MaterialValidation& rules = {});

// C = sum_j C_j (degenerate branches included).
Matrix aggregate_stiffness(const MaterialPoint& p);

// Largest sigma margin such that sigma I + eta_j^{-1}C_j stays positive with
// margin for all branches: 0.9 * min_j lmin(eta_j^{-1}C_j), or 0 when any
// branch is degenerate.
double sigma_lower_margin(const MaterialPoint& p);

// exp(-t eta^{-1}C) eta^{-1}C.  Degenerate branches carry no kernel.
Matrix relaxation_kernel(const MaxwellBranch& branch, double t);

// lambda sum_j (lambda I + eta_j^{-1}C_j)^{-1} C_j, degenerate branches
// contributing C_j.  Throws naming the branch when lambda hits its spectrum.
MatrixC complex_modulus(const MaterialPoint& p, Complex lambda);
Matrix complex_modulus(const MaterialPoint& p, double lambda);

// Real/imaginary parts of the frequency-domain modulus at lambda = sigma + i mu,
// complex_modulus(lambda) = lambda * (re + i im).  With K_j = sigma I + eta_j^{-1}C_j:
//   re = sum_j C_j K_j (mu^2 I + K_j^2)^{-1}
//   im = -mu sum_j C_j (mu^2 I + K_j^2)^{-1}
// Requires every K_j positive definite; throws reporting the margin violation
// otherwise.
struct ModulusSplit {
  Matrix re;
  Matrix im;
};
ModulusSplit harmonic_modulus_split(const MaterialPoint& p, double sigma, double mu);

// (lambda I + eta_j^{-1}C_j)^{-1} C_j for one branch; degenerate branches give
// lambda^{-1} C_j.
MatrixC branch_resolvent_times_c(const MaxwellBranch& branch, Complex lambda);

}  // namespace emm
