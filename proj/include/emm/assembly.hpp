// Finite-element assembly of the discrete operators for the reduced and
// augmented first-order systems on a 2-D triangle mesh.
//
// Discretization: vector P1 velocities/displacements on nodes, internal
// strain variables piecewise constant per element (one Kelvin-Mandel vector
// per element per branch).  The symmetric gradient of a P1 field is constant
// per element, so all internal-variable inner products are integrated
// exactly by the one-point rule; the velocity mass matrix uses the exact P1
// formula.  Dirichlet conditions are imposed by dof elimination, which keeps
// the energy metric positive definite and the dissipation identity exact.
//
// Both generators are stored in generalized form M dX/dt = N X:
//   reduced, X = (v, psi):        M_H = diag(M_rho, M_psiC)
//       N = [ 0            -G_all^t M_psiC ]
//           [ M_psiC G_all    -D_psi       ]
//   augmented, X = (u1, u2, phi): M_A = diag(M_rho, M_rho, W_phi)
//       N_A = [ 0        M_rho   0          ]
//             [ -K_all   0       G_act^t M_phiC ]
//             [ WK G_act 0       -WK        ]
// so the dissipativity identity N + N^t = -2 diag(0, D_psi) holds as exact
// matrix arithmetic.  The reduced internal variables cover ALL branches
// (degenerate branches evolve with zero relaxation rate); the augmented
// viscous strains phi exist only for non-degenerate branches.
#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>

#include "emm/material.hpp"
#include "emm/mesh.hpp"

namespace emm {

using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<Complex>;

struct DofMap {
  int n_nodes = 0;
  int n_elems = 0;
  int n_branches = 0;  // all branches (reduced psi layout)
  int n_active = 0;    // non-degenerate branches (augmented phi layout)
  int m = 3;           // Kelvin-Mandel length

  std::vector<int> free_index;      // size 2*n_nodes, -1 when constrained
  std::vector<int> free_dofs;       // free full-dof indices, ascending
  std::vector<int> constrained_dofs;
  std::vector<int> active_branches; // indices of non-degenerate branches

  int n_v = 0;    // free velocity dofs
  int n_psi = 0;  // n_branches * n_elems * m
  int n_phi = 0;  // n_active * n_elems * m

  int reduced_dim() const { return n_v + n_psi; }
  int augmented_dim() const { return 2 * n_v + n_phi; }
  int psi_offset(int branch, int elem) const { return (branch * n_elems + elem) * m; }
  int phi_offset(int active, int elem) const { return (active * n_elems + elem) * m; }
};

struct DiscreteOperators {
  Mesh2D mesh;
  EmmMaterial material;
  DofMap dofs;

  Vector area;  // per element

  SpMat M_rho_full;  // 2N x 2N consistent mass with density
  SpMat M_rho;       // free x free
  SpMat M_rho_fc;    // free x constrained (boundary-motion coupling)

  SpMat G_full;   // (m*E) x 2N element symmetric gradient, Kelvin-Mandel rows
  SpMat G;        // (m*E) x n_v
  SpMat G_c;      // (m*E) x n_c

  SpMat M_psiC;   // n_psi block diagonal: area_e C_j
  SpMat D_psi;    // n_psi block diagonal: area_e eta_j^{-1} C_j^2 (zero when degenerate)
  SpMat K_psi;    // n_psi block diagonal: eta_j^{-1} C_j (zero when degenerate)
  SpMat G_all;    // n_psi x n_v, G stacked per branch
  SpMat G_all_c;  // n_psi x n_c

  SpMat M_H;  // diag(M_rho, M_psiC)
  SpMat N;    // reduced generalized right-hand side

  SpMat K_all;  // sum_j G^t W C_j G on free dofs (aggregate elastic stiffness)

  SpMat M_A;  // diag(M_rho, M_rho, W_phi)
  SpMat N_A;  // augmented generalized right-hand side

  SpMat conjugation;  // reduced_dim x augmented_dim: (u1,u2,phi) -> (v,psi)

  double c_f = 0.0;  // corrector weight for the amended energy (logged)

  // Cached M_rho factorization for generator applications.
  std::shared_ptr<Eigen::SimplicialLLT<SpMat>> M_rho_llt;

  const MaterialPoint& point(int elem) const { return material.at(elem); }
};

// Assembles everything above.  The two names expose the reduced and the
// augmented view of the same operator set.
DiscreteOperators assemble_reduced(const Mesh2D& mesh, const EmmMaterial& material);
DiscreteOperators assemble_ad(const Mesh2D& mesh, const EmmMaterial& material);

// Symmetric bilinear-form pair of the frequency-domain problem at
// lambda = sigma + i mu on the full dof set:
//   B1 = G^t W re G + sigma M_rho,   B2 = G^t W im G + mu M_rho
// with (re, im) the split harmonic modulus per element.
struct BilinearForms {
  SpMat B1_full, B2_full;  // 2N x 2N
  SpMat B1, B2;            // free x free
  SpMat B1_fc, B2_fc;      // free x constrained
};
BilinearForms assemble_B(const DiscreteOperators& ops, double sigma, double mu);

// G^t W B_lambda G on free dofs for real lambda > 0 (B_lambda the real
// complex modulus); the energy metric of the frequency-domain wave block.
SpMat assemble_wave_stiffness(const DiscreteOperators& ops, double lambda);

// Residual of the skew-adjointness of the frequency-domain wave generator
//   [ 0 I; -M_rho^{-1} K_Blambda 0 ]
// in its energy metric diag(K_Blambda, M_rho): exact zero up to roundoff.
double wave_generator_skew_residual(const DiscreteOperators& ops, double lambda);

// Coordinate-format text dump (row col value per line) for debugging.
void dump_coordinate(const SpMat& a, const std::string& path);

// Helpers shared by the solvers.
Vector apply_generator(const DiscreteOperators& ops, const Vector& x);     // M_H^{-1} N x
Vector apply_generator_ad(const DiscreteOperators& ops, const Vector& x);  // M_A^{-1} N_A x

}  // namespace emm
