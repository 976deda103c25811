// Finite-dimensional checks of the operator-theoretic structure: the
// dissipativity identity, resolvent lower bounds for the reduced generator in
// its energy metric, invertibility on the imaginary axis, and the quasi-static
// kernel of the augmented generator.
#pragma once

#include <optional>

#include "emm/timestep.hpp"

namespace emm {

// || N + N^t + 2 diag(0, D_psi) ||_max / || N ||_max; the generalized-form
// statement of the dissipativity identity, exact matrix arithmetic.
double dissipativity_residual(const DiscreteOperators& ops);

// Smallest eigenvalue over the diagonal blocks of D_psi relative to the block
// scale (>= 0 up to roundoff).
double dissipation_smallest_eigenvalue(const DiscreteOperators& ops);

// Smallest singular value of (lambda I - L) measured in the energy metric:
//   smin = min_X ||(lambda I - L) X||_H / ||X||_H.
// Dense path (Cholesky congruence + SVD) below `dense_limit` dofs, inverse
// power iteration on the factorized shifted operator above it.
double smin_energy_metric(const DiscreteOperators& ops, Complex lambda, int dense_limit = 6000);

struct ResolventProbe {
  Complex lambda;
  double smin_H = 0.0;
  double bound_claimed = 0.0;
  bool satisfied = false;
  std::optional<double> nearest_eigenvalue_distance;  // set when lambda hits the spectrum
};

// Claimed bounds:  real lambda > 0: smin >= lambda; lambda = 0 and, when
// eps2_hat is supplied, real lambda > 0: smin >= sqrt(lambda^2 + eps2_hat);
// imaginary lambda: smin > 0 (invertibility).  Tolerance 1e-8 on comparisons.
ResolventProbe probe_resolvent(const DiscreteOperators& ops, Complex lambda,
                               std::optional<double> eps2_hat = std::nullopt,
                               double tol = 1e-8);

// eps2_hat := smin(0)^2 / 2, the measured lower-bound constant for ||L X||_H.
double measure_eps2(const DiscreteOperators& ops);

// Quasi-static kernel companion of the augmented generator.  Solves the
// mixed elliptic problem driven by the seed viscous strain,
//   sum_j (C_j e[u1], e[w]) = sum_active (C_j seed_j, e[w])  for all w,
// then returns U = (u1, 0, e[u1] per branch), which the augmented generator
// annihilates identically.  Requires a material without degenerate branches
// (an elastic unit removes the kernel) and a seed with a nonzero elliptic
// projection.
StateAD build_stationary(const DiscreteOperators& ops, const Vector& phi_seed);

// || A U ||_2 / (||A||_inf ||U||_2) with A the augmented generator in
// generalized form.
double stationary_residual(const DiscreteOperators& ops, const StateAD& u);

}  // namespace emm
