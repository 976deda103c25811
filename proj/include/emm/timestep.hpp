// Structure-preserving time integration of the reduced and augmented systems
// plus energy instrumentation and decay-rate fitting.
//
// The implicit midpoint rule (M - dt/2 N) X+ = (M + dt/2 N) X reproduces the
// quadratic energy balance exactly in the spatially discrete setting:
//   E(X+) - E(X) = dt * D((X + X+)/2)
// with D the dissipation quadratic form, so the energy law can be asserted
// to roundoff rather than to truncation order.
#pragma once

#include <Eigen/SparseLU>

#include "emm/assembly.hpp"

namespace emm {

struct StateReduced {
  Vector v;    // free velocity dofs
  Vector psi;  // stacked per-branch element strains
};

struct StateAD {
  Vector u1;   // free displacement dofs
  Vector u2;   // free velocity dofs
  Vector phi;  // stacked per-active-branch element viscous strains
};

struct EnergyReport {
  double t = 0.0;
  double E = 0.0;            // 1/2 |v|_rho^2 + 1/2 (C psi, psi)
  double Ebar = 0.0;         // E(X) + E(L X), the higher energy
  double Etilde = 0.0;       // Ebar + c_f * cross term, the amended energy
  double dissipation = 0.0;  // -sum_j eta_j |e[v] - dpsi_j/dt|^2  (<= 0)
  double cross = 0.0;        // (sum_j C_j psi_j, e[v])
};

Vector stack(const DiscreteOperators& ops, const StateReduced& s);
StateReduced unstack(const DiscreteOperators& ops, const Vector& x);
Vector stack(const DiscreteOperators& ops, const StateAD& s);
StateAD unstack_ad(const DiscreteOperators& ops, const Vector& x);

// Midpoint integrator on the generalized form; the factorization of
// (M - dt/2 N) is computed once and reused every step.
class MidpointIntegrator {
 public:
  // system: reduced (M_H, N) or augmented (M_A, N_A)
  enum class System { Reduced, Augmented };

  MidpointIntegrator(const DiscreteOperators& ops, double dt,
                     System system = System::Reduced);

  // Homogeneous step.
  Vector step(const Vector& x) const;
  // Step with a generalized forcing evaluated at the interval midpoint:
  // M dX/dt = N X + beta(t).
  Vector step(const Vector& x, const Vector& beta_mid) const;

  double dt() const { return dt_; }

 private:
  double dt_;
  SpMat rhs_;  // M + dt/2 N
  Eigen::SparseLU<SpMat> lu_;
};

// One-shot convenience wrappers (factorize per call; loops should hold a
// MidpointIntegrator).
StateReduced step_cn(const DiscreteOperators& ops, const StateReduced& s, double dt);
StateAD step_ad(const DiscreteOperators& ops, const StateAD& s, double dt);

// Energy instrumentation; x_dot must be the generator applied to the state
// (the time-differentiated system), as produced by apply_generator.
EnergyReport energy(const DiscreteOperators& ops, const StateReduced& s,
                    const StateReduced& s_dot, double t = 0.0);
EnergyReport energy(const DiscreteOperators& ops, const StateReduced& s, double t = 0.0);

// Least-squares fit of log E against t over the trailing `window` fraction of
// the series.  Returns the decay rate (E ~ e^{-rate t}) and the fit quality.
// Nonpositive entries are truncated at 1e-300.
struct DecayFit {
  double rate = 0.0;
  double r2 = 0.0;
};
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& e,
                   double window = 0.5);

}  // namespace emm
