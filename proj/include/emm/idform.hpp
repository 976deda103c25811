// Relaxation (integrodifferential) formulation: the viscous strains are
// eliminated in favor of convolution integrals against the kernel
// exp(-(t-s) eta^{-1}C) eta^{-1}C applied to the strain history.
//
// The per-element accumulators are advanced by an exact-exponential
// recursion: with K = eta^{-1}C and a strain that is linear in time across
// the step,
//   h+ = e^{-dt K} h + (I - e^{-dt K}) e_old
//        + (dt K)^{-1}(dt K - I + e^{-dt K}) (e_new - e_old)
// reproduces the convolution integral to roundoff, in O(1) memory per step.
// This matches the augmented dynamics started from zero viscous strain.
#pragma once

#include "emm/assembly.hpp"

namespace emm {

struct StateID {
  Vector u;  // free displacement dofs
  Vector v;  // free velocity dofs
  Vector h;  // convolution accumulators, one Kelvin-Mandel vector per
             // element per non-degenerate branch (phi layout)
};

// sigma = sum_j C_j (e_now - h_j), degenerate branches contributing C_j e_now.
// h holds one accumulator per non-degenerate branch, in branch order.
Vector stress_id(const MaterialPoint& p, const Vector& e_now, const std::vector<Vector>& h);

// One exact-exponential recursion step for a single branch.
Vector convolve_step(const MaxwellBranch& branch, const Vector& h, const Vector& e_old,
                     const Vector& e_new, double dt);

// Second-order integrator: midpoint displacement/velocity update with
// trapezoidal stress and the exact accumulator recursion.  The linear system
// is factorized once per (operators, dt).
class IdIntegrator {
 public:
  IdIntegrator(const DiscreteOperators& ops, double dt);

  StateID initial_state(const Vector& u0, const Vector& v0) const;
  StateID step(const StateID& s) const;

  double dt() const { return dt_; }

 private:
  const DiscreteOperators& ops_;
  double dt_;
  // per (region, active branch): decay E, weights P (old) and Q (new)
  struct BranchUpdate {
    Matrix decay, w_old, w_new;
  };
  std::vector<std::vector<BranchUpdate>> update_;
  std::vector<Matrix> c_eff_;  // per region: sum_j C_j(I - w_new_j) + degenerate C_j
  Eigen::SimplicialLLT<SpMat> llt_;         // M_rho + dt^2/4 G^t W C_eff G

  Vector assemble_stress(const Vector& e, const Vector& h) const;  // per element, m per elem
};

struct IdTrajectory {
  std::vector<double> t;
  std::vector<Vector> u;  // sampled displacement
  StateID final_state;
};

// Runs the relaxation form from (u0, v0) with zero history to time T,
// sampling the displacement every `sample_stride` steps.
IdTrajectory run_id(const DiscreteOperators& ops, const Vector& u0, const Vector& v0, double dt,
                    double T, int sample_stride = 1);

}  // namespace emm
