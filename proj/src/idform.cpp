#include "emm/idform.hpp"

#include <cmath>

namespace emm {

namespace {

// (z - 1 + e^{-z}) / z with a series branch below z = 0.01, where the direct
// expression cancels.
double phi_weight(double z) {
  if (std::abs(z) >= 0.01) return (z - 1.0 + std::exp(-z)) / z;
  double term = z / 2.0;  // k = 2 term of sum (-1)^k z^{k-1} / k!
  double sum = term;
  for (int k = 3; k <= 12; ++k) {
    term *= -z / k;
    sum += term;
  }
  return sum;
}

}  // namespace

Vector stress_id(const MaterialPoint& p, const Vector& e_now, const std::vector<Vector>& h) {
  const int m = p.voigt_m();
  if (e_now.size() != m) throw std::invalid_argument("stress_id: strain length mismatch");
  Vector sigma = Vector::Zero(m);
  std::size_t a = 0;
  for (const auto& b : p.branches) {
    if (b.degenerate) {
      sigma += b.c * e_now;
    } else {
      if (a >= h.size()) throw std::invalid_argument("stress_id: missing accumulator");
      sigma += b.c * (e_now - h[a]);
      ++a;
    }
  }
  if (a != h.size()) throw std::invalid_argument("stress_id: extra accumulators");
  return sigma;
}

Vector convolve_step(const MaxwellBranch& branch, const Vector& h, const Vector& e_old,
                     const Vector& e_new, double dt) {
  if (branch.degenerate)
    throw std::runtime_error("convolve_step: degenerate branch carries no accumulator");
  if (dt <= 0.0) throw std::invalid_argument("convolve_step: dt must be positive");
  const Matrix k = branch.relaxation_rate();
  const Matrix decay = sym_exp(k, dt);
  const Matrix s = sym_apply(k, [dt](double x) { return phi_weight(dt * x); });
  return decay * h + (Matrix::Identity(k.rows(), k.cols()) - decay) * e_old +
         s * (e_new - e_old);
}

IdIntegrator::IdIntegrator(const DiscreteOperators& ops, double dt) : ops_(ops), dt_(dt) {
  if (dt <= 0.0) throw std::invalid_argument("IdIntegrator: dt must be positive");
  const DofMap& d = ops.dofs;
  const int m = d.m;

  update_.resize(ops.material.regions.size());
  c_eff_.reserve(ops.material.regions.size());
  for (std::size_t r = 0; r < ops.material.regions.size(); ++r) {
    const MaterialPoint& p = ops.material.regions[r];
    Matrix c_eff = Matrix::Zero(m, m);
    for (int a = 0; a < d.n_active; ++a) {
      const MaxwellBranch& b = p.branches[d.active_branches[a]];
      const Matrix k = b.relaxation_rate();
      BranchUpdate up;
      up.decay = sym_exp(k, dt);
      up.w_new = sym_apply(k, [dt](double x) { return phi_weight(dt * x); });
      up.w_old = Matrix::Identity(m, m) - up.decay - up.w_new;
      c_eff += b.c * (Matrix::Identity(m, m) - up.w_new);
      update_[r].push_back(std::move(up));
    }
    for (const auto& b : p.branches)
      if (b.degenerate) c_eff += b.c;
    c_eff_.push_back(c_eff);
  }

  std::vector<Eigen::Triplet<double>> tw;
  for (int e = 0; e < d.n_elems; ++e) {
    const int r = ops.material.element_region.empty() ? 0 : ops.material.element_region[e];
    const Matrix block = ops.area(e) * c_eff_[r];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (block(i, j) != 0.0) tw.emplace_back(m * e + i, m * e + j, block(i, j));
  }
  SpMat wc(m * d.n_elems, m * d.n_elems);
  wc.setFromTriplets(tw.begin(), tw.end());
  SpMat lhs = SpMat(ops.M_rho + (dt * dt / 4.0) * SpMat(ops.G.transpose() * wc * ops.G));
  llt_.compute(lhs);
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("IdIntegrator: factorization of the step matrix failed");
}

StateID IdIntegrator::initial_state(const Vector& u0, const Vector& v0) const {
  const DofMap& d = ops_.dofs;
  if (u0.size() != d.n_v || v0.size() != d.n_v)
    throw std::invalid_argument("IdIntegrator: initial data sizes do not match the dof map");
  return {u0, v0, Vector::Zero(d.n_phi)};
}

Vector IdIntegrator::assemble_stress(const Vector& e, const Vector& h) const {
  const DofMap& d = ops_.dofs;
  const int m = d.m;
  Vector sigma = Vector::Zero(m * d.n_elems);
  for (int el = 0; el < d.n_elems; ++el) {
    const MaterialPoint& p = ops_.material.at(el);
    Vector s = Vector::Zero(m);
    for (int a = 0; a < d.n_active; ++a) {
      const MaxwellBranch& b = p.branches[d.active_branches[a]];
      s += b.c * (e.segment(m * el, m) - h.segment(d.phi_offset(a, el), m));
    }
    for (const auto& b : p.branches)
      if (b.degenerate) s += b.c * e.segment(m * el, m);
    sigma.segment(m * el, m) = s;
  }
  return sigma;
}

StateID IdIntegrator::step(const StateID& s) const {
  const DofMap& d = ops_.dofs;
  const int m = d.m;

  const Vector e_old = ops_.G * s.u;
  const Vector sigma_old = assemble_stress(e_old, s.h);
  const Vector e_half = e_old + (dt_ / 2.0) * (ops_.G * s.v);

  // Memory part of the new stress and the effective-modulus part at e_half.
  Vector forcing = Vector::Zero(m * d.n_elems);
  for (int el = 0; el < d.n_elems; ++el) {
    const int r = ops_.material.element_region.empty() ? 0 : ops_.material.element_region[el];
    const MaterialPoint& p = ops_.material.regions[r];
    Vector q = Vector::Zero(m);
    for (int a = 0; a < d.n_active; ++a) {
      const MaxwellBranch& b = p.branches[d.active_branches[a]];
      const BranchUpdate& up = update_[r][a];
      q += b.c * (up.decay * s.h.segment(d.phi_offset(a, el), m) +
                  up.w_old * e_old.segment(m * el, m));
    }
    forcing.segment(m * el, m) =
        sigma_old.segment(m * el, m) + c_eff_[r] * e_half.segment(m * el, m) - q;
  }
  for (int el = 0; el < d.n_elems; ++el) forcing.segment(m * el, m) *= ops_.area(el);

  StateID out;
  out.v = llt_.solve(Vector(ops_.M_rho * s.v - (dt_ / 2.0) * (ops_.G.transpose() * forcing)));
  out.u = s.u + (dt_ / 2.0) * (s.v + out.v);

  const Vector e_new = ops_.G * out.u;
  out.h.resize(d.n_phi);
  for (int el = 0; el < d.n_elems; ++el) {
    const int r = ops_.material.element_region.empty() ? 0 : ops_.material.element_region[el];
    for (int a = 0; a < d.n_active; ++a) {
      const BranchUpdate& up = update_[r][a];
      out.h.segment(d.phi_offset(a, el), m) =
          up.decay * s.h.segment(d.phi_offset(a, el), m) +
          up.w_old * e_old.segment(m * el, m) + up.w_new * e_new.segment(m * el, m);
    }
  }
  return out;
}

IdTrajectory run_id(const DiscreteOperators& ops, const Vector& u0, const Vector& v0, double dt,
                    double T, int sample_stride) {
  IdIntegrator integ(ops, dt);
  StateID s = integ.initial_state(u0, v0);
  const int nsteps = static_cast<int>(std::llround(T / dt));

  IdTrajectory traj;
  traj.t.push_back(0.0);
  traj.u.push_back(s.u);
  for (int k = 1; k <= nsteps; ++k) {
    s = integ.step(s);
    if (k % sample_stride == 0 || k == nsteps) {
      traj.t.push_back(k * dt);
      traj.u.push_back(s.u);
    }
  }
  traj.final_state = std::move(s);
  return traj;
}

}  // namespace emm
