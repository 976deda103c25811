#include "emm/timestep.hpp"

#include <cmath>

namespace emm {

Vector stack(const DiscreteOperators& ops, const StateReduced& s) {
  const DofMap& d = ops.dofs;
  if (s.v.size() != d.n_v || s.psi.size() != d.n_psi)
    throw std::invalid_argument("stack: state sizes do not match the dof map");
  Vector x(d.reduced_dim());
  x << s.v, s.psi;
  return x;
}

StateReduced unstack(const DiscreteOperators& ops, const Vector& x) {
  const DofMap& d = ops.dofs;
  return {x.head(d.n_v), x.tail(d.n_psi)};
}

Vector stack(const DiscreteOperators& ops, const StateAD& s) {
  const DofMap& d = ops.dofs;
  if (s.u1.size() != d.n_v || s.u2.size() != d.n_v || s.phi.size() != d.n_phi)
    throw std::invalid_argument("stack: augmented state sizes do not match the dof map");
  Vector x(d.augmented_dim());
  x << s.u1, s.u2, s.phi;
  return x;
}

StateAD unstack_ad(const DiscreteOperators& ops, const Vector& x) {
  const DofMap& d = ops.dofs;
  return {x.head(d.n_v), x.segment(d.n_v, d.n_v), x.tail(d.n_phi)};
}

MidpointIntegrator::MidpointIntegrator(const DiscreteOperators& ops, double dt, System system)
    : dt_(dt) {
  if (dt <= 0.0) throw std::invalid_argument("MidpointIntegrator: dt must be positive");
  const SpMat& m = system == System::Reduced ? ops.M_H : ops.M_A;
  const SpMat& n = system == System::Reduced ? ops.N : ops.N_A;
  SpMat lhs = SpMat(m - (dt / 2.0) * n);
  rhs_ = SpMat(m + (dt / 2.0) * n);
  lu_.compute(lhs);
  if (lu_.info() != Eigen::Success)
    throw std::runtime_error("MidpointIntegrator: factorization of the step matrix failed");
}

Vector MidpointIntegrator::step(const Vector& x) const {
  Vector y = lu_.solve(rhs_ * x);
  if (lu_.info() != Eigen::Success) throw std::runtime_error("MidpointIntegrator: solve failed");
  return y;
}

Vector MidpointIntegrator::step(const Vector& x, const Vector& beta_mid) const {
  Vector y = lu_.solve(Vector(rhs_ * x + dt_ * beta_mid));
  if (lu_.info() != Eigen::Success) throw std::runtime_error("MidpointIntegrator: solve failed");
  return y;
}

StateReduced step_cn(const DiscreteOperators& ops, const StateReduced& s, double dt) {
  MidpointIntegrator mi(ops, dt, MidpointIntegrator::System::Reduced);
  return unstack(ops, mi.step(stack(ops, s)));
}

StateAD step_ad(const DiscreteOperators& ops, const StateAD& s, double dt) {
  MidpointIntegrator mi(ops, dt, MidpointIntegrator::System::Augmented);
  return unstack_ad(ops, mi.step(stack(ops, s)));
}

EnergyReport energy(const DiscreteOperators& ops, const StateReduced& s,
                    const StateReduced& s_dot, double t) {
  const DofMap& d = ops.dofs;
  EnergyReport r;
  r.t = t;

  const auto quad = [&](const StateReduced& a) {
    return 0.5 * a.v.dot(ops.M_rho * a.v) + 0.5 * a.psi.dot(ops.M_psiC * a.psi);
  };
  r.E = quad(s);
  r.Ebar = r.E + quad(s_dot);

  // Dissipation as written in the energy law: -sum_j eta_j |e[v] - dpsi_j|^2
  // elementwise, with dpsi taken from the differentiated system.
  const Vector strain_rate_gap = ops.G_all * s.v - s_dot.psi;
  double diss = 0.0;
  for (int j = 0; j < d.n_branches; ++j) {
    if (ops.material.branch_degenerate(j)) continue;
    for (int e = 0; e < d.n_elems; ++e) {
      const double eta = ops.material.at(e).branches[j].eta;
      diss -= eta * ops.area(e) *
              strain_rate_gap.segment(d.psi_offset(j, e), d.m).squaredNorm();
    }
  }
  r.dissipation = diss;

  r.cross = s.psi.dot(ops.M_psiC * (ops.G_all * s.v));
  r.Etilde = r.Ebar + ops.c_f * r.cross;
  return r;
}

EnergyReport energy(const DiscreteOperators& ops, const StateReduced& s, double t) {
  const Vector xdot = apply_generator(ops, stack(ops, s));
  return energy(ops, s, unstack(ops, xdot), t);
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& e, double window) {
  if (t.size() != e.size() || t.size() < 2)
    throw std::invalid_argument("fit_decay: need matching series with at least two samples");
  if (window <= 0.0 || window > 1.0)
    throw std::invalid_argument("fit_decay: window must lie in (0, 1]");

  const std::size_t n = t.size();
  std::size_t first = static_cast<std::size_t>(std::floor((1.0 - window) * n));
  if (first > n - 2) first = n - 2;

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t count = 0;
  for (std::size_t i = first; i < n; ++i) {
    const double y = std::log(std::max(e[i], 1e-300));
    sx += t[i];
    sy += y;
    sxx += t[i] * t[i];
    sxy += t[i] * y;
    syy += y * y;
    ++count;
  }
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_decay: degenerate time samples");
  const double slope = (count * sxy - sx * sy) / denom;

  DecayFit fit;
  fit.rate = -slope;
  const double ss_tot = syy - sy * sy / count;
  const double ss_res = std::max(0.0, ss_tot - slope * slope * denom / count);
  // a centered sum at roundoff level means the series is constant: perfect fit
  fit.r2 = ss_tot <= 1e-10 * std::max(syy, 1e-300) ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

}  // namespace emm
