#include "emm/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace emm {

namespace {

double max_abs(const SpMat& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double inf_norm(const SpMat& a) {
  Vector row_sum = Vector::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) row_sum(it.row()) += std::abs(it.value());
  return a.rows() == 0 ? 0.0 : row_sum.maxCoeff();
}

SpMatC complex_shifted(const DiscreteOperators& ops, Complex lambda) {
  // lambda M_H - N
  SpMatC a = ops.M_H.cast<Complex>() * lambda;
  a -= ops.N.cast<Complex>();
  a.makeCompressed();
  return a;
}

double smin_dense(const DiscreteOperators& ops, Complex lambda) {
  const int n = ops.dofs.reduced_dim();
  const Matrix mh = Matrix(ops.M_H);
  Eigen::LLT<Matrix> llt(mh);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("smin: energy metric is not positive definite");
  const Matrix l = llt.matrixL();

  if (lambda.imag() == 0.0) {
    Matrix a = lambda.real() * mh - Matrix(ops.N);
    Matrix z = l.triangularView<Eigen::Lower>().solve(a);
    Matrix t = l.triangularView<Eigen::Lower>().solve(Matrix(z.transpose())).transpose();
    Eigen::BDCSVD<Matrix> svd(t);
    return svd.singularValues()(n - 1);
  }
  const MatrixC lc = l.cast<Complex>();
  MatrixC a = lambda * mh.cast<Complex>() - Matrix(ops.N).cast<Complex>();
  MatrixC z = lc.triangularView<Eigen::Lower>().solve(a);
  MatrixC t = lc.triangularView<Eigen::Lower>().solve(MatrixC(z.transpose())).transpose();
  Eigen::BDCSVD<MatrixC> svd(t);
  return svd.singularValues()(n - 1);
}

double smin_iterative(const DiscreteOperators& ops, Complex lambda) {
  const int n = ops.dofs.reduced_dim();
  SpMatC a = complex_shifted(ops, lambda);
  Eigen::SparseLU<SpMatC> lu(a);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("smin: shifted operator is singular");

  const SpMatC mh = ops.M_H.cast<Complex>();
  VectorC x(n);
  for (int i = 0; i < n; ++i) x(i) = Complex(1.0 + 0.2 * std::sin(0.7 * i + 1.0), 0.1 * std::cos(1.3 * i));
  double smin = 0.0;
  for (int it = 0; it < 500; ++it) {
    // z = A^{-1} M A^{-H} M x  (inverse iteration on the normal-equations pencil)
    VectorC z = lu.solve(VectorC(mh * lu.adjoint().solve(VectorC(mh * x))));
    const Complex num = (z.adjoint() * (mh * x))(0, 0);
    const Complex den = (z.adjoint() * (mh * z))(0, 0);
    const double theta = std::abs(num) / std::abs(den);
    const double s = std::sqrt(theta);
    z /= std::sqrt(std::abs(den));
    const bool converged = it > 3 && std::abs(s - smin) <= 1e-10 * std::max(s, 1e-300);
    x = z;
    smin = s;
    if (converged) break;
  }
  return smin;
}

std::optional<double> nearest_eigenvalue_distance(const DiscreteOperators& ops, Complex lambda) {
  if (ops.dofs.reduced_dim() > 3000) return std::nullopt;
  Eigen::GeneralizedEigenSolver<Matrix> ges(Matrix(ops.N), Matrix(ops.M_H));
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ges.alphas().size(); ++i) {
    if (std::abs(ges.betas()(i)) < 1e-300) continue;
    const Complex ev = ges.alphas()(i) / ges.betas()(i);
    best = std::min(best, std::abs(ev - lambda));
  }
  return best;
}

}  // namespace

double dissipativity_residual(const DiscreteOperators& ops) {
  const DofMap& d = ops.dofs;
  std::vector<Eigen::Triplet<double>> td;
  for (int k = 0; k < ops.D_psi.outerSize(); ++k)
    for (SpMat::InnerIterator it(ops.D_psi, k); it; ++it)
      td.emplace_back(d.n_v + static_cast<int>(it.row()), d.n_v + static_cast<int>(it.col()),
                      2.0 * it.value());
  SpMat dfull(d.reduced_dim(), d.reduced_dim());
  dfull.setFromTriplets(td.begin(), td.end());
  const SpMat s = SpMat(ops.N + SpMat(ops.N.transpose()) + dfull);
  return max_abs(s) / std::max(max_abs(ops.N), 1e-300);
}

double dissipation_smallest_eigenvalue(const DiscreteOperators& ops) {
  const DofMap& d = ops.dofs;
  const Matrix dd = Matrix(ops.D_psi);
  double lmin = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (int j = 0; j < d.n_branches; ++j)
    for (int e = 0; e < d.n_elems; ++e) {
      const Matrix block = dd.block(d.psi_offset(j, e), d.psi_offset(j, e), d.m, d.m);
      lmin = std::min(lmin, smallest_eigenvalue(block));
      scale = std::max(scale, block.cwiseAbs().maxCoeff());
    }
  return lmin / std::max(scale, 1e-300);
}

double smin_energy_metric(const DiscreteOperators& ops, Complex lambda, int dense_limit) {
  // Dense SVD memory and time grow fast; iterate past ~2.5k dofs regardless
  // of the caller's limit.
  const int limit = std::min(dense_limit, 2500);
  return ops.dofs.reduced_dim() <= limit ? smin_dense(ops, lambda)
                                         : smin_iterative(ops, lambda);
}

ResolventProbe probe_resolvent(const DiscreteOperators& ops, Complex lambda,
                               std::optional<double> eps2_hat, double tol) {
  ResolventProbe probe;
  probe.lambda = lambda;
  probe.smin_H = smin_energy_metric(ops, lambda);

  const double spectral_scale = std::max(max_abs(ops.N) / std::max(max_abs(ops.M_H), 1e-300), 1.0);
  if (probe.smin_H <= 1e-12 * spectral_scale)
    probe.nearest_eigenvalue_distance = nearest_eigenvalue_distance(ops, lambda);

  const double sigma = lambda.real();
  if (sigma > tol) {
    probe.bound_claimed = eps2_hat ? std::sqrt(sigma * sigma + *eps2_hat) : sigma;
    probe.satisfied = probe.smin_H >= probe.bound_claimed - tol;
  } else {
    probe.bound_claimed = 0.0;
    probe.satisfied = probe.smin_H > tol && !probe.nearest_eigenvalue_distance;
  }
  return probe;
}

double measure_eps2(const DiscreteOperators& ops) {
  const double s0 = smin_energy_metric(ops, Complex(0.0, 0.0));
  return 0.5 * s0 * s0;
}

StateAD build_stationary(const DiscreteOperators& ops, const Vector& phi_seed) {
  const DofMap& d = ops.dofs;
  if (d.n_active != d.n_branches)
    throw std::runtime_error(
        "build_stationary: degenerate branches remove the quasi-static kernel");
  if (phi_seed.size() != d.n_phi)
    throw std::invalid_argument("build_stationary: seed size does not match the phi layout");
  if (phi_seed.norm() == 0.0)
    throw std::invalid_argument("build_stationary: seed must be nonzero");

  Eigen::SimplicialLLT<SpMat> llt(ops.K_all);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("build_stationary: elliptic block is singular (broken Dirichlet set)");

  StateAD u;
  u.u1 = llt.solve(Vector(ops.G_all.transpose() * (ops.M_psiC * phi_seed)));
  u.u2 = Vector::Zero(d.n_v);
  u.phi = ops.G_all * u.u1;
  if (u.u1.norm() == 0.0)
    throw std::runtime_error("build_stationary: seed is orthogonal to the elliptic range");
  return u;
}

double stationary_residual(const DiscreteOperators& ops, const StateAD& u) {
  const Vector x = stack(ops, u);
  const Vector r = ops.N_A * x;
  return r.norm() / (std::max(inf_norm(ops.N_A), 1e-300) * std::max(x.norm(), 1e-300));
}

}  // namespace emm
