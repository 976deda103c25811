#include "emm/material.hpp"

#include <sstream>

namespace emm {

void validate(const EmmMaterial& mat, const MaterialValidation& rules) {
  if (mat.regions.empty()) throw std::runtime_error("material: no regions defined");
  const int n = static_cast<int>(mat.regions[0].branches.size());
  if (n < 1) throw std::runtime_error("material: at least one branch is required");
  const int m = mat.regions[0].voigt_m();

  for (std::size_t r = 0; r < mat.regions.size(); ++r) {
    const MaterialPoint& p = mat.regions[r];
    std::ostringstream where;
    where << "material region " << r;
    if (p.rho <= rules.gamma0)
      throw std::runtime_error(where.str() + ": density must exceed " +
                               std::to_string(rules.gamma0));
    if (static_cast<int>(p.branches.size()) != n)
      throw std::runtime_error(where.str() + ": branch count differs between regions");
    for (int j = 0; j < n; ++j) {
      const MaxwellBranch& b = p.branches[j];
      std::ostringstream bw;
      bw << where.str() << ", branch " << j;
      if (b.c.rows() != m || b.c.cols() != m)
        throw std::runtime_error(bw.str() + ": stiffness dimension differs between branches");
      if (b.degenerate != mat.regions[0].branches[j].degenerate)
        throw std::runtime_error(bw.str() + ": degeneracy pattern differs between regions");
      if (!b.degenerate && b.eta <= rules.beta0)
        throw std::runtime_error(bw.str() + ": viscosity must exceed " +
                                 std::to_string(rules.beta0));
      try {
        validate_stiffness(b.c, rules.alpha0_rel);
      } catch (const std::exception& e) {
        throw std::runtime_error(bw.str() + ": " + e.what());
      }
    }
    validate_stiffness(aggregate_stiffness(p), rules.alpha0_rel);
  }
  for (int r : mat.element_region)
    if (r < 0 || r >= static_cast<int>(mat.regions.size()))
      throw std::runtime_error("material: element assigned to undefined region " +
                               std::to_string(r));
}

Matrix aggregate_stiffness(const MaterialPoint& p) {
  const int m = p.voigt_m();
  Matrix c = Matrix::Zero(m, m);
  for (const auto& b : p.branches) c += b.c;
  return c;
}

double sigma_lower_margin(const MaterialPoint& p) {
  double lmin = std::numeric_limits<double>::infinity();
  for (const auto& b : p.branches) {
    if (b.degenerate) return 0.0;
    lmin = std::min(lmin, smallest_eigenvalue(b.relaxation_rate()));
  }
  return 0.9 * lmin;
}

Matrix relaxation_kernel(const MaxwellBranch& branch, double t) {
  if (branch.degenerate)
    throw std::runtime_error("relaxation_kernel: degenerate branch carries no kernel");
  if (t < 0.0) throw std::invalid_argument("relaxation_kernel: t must be >= 0");
  const Matrix k = branch.relaxation_rate();
  return sym_exp(k, t) * k;
}

MatrixC complex_modulus(const MaterialPoint& p, Complex lambda) {
  const int m = p.voigt_m();
  MatrixC out = MatrixC::Zero(m, m);
  for (std::size_t j = 0; j < p.branches.size(); ++j) {
    const MaxwellBranch& b = p.branches[j];
    if (b.degenerate) {
      out += b.c.cast<Complex>();
      continue;
    }
    try {
      out += lambda * sym_shift_inverse(b.relaxation_rate(), lambda) * b.c.cast<Complex>();
    } catch (const std::exception& e) {
      throw std::runtime_error("complex_modulus: branch " + std::to_string(j) + ": " + e.what());
    }
  }
  return out;
}

Matrix complex_modulus(const MaterialPoint& p, double lambda) {
  const int m = p.voigt_m();
  Matrix out = Matrix::Zero(m, m);
  for (std::size_t j = 0; j < p.branches.size(); ++j) {
    const MaxwellBranch& b = p.branches[j];
    if (b.degenerate) {
      out += b.c;
      continue;
    }
    try {
      out += lambda * sym_shift_inverse(b.relaxation_rate(), lambda) * b.c;
    } catch (const std::exception& e) {
      throw std::runtime_error("complex_modulus: branch " + std::to_string(j) + ": " + e.what());
    }
  }
  return out;
}

ModulusSplit harmonic_modulus_split(const MaterialPoint& p, double sigma, double mu) {
  const int m = p.voigt_m();
  ModulusSplit s{Matrix::Zero(m, m), Matrix::Zero(m, m)};
  for (std::size_t j = 0; j < p.branches.size(); ++j) {
    const MaxwellBranch& b = p.branches[j];
    Matrix kj = b.relaxation_rate();
    kj.diagonal().array() += sigma;
    const double lmin = smallest_eigenvalue(kj);
    if (lmin <= 0.0) {
      std::ostringstream msg;
      msg << "harmonic_modulus_split: branch " << j << " shifted rate not positive definite"
          << " (smallest eigenvalue " << lmin << " at sigma = " << sigma << ")";
      throw std::runtime_error(msg.str());
    }
    const Matrix finv = sym_freq_inverse(kj, mu);
    s.re += b.c * kj * finv;
    s.im += -mu * b.c * finv;
  }
  return s;
}

MatrixC branch_resolvent_times_c(const MaxwellBranch& branch, Complex lambda) {
  if (branch.degenerate) {
    if (std::abs(lambda) == 0.0)
      throw std::runtime_error("branch_resolvent_times_c: lambda = 0 on a degenerate branch");
    return branch.c.cast<Complex>() / lambda;
  }
  return sym_shift_inverse(branch.relaxation_rate(), lambda) * branch.c.cast<Complex>();
}

}  // namespace emm
