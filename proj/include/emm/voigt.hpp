// Kelvin-Mandel algebra for symmetric rank-2 and rank-4 tensors.
//
// A symmetric d x d matrix w is stored as the length-m vector (m = d(d+1)/2)
//   d=2: (w11, w22, sqrt(2) w12)
//   d=3: (w11, w22, w33, sqrt(2) w23, sqrt(2) w13, sqrt(2) w12)
// so that the Euclidean norm of the vector equals the Frobenius norm of the
// matrix, and a fully symmetric rank-4 tensor acts as a plain symmetric
// m x m matrix.  With this scaling, matrix functions of the m x m matrix
// (exp, shifted inverses) coincide with the corresponding tensor functions.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace emm {

using Matrix  = Eigen::MatrixXd;
using Vector  = Eigen::VectorXd;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;
using Complex = std::complex<double>;

constexpr int voigt_dim(int d) { return d * (d + 1) / 2; }

// Spatial dimension from the vector length (3 -> 2, 6 -> 3).
inline int voigt_space_dim(int m) {
  if (m == 3) return 2;
  if (m == 6) return 3;
  throw std::invalid_argument("voigt_space_dim: vector length must be 3 or 6, got " +
                              std::to_string(m));
}

inline bool is_symmetric(const Matrix& a, double rel_tol = 1e-14) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * std::max(scale, 1e-300);
}

inline Vector to_voigt(const Matrix& w, double sym_tol = 1e-14) {
  const int d = static_cast<int>(w.rows());
  if (d != 2 && d != 3) throw std::invalid_argument("to_voigt: expected a 2x2 or 3x3 matrix");
  if (!is_symmetric(w, sym_tol)) throw std::invalid_argument("to_voigt: matrix is not symmetric");
  const double s = std::sqrt(2.0);
  Vector v(voigt_dim(d));
  if (d == 2) {
    v << w(0, 0), w(1, 1), s * w(0, 1);
  } else {
    v << w(0, 0), w(1, 1), w(2, 2), s * w(1, 2), s * w(0, 2), s * w(0, 1);
  }
  return v;
}

inline Matrix from_voigt(const Vector& v) {
  const int d = voigt_space_dim(static_cast<int>(v.size()));
  const double s = 1.0 / std::sqrt(2.0);
  Matrix w(d, d);
  if (d == 2) {
    w << v(0), s * v(2), s * v(2), v(1);
  } else {
    w << v(0), s * v(5), s * v(4),
         s * v(5), v(1), s * v(3),
         s * v(4), s * v(3), v(2);
  }
  return w;
}

namespace detail {
inline void require_symmetric(const Matrix& k, const char* who) {
  if (!is_symmetric(k))
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
}
}  // namespace detail

// f applied to the spectrum of a symmetric K: K = Q diag(l) Q^t maps to
// Q diag(f(l)) Q^t.  f may return double or complex.
template <class F>
auto sym_apply(const Matrix& k, F&& f)
    -> Eigen::Matrix<decltype(f(0.0)), Eigen::Dynamic, Eigen::Dynamic> {
  using Scalar = decltype(f(0.0));
  detail::require_symmetric(k, "sym_apply");
  Eigen::SelfAdjointEigenSolver<Matrix> es(k);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_apply: eigensolver failed");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fl(k.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i) fl(i) = f(es.eigenvalues()(i));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> q =
      es.eigenvectors().template cast<Scalar>();
  return q * fl.asDiagonal() * q.transpose();
}

inline double smallest_eigenvalue(const Matrix& k) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(k, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double largest_eigenvalue(const Matrix& k) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(k, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(k.rows() - 1);
}

// exp(-t K) for symmetric K.
inline Matrix sym_exp(const Matrix& k, double t) {
  return sym_apply(k, [t](double x) { return std::exp(-t * x); });
}

inline Matrix sym_inverse(const Matrix& k) {
  return sym_apply(k, [](double x) {
    if (x == 0.0) throw std::runtime_error("sym_inverse: zero eigenvalue");
    return 1.0 / x;
  });
}

// (lambda I + K)^{-1}; throws naming the offending eigenvalue when the
// shifted spectrum is singular.
inline Matrix sym_shift_inverse(const Matrix& k, double lambda,
                                double singular_tol = 0.0) {
  const double scale = std::max(k.cwiseAbs().maxCoeff(), std::abs(lambda));
  return sym_apply(k, [&](double x) {
    const double s = lambda + x;
    if (std::abs(s) <= singular_tol * scale || s == 0.0) {
      std::ostringstream msg;
      msg << "sym_shift_inverse: shifted spectrum singular at eigenvalue " << x
          << " (lambda = " << lambda << ")";
      throw std::runtime_error(msg.str());
    }
    return 1.0 / s;
  });
}

inline MatrixC sym_shift_inverse(const Matrix& k, Complex lambda) {
  const double scale = std::max(k.cwiseAbs().maxCoeff(), std::abs(lambda));
  return sym_apply(k, [&](double x) -> Complex {
    const Complex s = lambda + x;
    if (std::abs(s) <= 1e-300 * std::max(scale, 1.0)) {
      std::ostringstream msg;
      msg << "sym_shift_inverse: shifted spectrum singular at eigenvalue " << x
          << " (lambda = " << lambda.real() << "+" << lambda.imag() << "i)";
      throw std::runtime_error(msg.str());
    }
    return 1.0 / s;
  });
}

// (mu^2 I + K^2)^{-1}.
inline Matrix sym_freq_inverse(const Matrix& k, double mu) {
  return sym_apply(k, [mu](double x) {
    const double s = mu * mu + x * x;
    if (s == 0.0) throw std::runtime_error("sym_freq_inverse: singular at eigenvalue 0");
    return 1.0 / s;
  });
}

// Residual of the internal-variable elimination identity
//   lambda (lambda I + eta^{-1}C)^{-1} C = C - eta^{-1}C (lambda I + eta^{-1}C)^{-1} C,
// both sides evaluated as written; returns the max-norm residual relative to
// the larger side.
inline double elimination_identity_residual(const Matrix& c, double eta, double lambda) {
  const Matrix k = c / eta;
  const Matrix res = sym_shift_inverse(k, lambda);
  const Matrix lhs = lambda * res * c;
  const Matrix rhs = c - k * res * c;
  const double scale = std::max({lhs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff(), 1e-300});
  return (lhs - rhs).cwiseAbs().maxCoeff() / scale;
}

// Real/imaginary split of (i mu I + K)^{-1} for symmetric positive K:
//   Q = K^{-1} - mu^2 K^{-1} (mu^2 I + K^2)^{-1},  R = -mu (mu^2 I + K^2)^{-1}.
struct ResolventSplit {
  Matrix q;
  Matrix r;
};

inline ResolventSplit resolvent_split(const Matrix& k, double mu) {
  const Matrix kinv = sym_inverse(k);
  const Matrix finv = sym_freq_inverse(k, mu);
  return {kinv - mu * mu * kinv * finv, -mu * finv};
}

// Strong-convexity validation: smallest eigenvalue must clear
// alpha0_rel * largest eigenvalue.  Throws otherwise.
inline void validate_stiffness(const Matrix& c, double alpha0_rel = 1e-8) {
  detail::require_symmetric(c, "validate_stiffness");
  Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(c.rows() - 1);
  if (lmax <= 0.0 || lmin < alpha0_rel * lmax) {
    std::ostringstream msg;
    msg << "validate_stiffness: not strongly convex (eigenvalues in [" << lmin << ", " << lmax
        << "], required lower bound " << alpha0_rel * lmax << ")";
    throw std::runtime_error(msg.str());
  }
}

}  // namespace emm
