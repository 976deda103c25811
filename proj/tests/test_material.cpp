#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emm/material.hpp"
#include "emm/random.hpp"
#include "oracles.hpp"

using namespace emm;

namespace {

MaterialPoint random_point(Rng& rng, int m, int n, int degenerate_mask = 0) {
  MaterialPoint p;
  p.rho = rng.uniform(0.5, 3.0);
  for (int j = 0; j < n; ++j)
    p.branches.push_back(
        {rng.spd(m, 0.2, 6.0), rng.uniform(0.5, 5.0), (degenerate_mask >> j & 1) != 0});
  return p;
}

}  // namespace

TEST_CASE("validation rejects bad inputs") {
  MaterialPoint p;
  p.rho = 1.0;
  p.branches.push_back({Matrix::Identity(3, 3), 1.0, false});
  CHECK_NOTHROW(validate(EmmMaterial::uniform(p)));

  MaterialPoint bad_rho = p;
  bad_rho.rho = 0.0;
  CHECK_THROWS(validate(EmmMaterial::uniform(bad_rho)));

  MaterialPoint bad_eta = p;
  bad_eta.branches[0].eta = 0.0;
  CHECK_THROWS(validate(EmmMaterial::uniform(bad_eta)));

  MaterialPoint indefinite = p;
  indefinite.branches[0].c(2, 2) = -1.0;
  CHECK_THROWS(validate(EmmMaterial::uniform(indefinite)));

  EmmMaterial no_branches = EmmMaterial::uniform({1.0, {}});
  CHECK_THROWS(validate(no_branches));
}

TEST_CASE("relaxation kernel at t = 0 and the scalar case") {
  Rng rng(4);
  MaxwellBranch b{rng.spd(3, 0.5, 3.0), 1.7, false};
  const Matrix k = b.c / b.eta;
  CHECK((relaxation_kernel(b, 0.0) - k).cwiseAbs().maxCoeff() <= 1e-14);

  MaxwellBranch unit{Matrix::Identity(3, 3), 1.0, false};
  const Matrix half = relaxation_kernel(unit, std::log(2.0));
  CHECK((half - 0.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);

  MaxwellBranch degenerate{Matrix::Identity(3, 3), 1.0, true};
  CHECK_THROWS(relaxation_kernel(degenerate, 1.0));
  CHECK_THROWS(relaxation_kernel(unit, -0.1));
}

TEST_CASE("relaxation kernel semigroup composition") {
  Rng rng(8);
  MaxwellBranch b{rng.spd(3, 0.2, 4.0), 2.0, false};
  const Matrix k = b.relaxation_rate();
  const Matrix lhs = sym_exp(k, 0.7 + 0.4);
  const Matrix rhs = sym_exp(k, 0.7) * sym_exp(k, 0.4);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("relaxation kernel against an ODE quadrature oracle") {
  // The viscous strain driven by a constant strain e solves
  //   phi'(t) = K (e - phi), phi(0) = 0,
  // and equals the kernel convolved with e.  Integrate the ODE with a fine
  // midpoint rule and compare against Simpson quadrature of the kernel.
  Rng rng(12);
  MaxwellBranch b{rng.spd(3, 0.3, 3.0), 1.3, false};
  const Matrix k = b.relaxation_rate();
  const Vector e = rng.normal_vector(3);
  const double t_end = 0.7;

  // ODE oracle (midpoint, 20000 substeps)
  const int nsub = 20000;
  const double h = t_end / nsub;
  Vector phi = Vector::Zero(3);
  const Matrix lhs_step = Matrix::Identity(3, 3) + (h / 2.0) * k;
  const Matrix rhs_step = Matrix::Identity(3, 3) - (h / 2.0) * k;
  const Matrix step = lhs_step.inverse() * rhs_step;
  const Matrix force = lhs_step.inverse() * (h * k);
  for (int i = 0; i < nsub; ++i) phi = step * phi + force * e;

  // Simpson quadrature of the kernel: phi(t) = int_0^t kernel(t - s) e ds
  const int nq = 2000;
  const double hq = t_end / nq;
  Vector quad = Vector::Zero(3);
  for (int i = 0; i <= nq; ++i) {
    const double w = (i == 0 || i == nq) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    quad += w * (relaxation_kernel(b, t_end - i * hq) * e);
  }
  quad *= hq / 3.0;

  CHECK((phi - quad).cwiseAbs().maxCoeff() <= 1e-7);
  // and both match the closed form (I - e^{-tK}) e
  const Vector closed = (Matrix::Identity(3, 3) - sym_exp(k, t_end)) * e;
  CHECK((quad - closed).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("complex modulus scalar case and aggregate limit") {
  MaterialPoint p{1.0, {{Matrix::Identity(3, 3), 1.0, false}}};
  const Matrix m1 = complex_modulus(p, 1.0);
  CHECK((m1 - 0.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);

  Rng rng(3);
  const MaterialPoint q = random_point(rng, 3, 3);
  const Matrix at_inf = complex_modulus(q, 1e8);
  const Matrix c = aggregate_stiffness(q);
  CHECK((at_inf - c).cwiseAbs().maxCoeff() <= 1e-6 * c.cwiseAbs().maxCoeff());
}

TEST_CASE("complex modulus equals the relaxed-stress form") {
  Rng rng(17);
  for (int i = 0; i < 30; ++i) {
    const MaterialPoint p = random_point(rng, i % 2 ? 3 : 6, 1 + i % 3);
    const double lambda = rng.uniform(0.1, 10.0);
    const int m = p.voigt_m();
    Matrix relaxed = Matrix::Zero(m, m);
    for (const auto& b : p.branches) {
      const Matrix k = b.relaxation_rate();
      relaxed += (Matrix::Identity(m, m) - sym_shift_inverse(k, lambda) * k) * b.c;
    }
    const Matrix direct = complex_modulus(p, lambda);
    CHECK((direct - relaxed).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, relaxed.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("complex modulus eigenvalue sandwich for real lambda") {
  Rng rng(23);
  const MaterialPoint p = random_point(rng, 3, 2);
  const Matrix c = aggregate_stiffness(p);
  const double alpha0 = smallest_eigenvalue(c);
  double rate_max = 0.0;
  for (const auto& b : p.branches)
    rate_max = std::max(rate_max, largest_eigenvalue(b.relaxation_rate()));
  for (double lambda : {0.5, 1.0, 2.0, 5.0, 20.0}) {
    const Matrix m = complex_modulus(p, lambda);
    const double lo = alpha0 * lambda / (lambda + rate_max);
    CHECK(smallest_eigenvalue(m) >= lo - 1e-12);
    CHECK(largest_eigenvalue(m) <= largest_eigenvalue(c) + 1e-12);
  }
}

TEST_CASE("complex modulus names the branch on a spectrum hit") {
  MaterialPoint p{
      1.0, {{Matrix::Identity(3, 3), 1.0, false}, {2.0 * Matrix::Identity(3, 3), 1.0, false}}};
  try {
    complex_modulus(p, Complex(-2.0, 0.0));
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("branch 1") != std::string::npos);
  }
}

TEST_CASE("harmonic modulus split scalar cases") {
  // single branch C = I, eta = 2, sigma = 0, mu = 0: re = 2 I, im = 0
  MaterialPoint p{1.0, {{Matrix::Identity(3, 3), 2.0, false}}};
  const auto s = harmonic_modulus_split(p, 0.0, 0.0);
  CHECK((s.re - 2.0 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(s.im.cwiseAbs().maxCoeff() <= 1e-15);

  // single branch C = I, eta = 1, sigma = 0, mu = 1: re = I/2, im = -I/2
  MaterialPoint q{1.0, {{Matrix::Identity(3, 3), 1.0, false}}};
  const auto t = harmonic_modulus_split(q, 0.0, 1.0);
  CHECK((t.re - 0.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((t.im + 0.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("harmonic modulus split against the complex modulus") {
  Rng rng(29);
  for (int i = 0; i < 40; ++i) {
    // every 5th case sits on the imaginary axis (sigma = 0, non-degenerate)
    const bool on_axis = i % 5 == 0;
    const MaterialPoint p = random_point(rng, 3, 1 + i % 3, !on_axis && i % 4 == 0 ? 1 : 0);
    const double sigma = on_axis ? 0.0 : rng.uniform(0.05, 1.0);
    const double mu = on_axis ? rng.uniform(0.2, 5.0) : rng.uniform(-5.0, 5.0);
    const auto s = harmonic_modulus_split(p, sigma, mu);
    const Complex lambda(sigma, mu);
    const MatrixC via_split =
        lambda * (s.re.cast<Complex>() + Complex(0, 1) * s.im.cast<Complex>());
    const MatrixC direct = complex_modulus(p, lambda);
    CHECK((via_split - direct).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, direct.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("harmonic modulus split reports the margin violation") {
  MaterialPoint p{1.0, {{Matrix::Identity(3, 3), 1.0, false}}};
  CHECK_THROWS(harmonic_modulus_split(p, -2.0, 1.0));  // shifted rate not positive

  MaterialPoint deg{1.0, {{Matrix::Identity(3, 3), 1.0, true}}};
  CHECK_THROWS(harmonic_modulus_split(deg, 0.0, 1.0));  // degenerate branch needs sigma > 0
  CHECK_NOTHROW(harmonic_modulus_split(deg, 0.5, 1.0));
}

TEST_CASE("sigma margin") {
  MaterialPoint p{1.0, {{2.0 * Matrix::Identity(3, 3), 4.0, false}}};
  CHECK(sigma_lower_margin(p) == doctest::Approx(0.45));  // 0.9 * (2/4)
  MaterialPoint deg{1.0, {{Matrix::Identity(3, 3), 1.0, true}}};
  CHECK(sigma_lower_margin(deg) == 0.0);
}
