// Acceptance suite: every release-gating property with its tolerance pinned
// in code, one pass/fail line per criterion.  Exit code equals the number of
// failed criteria.
#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "emm/freq.hpp"
#include "emm/idform.hpp"
#include "emm/random.hpp"
#include "emm/scenario.hpp"
#include "emm/spectral.hpp"
#include "emm/timestep.hpp"

using namespace emm;

namespace {

struct Gate {
  int failures = 0;
  int index = 0;

  void run(const std::string& name, double budget_seconds,
           const std::function<bool(std::string&)>& body) {
    ++index;
    std::string detail;
    bool ok = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds >= budget_seconds) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("over time budget");
    }
    std::printf("[%s] criterion %d: %s (%.1f s%s%s)\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                seconds, detail.empty() ? "" : "; ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

EmmMaterial seeded_material(std::uint64_t seed, int n, int degenerate_mask = 0) {
  Rng rng(seed);
  MaterialPoint p;
  p.rho = rng.uniform(0.8, 1.5);
  for (int j = 0; j < n; ++j)
    p.branches.push_back(
        {rng.spd(3, 0.4, 3.0), rng.uniform(0.7, 2.0), (degenerate_mask >> j & 1) != 0});
  return EmmMaterial::uniform(p);
}

EmmMaterial unit_material(int n) {
  MaterialPoint p;
  p.rho = 1.0;
  for (int j = 0; j < n; ++j) p.branches.push_back({Matrix::Identity(3, 3), 1.0, false});
  return EmmMaterial::uniform(p);
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// Random state built from a low-order trigonometric polynomial, so its energy
// sits in modes every tested mesh resolves; white nodal noise would bias the
// fitted decay rate with mesh-dependent numerical damping of unresolved
// modes.
constexpr int kSmoothModes = 3;

Vector smooth_random_state(const DiscreteOperators& ops, std::uint64_t seed) {
  const DofMap& d = ops.dofs;
  constexpr int kmax = kSmoothModes;
  Rng rng(seed);

  const auto trig_field = [&](Rng& r) {
    std::array<double, 2 * kSmoothModes * kSmoothModes> a{};
    for (auto& c : a) c = r.normal();
    return [a](double x, double y) {
      double v = 0.0;
      int idx = 0;
      for (int k = 1; k <= kSmoothModes; ++k)
        for (int l = 1; l <= kSmoothModes; ++l) {
          v += a[idx++] * std::sin(k * M_PI * x) * std::sin(l * M_PI * y);
          v += a[idx++] * std::sin(k * M_PI * x) * std::cos(l * M_PI * y);
        }
      return v;
    };
  };

  Vector x(d.reduced_dim());
  const auto vx = trig_field(rng), vy = trig_field(rng);
  for (int i = 0; i < d.n_v; ++i) {
    const int node = d.free_dofs[i] / 2;
    const auto& pt = ops.mesh.nodes[node];
    x(i) = (d.free_dofs[i] % 2 == 0 ? vx : vy)(pt.x(), pt.y());
  }
  for (int j = 0; j < d.n_branches; ++j) {
    const auto p0 = trig_field(rng), p1 = trig_field(rng), p2 = trig_field(rng);
    for (int e = 0; e < d.n_elems; ++e) {
      const auto& tri = ops.mesh.triangles[e];
      const Eigen::Vector2d c =
          (ops.mesh.nodes[tri[0]] + ops.mesh.nodes[tri[1]] + ops.mesh.nodes[tri[2]]) / 3.0;
      x(d.n_v + d.psi_offset(j, e) + 0) = p0(c.x(), c.y());
      x(d.n_v + d.psi_offset(j, e) + 1) = p1(c.x(), c.y());
      x(d.n_v + d.psi_offset(j, e) + 2) = p2(c.x(), c.y());
    }
  }
  return x;
}

}  // namespace

int main() {
  Gate gate;

  // 1. randomized tensor-identity suite, 1000 instances per family, <= 1e-12
  gate.run("tensor identity suite", 10.0, [](std::string& detail) {
    const IdentityResult r = run_identity_suite(1000, 2024);
    detail = fmt("max residuals %.2e / %.2e", std::max(r.elimination, r.resolvent_split),
                 std::max(r.laplace_stress, r.contraction));
    return r.elimination <= 1e-12 && r.resolvent_split <= 1e-12 && r.laplace_stress <= 1e-12 &&
           r.contraction <= 1e-12;
  });

  // 2. dissipativity identity over meshes x branch counts
  gate.run("discrete dissipativity identity", 30.0, [](std::string& detail) {
    double worst = 0.0, worst_eig = 0.0;
    for (int n : {4, 8, 16})
      for (int branches : {1, 2, 3}) {
        const DiscreteOperators ops =
            assemble_reduced(rect_mesh(n, n), seeded_material(100 + branches, branches));
        worst = std::max(worst, dissipativity_residual(ops));
        worst_eig = std::min(worst_eig, dissipation_smallest_eigenvalue(ops));
      }
    detail = fmt("max residual %.2e, min normalized eigenvalue %.2e", worst, worst_eig);
    return worst <= 1e-12 && worst_eig >= -1e-12;
  });

  // 3. resolvent probes and the quasi-static kernel
  gate.run("resolvent probes and stationary kernel", 60.0, [](std::string& detail) {
    const DiscreteOperators ops = assemble_reduced(rect_mesh(8, 8), seeded_material(7, 2));
    bool ok = true;

    const double eps2 = measure_eps2(ops);
    ok = ok && eps2 > 0.0;
    for (double lambda : {0.1, 0.5, 1.0, 2.0, 10.0}) {
      const ResolventProbe p = probe_resolvent(ops, Complex(lambda, 0.0), eps2);
      ok = ok && p.satisfied && p.smin_H >= lambda - 1e-8;
    }
    for (double kappa : {0.5, 1.0, 5.0}) {
      const double smin = smin_energy_metric(ops, Complex(0.0, kappa), /*dense_limit=*/0);
      ok = ok && smin > 1e-8;
    }

    Rng rng(11);
    const StateAD st = build_stationary(ops, rng.normal_vector(ops.dofs.n_phi));
    const double res = stationary_residual(ops, st);
    ok = ok && res <= 1e-10;
    detail = fmt("eps2 %.3e, kernel residual %.2e", eps2, res);
    return ok;
  });

  // 4. per-step energy balance over 2000 midpoint steps
  gate.run("energy identity along midpoint trajectories", 60.0, [](std::string& detail) {
    const DiscreteOperators ops = assemble_reduced(rect_mesh(8, 8), seeded_material(21, 2));
    Rng rng(22);
    const double dt = 0.01;
    MidpointIntegrator integ(ops, dt);
    Vector x = rng.normal_vector(ops.dofs.reduced_dim());

    double worst = 0.0;
    bool monotone = true;
    for (int k = 0; k < 2000; ++k) {
      const Vector xn = integ.step(x);
      const double e0 = energy(ops, unstack(ops, x)).E;
      const double e1 = energy(ops, unstack(ops, xn)).E;
      const double diss = energy(ops, unstack(ops, Vector(0.5 * (x + xn)))).dissipation;
      const double scale = std::max({e0, e1, dt * std::abs(diss), 1e-300});
      worst = std::max(worst, std::abs(e1 - e0 - dt * diss) / scale);
      monotone = monotone && e1 <= e0 * (1.0 + 1e-12);
      x = xn;
    }
    detail = fmt("max balance residual %.2e", worst);
    return worst <= 1e-12 && monotone;
  });

  // 5. exponential decay with mesh-stable fitted rate
  gate.run("exponential energy decay", 300.0, [](std::string& detail) {
    const EmmMaterial mat = unit_material(2);
    double rate8 = 0.0, rate16 = 0.0;
    bool ok = true;
    for (int n : {8, 16}) {
      const DiscreteOperators ops = assemble_reduced(rect_mesh(n, n), mat);
      const double dt = 0.01, T = 40.0;
      MidpointIntegrator integ(ops, dt);
      double mean_rate = 0.0;
      for (int seed = 1; seed <= 5; ++seed) {
        Vector x = smooth_random_state(ops, 1000 + seed);
        std::vector<double> ts, es;
        double prev_etilde = energy(ops, unstack(ops, x)).Etilde;
        const int nsteps = static_cast<int>(T / dt);
        for (int k = 0; k <= nsteps; ++k) {
          const EnergyReport er = energy(ops, unstack(ops, x), k * dt);
          ts.push_back(er.t);
          es.push_back(er.E);
          if (k > 0 && er.Etilde > prev_etilde * (1.0 + 1e-12) + 1e-300) ok = false;
          prev_etilde = er.Etilde;
          if (k < nsteps) x = integ.step(x);
        }
        const DecayFit fit = fit_decay(ts, es, 0.5);
        ok = ok && fit.rate > 0.0 && fit.r2 >= 0.99;
        mean_rate += fit.rate / 5.0;
      }
      (n == 8 ? rate8 : rate16) = mean_rate;
    }
    ok = ok && std::abs(rate8 - rate16) <= 0.15 * rate8;
    detail = fmt("mean rates %.4f (8x8) vs %.4f (16x16)", rate8, rate16);
    return ok;
  });

  // 6. augmented/reduced conjugacy and the fixed stationary state
  gate.run("augmented-reduced conjugacy", 60.0, [](std::string& detail) {
    const DiscreteOperators mixed =
        assemble_ad(rect_mesh(8, 8), seeded_material(31, 2, /*degenerate_mask=*/2));
    const double dt = 0.02;
    MidpointIntegrator ad(mixed, dt, MidpointIntegrator::System::Augmented);
    MidpointIntegrator red(mixed, dt, MidpointIntegrator::System::Reduced);
    Rng rng(32);
    Vector x_ad = rng.normal_vector(mixed.dofs.augmented_dim());
    Vector x_red = mixed.conjugation * x_ad;
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      x_ad = ad.step(x_ad);
      x_red = red.step(x_red);
      worst = std::max(worst, (Vector(mixed.conjugation * x_ad) - x_red).norm() /
                                  std::max(x_red.norm(), 1e-300));
    }

    const DiscreteOperators pure = assemble_ad(rect_mesh(8, 8), seeded_material(7, 2));
    const StateAD st = build_stationary(pure, Rng(33).normal_vector(pure.dofs.n_phi));
    const Vector x0 = stack(pure, st);
    MidpointIntegrator adp(pure, 0.05, MidpointIntegrator::System::Augmented);
    Vector x = x0;
    for (int k = 0; k < 100; ++k) x = adp.step(x);
    const double drift = (x - x0).norm() / x0.norm();

    detail = fmt("conjugacy deviation %.2e, stationary drift %.2e", worst, drift);
    return worst <= 1e-10 && drift <= 1e-12;
  });

  // 7. augmented/relaxation equivalence at second order
  gate.run("augmented-relaxation second-order equivalence", 300.0, [](std::string& detail) {
    const DiscreteOperators ops = assemble_ad(rect_mesh(8, 8), seeded_material(41, 2));
    Rng rng(42);
    const Vector u0 = 0.3 * rng.normal_vector(ops.dofs.n_v);
    const Vector v0 = 0.3 * rng.normal_vector(ops.dofs.n_v);
    const double T = 1.0;

    std::vector<double> dev, dev_rel;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
      const int nsteps = static_cast<int>(std::llround(T / dt));
      MidpointIntegrator ad(ops, dt, MidpointIntegrator::System::Augmented);
      Vector x = stack(ops, StateAD{u0, v0, Vector::Zero(ops.dofs.n_phi)});
      for (int k = 0; k < nsteps; ++k) x = ad.step(x);
      const IdTrajectory id = run_id(ops, u0, v0, dt, T, nsteps);
      dev.push_back((x.head(ops.dofs.n_v) - id.final_state.u).norm());
      dev_rel.push_back(dev.back() / x.head(ops.dofs.n_v).norm());
    }
    const double r1 = dev[0] / dev[1], r2 = dev[1] / dev[2];
    detail = fmt("ratios %.2f, %.2f; relative deviation %.2e", r1, r2, dev_rel[2]);
    return r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5 && dev_rel[2] <= 1e-3;
  });

  // 8. limiting amplitude principle
  gate.run("limiting amplitude principle", 600.0, [](std::string& detail) {
    const Mesh2D mesh = rect_mesh(8, 8);
    const DiscreteOperators ops = assemble_reduced(mesh, seeded_material(51, 2));
    Vector profile = Vector::Zero(2 * mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i)
      profile(2 * i) = mesh.nodes[i].y() * (1.0 - mesh.nodes[i].y());

    const LampResult ramped = limiting_amplitude_run(ops, 1.0, profile, 1.0, 40.0, 0.01);
    bool ok = ramped.harmonic.residual <= 1e-10 && ramped.mismatch_fit.rate > 0.0 &&
              ramped.mismatch_fit.r2 >= 0.98;

    const LampResult tracked =
        limiting_amplitude_run(ops, 1.0, profile, 0.0, 1.0, 2e-4, /*start_on_harmonic=*/true);
    double worst_track = 0.0;
    for (double m : tracked.series.mismatch_H) worst_track = std::max(worst_track, m);
    ok = ok && worst_track <= 1e-8;

    detail = fmt("fit rate %.3f (r2 %.4f), tracking %.2e", ramped.mismatch_fit.rate,
                 ramped.mismatch_fit.r2, worst_track);
    return ok;
  });

  // 9. conservative (purely elastic) limit
  gate.run("conservative limit energy drift", 60.0, [](std::string& detail) {
    const DiscreteOperators ops =
        assemble_reduced(rect_mesh(8, 8), seeded_material(61, 2, /*degenerate_mask=*/3));
    Rng rng(62);
    Vector x = rng.normal_vector(ops.dofs.reduced_dim());
    const double dt = 0.01, T = 10.0;
    MidpointIntegrator integ(ops, dt);
    const double e0 = energy(ops, unstack(ops, x)).E;
    double worst = 0.0;
    const int nsteps = static_cast<int>(T / dt);
    for (int k = 1; k <= nsteps; ++k) {
      x = integ.step(x);
      const double drift = std::abs(energy(ops, unstack(ops, x)).E - e0);
      worst = std::max(worst, drift / (e0 * std::max(1.0, k * dt)));
    }
    detail = fmt("max drift per unit time %.2e", worst);
    return worst <= 1e-10;
  });

  std::printf("%d of 9 criteria passed\n", 9 - gate.failures);
  return gate.failures;
}
