#include "emm/assembly.hpp"

#include <fstream>

namespace emm {

namespace {

using Triplet = Eigen::Triplet<double>;

struct ElementGeometry {
  double area;
  double b[3];  // d phi_k / dx * 2A
  double c[3];  // d phi_k / dy * 2A
};

ElementGeometry element_geometry(const Mesh2D& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Eigen::Vector2d p[3] = {mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]};
  ElementGeometry g;
  g.area = triangle_area(mesh, t);
  if (g.area <= 0.0)
    throw std::runtime_error("assembly: degenerate triangle " + std::to_string(t));
  for (int k = 0; k < 3; ++k) {
    const auto& pn = p[(k + 1) % 3];
    const auto& pp = p[(k + 2) % 3];
    g.b[k] = pn.y() - pp.y();
    g.c[k] = pp.x() - pn.x();
  }
  return g;
}

SpMat from_triplets(int rows, int cols, std::vector<Triplet>& trip) {
  SpMat a(rows, cols);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

// Split the columns of a full 2N-dof matrix into free and constrained parts.
void split_columns(const SpMat& a_full, const DofMap& dofs, SpMat* ff, SpMat* fc) {
  std::vector<int> cindex(2 * dofs.n_nodes, -1);
  for (std::size_t i = 0; i < dofs.constrained_dofs.size(); ++i)
    cindex[dofs.constrained_dofs[i]] = static_cast<int>(i);

  std::vector<Triplet> tf, tc;
  for (int k = 0; k < a_full.outerSize(); ++k)
    for (SpMat::InnerIterator it(a_full, k); it; ++it) {
      const int row = dofs.free_index[it.row()];
      if (row < 0) continue;
      const int col = dofs.free_index[it.col()];
      if (col >= 0)
        tf.emplace_back(row, col, it.value());
      else
        tc.emplace_back(row, cindex[it.col()], it.value());
    }
  *ff = from_triplets(dofs.n_v, dofs.n_v, tf);
  *fc = from_triplets(dofs.n_v, static_cast<int>(dofs.constrained_dofs.size()), tc);
}

// Keeps only the free columns of the strain map.
void split_strain_columns(const SpMat& g_full, const DofMap& dofs, SpMat* gf, SpMat* gc) {
  std::vector<int> cindex(2 * dofs.n_nodes, -1);
  for (std::size_t i = 0; i < dofs.constrained_dofs.size(); ++i)
    cindex[dofs.constrained_dofs[i]] = static_cast<int>(i);
  std::vector<Triplet> tf, tc;
  for (int k = 0; k < g_full.outerSize(); ++k)
    for (SpMat::InnerIterator it(g_full, k); it; ++it) {
      const int col = dofs.free_index[it.col()];
      if (col >= 0)
        tf.emplace_back(it.row(), col, it.value());
      else
        tc.emplace_back(it.row(), cindex[it.col()], it.value());
    }
  *gf = from_triplets(static_cast<int>(g_full.rows()), dofs.n_v, tf);
  *gc = from_triplets(static_cast<int>(g_full.rows()), static_cast<int>(dofs.constrained_dofs.size()), tc);
}

void add_block(std::vector<Triplet>& trip, int row0, int col0, const Matrix& block) {
  for (int i = 0; i < block.rows(); ++i)
    for (int j = 0; j < block.cols(); ++j)
      if (block(i, j) != 0.0) trip.emplace_back(row0 + i, col0 + j, block(i, j));
}

void add_sparse(std::vector<Triplet>& trip, int row0, int col0, const SpMat& a,
                double scale = 1.0) {
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      trip.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()),
                        scale * it.value());
}

// Largest |theta| of the pencil F x = theta M_H x for the cross-term form
// F = [0, G_all^t M_psiC; M_psiC G_all, 0], by power iteration in the H metric.
double cross_term_bound(const DiscreteOperators& ops) {
  const int nv = ops.dofs.n_v, np = ops.dofs.n_psi;
  if (nv == 0 || np == 0) return 0.0;
  Vector x = Vector::Ones(nv + np);
  for (int i = 0; i < x.size(); ++i) x(i) = 1.0 + 0.3 * std::sin(1.0 + 2.7 * i);
  double theta = 0.0;
  for (int it = 0; it < 200; ++it) {
    // y = M_H^{-1} F x
    Vector y(nv + np);
    y.head(nv) = ops.M_rho_llt->solve(ops.G_all.transpose() * (ops.M_psiC * x.tail(np)));
    y.tail(np) = ops.G_all * x.head(nv);
    const double ny = std::sqrt(y.head(nv).dot(ops.M_rho * y.head(nv)) +
                                y.tail(np).dot(ops.M_psiC * y.tail(np)));
    const double nx = std::sqrt(x.head(nv).dot(ops.M_rho * x.head(nv)) +
                                x.tail(np).dot(ops.M_psiC * x.tail(np)));
    if (ny == 0.0 || nx == 0.0) return 0.0;
    const double r = ny / nx;
    x = y / ny;
    if (it > 10 && std::abs(r - theta) <= 1e-10 * std::max(r, 1.0)) return r;
    theta = r;
  }
  return theta;
}

}  // namespace

DiscreteOperators assemble_reduced(const Mesh2D& mesh, const EmmMaterial& material) {
  validate(mesh);
  validate(material);

  DiscreteOperators ops;
  ops.mesh = mesh;
  ops.material = material;

  DofMap& d = ops.dofs;
  d.n_nodes = mesh.node_count();
  d.n_elems = mesh.triangle_count();
  d.n_branches = material.branch_count();
  d.m = material.voigt_m();
  if (d.m != 3)
    throw std::runtime_error("assembly: 2-D meshes need Kelvin-Mandel length 3 stiffness");
  if (!material.element_region.empty() &&
      static_cast<int>(material.element_region.size()) != d.n_elems)
    throw std::runtime_error("assembly: element_region size does not match the mesh");

  for (int j = 0; j < d.n_branches; ++j)
    if (!material.branch_degenerate(j)) d.active_branches.push_back(j);
  d.n_active = static_cast<int>(d.active_branches.size());

  const std::vector<bool> on_dirichlet = dirichlet_nodes(mesh);
  d.free_index.assign(2 * d.n_nodes, -1);
  for (int node = 0; node < d.n_nodes; ++node)
    for (int comp = 0; comp < 2; ++comp) {
      const int full = 2 * node + comp;
      if (on_dirichlet[node])
        d.constrained_dofs.push_back(full);
      else {
        d.free_index[full] = static_cast<int>(d.free_dofs.size());
        d.free_dofs.push_back(full);
      }
    }
  d.n_v = static_cast<int>(d.free_dofs.size());
  d.n_psi = d.n_branches * d.n_elems * d.m;
  d.n_phi = d.n_active * d.n_elems * d.m;

  // Geometry, strain map, mass.
  ops.area.resize(d.n_elems);
  std::vector<Triplet> tg, tm;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int e = 0; e < d.n_elems; ++e) {
    const ElementGeometry geo = element_geometry(mesh, e);
    ops.area(e) = geo.area;
    const auto& tri = mesh.triangles[e];
    const double s = 1.0 / (2.0 * geo.area);
    for (int k = 0; k < 3; ++k) {
      const int nx = 2 * tri[k], ny = 2 * tri[k] + 1;
      tg.emplace_back(3 * e + 0, nx, s * geo.b[k]);
      tg.emplace_back(3 * e + 1, ny, s * geo.c[k]);
      tg.emplace_back(3 * e + 2, nx, s * geo.c[k] * inv_sqrt2);
      tg.emplace_back(3 * e + 2, ny, s * geo.b[k] * inv_sqrt2);
    }
    const double rho = material.at(e).rho;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double w = rho * geo.area / 12.0 * (a == b ? 2.0 : 1.0);
        tm.emplace_back(2 * tri[a], 2 * tri[b], w);
        tm.emplace_back(2 * tri[a] + 1, 2 * tri[b] + 1, w);
      }
  }
  ops.G_full = from_triplets(3 * d.n_elems, 2 * d.n_nodes, tg);
  ops.M_rho_full = from_triplets(2 * d.n_nodes, 2 * d.n_nodes, tm);
  split_columns(ops.M_rho_full, d, &ops.M_rho, &ops.M_rho_fc);
  split_strain_columns(ops.G_full, d, &ops.G, &ops.G_c);

  // Internal-variable block diagonals and the stacked strain map.
  std::vector<Triplet> t_mpsi, t_dpsi, t_kpsi, t_gall, t_gallc;
  for (int j = 0; j < d.n_branches; ++j)
    for (int e = 0; e < d.n_elems; ++e) {
      const MaxwellBranch& b = material.at(e).branches[j];
      const int r0 = d.psi_offset(j, e);
      add_block(t_mpsi, r0, r0, ops.area(e) * b.c);
      if (!b.degenerate) {
        const Matrix k = b.relaxation_rate();
        add_block(t_kpsi, r0, r0, k);
        add_block(t_dpsi, r0, r0, ops.area(e) * Matrix(k * b.c));
      }
    }
  for (int j = 0; j < d.n_branches; ++j) {
    add_sparse(t_gall, j * d.n_elems * d.m, 0, ops.G);
    add_sparse(t_gallc, j * d.n_elems * d.m, 0, ops.G_c);
  }
  ops.M_psiC = from_triplets(d.n_psi, d.n_psi, t_mpsi);
  ops.D_psi = from_triplets(d.n_psi, d.n_psi, t_dpsi);
  ops.K_psi = from_triplets(d.n_psi, d.n_psi, t_kpsi);
  ops.G_all = from_triplets(d.n_psi, d.n_v, t_gall);
  ops.G_all_c = from_triplets(d.n_psi, static_cast<int>(d.constrained_dofs.size()), t_gallc);

  // M_H and the generalized right-hand side N.
  {
    std::vector<Triplet> tmh, tn;
    add_sparse(tmh, 0, 0, ops.M_rho);
    add_sparse(tmh, d.n_v, d.n_v, ops.M_psiC);
    ops.M_H = from_triplets(d.reduced_dim(), d.reduced_dim(), tmh);

    const SpMat coupling = SpMat(ops.M_psiC * ops.G_all);
    add_sparse(tn, 0, d.n_v, SpMat(coupling.transpose()), -1.0);
    add_sparse(tn, d.n_v, 0, coupling);
    add_sparse(tn, d.n_v, d.n_v, ops.D_psi, -1.0);
    ops.N = from_triplets(d.reduced_dim(), d.reduced_dim(), tn);
  }

  // Aggregate elastic stiffness on free dofs.
  {
    std::vector<Triplet> tw;
    for (int e = 0; e < d.n_elems; ++e)
      add_block(tw, 3 * e, 3 * e, ops.area(e) * aggregate_stiffness(material.at(e)));
    const SpMat wc = from_triplets(3 * d.n_elems, 3 * d.n_elems, tw);
    ops.K_all = SpMat(ops.G.transpose() * wc * ops.G);
  }

  // Augmented system blocks.
  {
    std::vector<Triplet> tma, tna;
    add_sparse(tma, 0, 0, ops.M_rho);
    add_sparse(tma, d.n_v, d.n_v, ops.M_rho);
    for (int a = 0; a < d.n_active; ++a)
      for (int e = 0; e < d.n_elems; ++e)
        for (int i = 0; i < d.m; ++i) {
          const int r = 2 * d.n_v + d.phi_offset(a, e) + i;
          tma.emplace_back(r, r, ops.area(e));
        }
    ops.M_A = from_triplets(d.augmented_dim(), d.augmented_dim(), tma);

    add_sparse(tna, 0, d.n_v, ops.M_rho);
    add_sparse(tna, d.n_v, 0, ops.K_all, -1.0);
    for (int a = 0; a < d.n_active; ++a) {
      const int j = d.active_branches[a];
      std::vector<Triplet> t_mphi, t_wk;
      for (int e = 0; e < d.n_elems; ++e) {
        const MaxwellBranch& b = ops.material.at(e).branches[j];
        add_block(t_mphi, d.m * e, d.m * e, ops.area(e) * b.c);
        add_block(t_wk, d.m * e, d.m * e, ops.area(e) * b.relaxation_rate());
      }
      const SpMat m_phi = from_triplets(d.m * d.n_elems, d.m * d.n_elems, t_mphi);
      const SpMat wk = from_triplets(d.m * d.n_elems, d.m * d.n_elems, t_wk);
      const int r0 = 2 * d.n_v + d.phi_offset(a, 0);
      add_sparse(tna, d.n_v, r0, SpMat(ops.G.transpose() * m_phi));
      add_sparse(tna, r0, 0, SpMat(wk * ops.G));
      add_sparse(tna, r0, r0, wk, -1.0);
    }
    ops.N_A = from_triplets(d.augmented_dim(), d.augmented_dim(), tna);
  }

  // Conjugation (u1, u2, phi) -> (v, psi) = (u2, e[u1] - phi).
  {
    std::vector<Triplet> tp;
    for (int i = 0; i < d.n_v; ++i) tp.emplace_back(i, d.n_v + i, 1.0);
    for (int j = 0; j < d.n_branches; ++j)
      add_sparse(tp, d.n_v + d.psi_offset(j, 0), 0, ops.G);
    for (int a = 0; a < d.n_active; ++a) {
      const int j = d.active_branches[a];
      for (int i = 0; i < d.n_elems * d.m; ++i)
        tp.emplace_back(d.n_v + d.psi_offset(j, 0) + i, 2 * d.n_v + d.phi_offset(a, 0) + i, -1.0);
    }
    ops.conjugation = from_triplets(d.reduced_dim(), d.augmented_dim(), tp);
  }

  ops.M_rho_llt = std::make_shared<Eigen::SimplicialLLT<SpMat>>();
  if (d.n_v > 0) {
    ops.M_rho_llt->compute(ops.M_rho);
    if (ops.M_rho_llt->info() != Eigen::Success)
      throw std::runtime_error("assembly: velocity mass matrix factorization failed");
  }

  // Corrector weight for the amended energy: bounded by half the smallest
  // relaxation rate so the amended energy is non-increasing along midpoint
  // trajectories; scaled down by the cross-term bound.
  double rate_min = std::numeric_limits<double>::infinity();
  for (const auto& region : material.regions)
    for (const auto& b : region.branches)
      rate_min = std::min(rate_min, b.degenerate ? 0.0 : smallest_eigenvalue(b.relaxation_rate()));
  ops.c_f = rate_min == 0.0 ? 0.0
                            : 0.5 * rate_min / std::max(1.0, 0.5 * cross_term_bound(ops));
  return ops;
}

DiscreteOperators assemble_ad(const Mesh2D& mesh, const EmmMaterial& material) {
  return assemble_reduced(mesh, material);
}

BilinearForms assemble_B(const DiscreteOperators& ops, double sigma, double mu) {
  const DofMap& d = ops.dofs;
  std::vector<Triplet> tre, tim;
  for (int e = 0; e < d.n_elems; ++e) {
    const ModulusSplit s = harmonic_modulus_split(ops.point(e), sigma, mu);
    add_block(tre, 3 * e, 3 * e, ops.area(e) * s.re);
    add_block(tim, 3 * e, 3 * e, ops.area(e) * s.im);
  }
  const SpMat wre = from_triplets(3 * d.n_elems, 3 * d.n_elems, tre);
  const SpMat wim = from_triplets(3 * d.n_elems, 3 * d.n_elems, tim);

  BilinearForms f;
  f.B1_full = SpMat(ops.G_full.transpose() * wre * ops.G_full) + SpMat(sigma * ops.M_rho_full);
  f.B2_full = SpMat(ops.G_full.transpose() * wim * ops.G_full) + SpMat(mu * ops.M_rho_full);
  split_columns(f.B1_full, d, &f.B1, &f.B1_fc);
  split_columns(f.B2_full, d, &f.B2, &f.B2_fc);
  return f;
}

SpMat assemble_wave_stiffness(const DiscreteOperators& ops, double lambda) {
  const DofMap& d = ops.dofs;
  std::vector<Triplet> tb;
  for (int e = 0; e < d.n_elems; ++e)
    add_block(tb, 3 * e, 3 * e, ops.area(e) * complex_modulus(ops.point(e), lambda));
  const SpMat wb = from_triplets(3 * d.n_elems, 3 * d.n_elems, tb);
  return SpMat(ops.G.transpose() * wb * ops.G);
}

double wave_generator_skew_residual(const DiscreteOperators& ops, double lambda) {
  const SpMat kb = assemble_wave_stiffness(ops, lambda);
  const int n = ops.dofs.n_v;
  // Lower-left block of the metric-weighted generator, formed honestly
  // through the mass solve: Z = M_rho (M_rho^{-1} K_B).
  Matrix z(n, n);
  Matrix kbd = Matrix(kb);
  for (int c = 0; c < n; ++c) z.col(c) = ops.M_rho * ops.M_rho_llt->solve(kbd.col(c));
  const double scale = std::max(kbd.cwiseAbs().maxCoeff(), 1e-300);
  return std::max((kbd - z.transpose()).cwiseAbs().maxCoeff(),
                  (kbd - kbd.transpose()).cwiseAbs().maxCoeff()) /
         scale;
}

void dump_coordinate(const SpMat& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_coordinate: cannot open " + path);
  out << a.rows() << " " << a.cols() << " " << a.nonZeros() << "\n";
  char buf[96];
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row()),
                    static_cast<long>(it.col()), it.value());
      out << buf;
    }
}

Vector apply_generator(const DiscreteOperators& ops, const Vector& x) {
  const DofMap& d = ops.dofs;
  Vector y(d.reduced_dim());
  const auto v = x.head(d.n_v);
  const auto psi = x.tail(d.n_psi);
  y.head(d.n_v) = d.n_v > 0
                      ? Vector(-ops.M_rho_llt->solve(ops.G_all.transpose() * (ops.M_psiC * psi)))
                      : Vector(0);
  y.tail(d.n_psi) = ops.G_all * v - ops.K_psi * psi;
  return y;
}

Vector apply_generator_ad(const DiscreteOperators& ops, const Vector& x) {
  const DofMap& d = ops.dofs;
  const Vector r = ops.N_A * x;
  Vector y(d.augmented_dim());
  if (d.n_v > 0) {
    y.head(d.n_v) = ops.M_rho_llt->solve(r.head(d.n_v));
    y.segment(d.n_v, d.n_v) = ops.M_rho_llt->solve(r.segment(d.n_v, d.n_v));
  }
  for (int a = 0; a < d.n_active; ++a)
    for (int e = 0; e < d.n_elems; ++e)
      y.segment(2 * d.n_v + d.phi_offset(a, e), d.m) =
          r.segment(2 * d.n_v + d.phi_offset(a, e), d.m) / ops.area(e);
  return y;
}

}  // namespace emm
