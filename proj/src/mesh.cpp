#include "emm/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace emm {

namespace {

std::pair<int, int> undirected(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
  std::ostringstream out;
  out << path << ":" << line << ": " << msg;
  throw std::runtime_error(out.str());
}

}  // namespace

Mesh2D rect_mesh(int nx, int ny, const SideLabels& sides) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("rect_mesh: nx, ny must be >= 1");
  if (sides.left == BoundaryLabel::Neumann && sides.right == BoundaryLabel::Neumann &&
      sides.bottom == BoundaryLabel::Neumann && sides.top == BoundaryLabel::Neumann)
    throw std::invalid_argument("rect_mesh: all-Neumann labeling rejected, the Dirichlet part must be nonempty");

  Mesh2D mesh;
  const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.nodes.emplace_back(double(i) / nx, double(j) / ny);

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int n00 = id(i, j), n10 = id(i + 1, j), n01 = id(i, j + 1), n11 = id(i + 1, j + 1);
      mesh.triangles.push_back({n00, n10, n11});
      mesh.triangles.push_back({n00, n11, n01});
    }

  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back({id(0, j + 1), id(0, j), sides.left});
    mesh.boundary_edges.push_back({id(nx, j), id(nx, j + 1), sides.right});
  }
  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back({id(i, 0), id(i + 1, 0), sides.bottom});
    mesh.boundary_edges.push_back({id(i + 1, ny), id(i, ny), sides.top});
  }
  validate(mesh);
  return mesh;
}

Mesh2D refine4(const Mesh2D& mesh) {
  Mesh2D out;
  out.nodes = mesh.nodes;
  std::map<std::pair<int, int>, int> midpoint;
  const auto mid = [&](int a, int b) {
    const auto key = undirected(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(out.nodes.size());
    out.nodes.emplace_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
    midpoint.emplace(key, idx);
    return idx;
  };

  for (const auto& t : mesh.triangles) {
    const int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
    out.triangles.push_back({t[0], m01, m20});
    out.triangles.push_back({t[1], m12, m01});
    out.triangles.push_back({t[2], m20, m12});
    out.triangles.push_back({m01, m12, m20});
  }
  for (const auto& e : mesh.boundary_edges) {
    const int m = mid(e.a, e.b);
    out.boundary_edges.push_back({e.a, m, e.label});
    out.boundary_edges.push_back({m, e.b, e.label});
  }
  validate(out);
  return out;
}

double triangle_area(const Mesh2D& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Eigen::Vector2d a = mesh.nodes[tri[0]], b = mesh.nodes[tri[1]], c = mesh.nodes[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

void validate(const Mesh2D& mesh) {
  const int m = mesh.node_count();
  if (m < 3 || mesh.triangles.empty()) throw std::runtime_error("mesh: too few nodes or triangles");

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t])
      if (v < 0 || v >= m)
        throw std::runtime_error("mesh: triangle " + std::to_string(t) + " references node " +
                                 std::to_string(v) + " out of range");
    const double area = triangle_area(mesh, static_cast<int>(t));
    if (area <= 0.0)
      throw std::runtime_error("mesh: triangle " + std::to_string(t) +
                               " is clockwise or degenerate (signed area " +
                               std::to_string(area) + ")");
  }

  // Edge incidences computed from the triangles.
  std::map<std::pair<int, int>, int> incidence;
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k) incidence[undirected(tri[k], tri[(k + 1) % 3])]++;

  std::set<std::pair<int, int>> computed_boundary;
  for (const auto& [edge, count] : incidence) {
    if (count > 2)
      throw std::runtime_error("mesh: edge (" + std::to_string(edge.first) + "," +
                               std::to_string(edge.second) + ") shared by more than two triangles");
    if (count == 1) computed_boundary.insert(edge);
  }

  std::set<std::pair<int, int>> declared;
  bool has_dirichlet = false;
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    const auto& e = mesh.boundary_edges[i];
    if (e.a < 0 || e.a >= m || e.b < 0 || e.b >= m || e.a == e.b)
      throw std::runtime_error("mesh: boundary edge " + std::to_string(i) + " has invalid nodes");
    const auto key = undirected(e.a, e.b);
    if (!computed_boundary.count(key))
      throw std::runtime_error("mesh: boundary edge (" + std::to_string(e.a) + "," +
                               std::to_string(e.b) + ") does not belong to exactly one triangle");
    if (!declared.insert(key).second)
      throw std::runtime_error("mesh: boundary edge (" + std::to_string(e.a) + "," +
                               std::to_string(e.b) + ") declared twice");
    has_dirichlet = has_dirichlet || e.label == BoundaryLabel::Dirichlet;
  }
  if (declared != computed_boundary) {
    for (const auto& edge : computed_boundary)
      if (!declared.count(edge))
        throw std::runtime_error("mesh: boundary edge (" + std::to_string(edge.first) + "," +
                                 std::to_string(edge.second) + ") lacks a label");
  }
  if (!has_dirichlet) throw std::runtime_error("mesh: the Dirichlet boundary part must be nonempty");
}

std::vector<bool> dirichlet_nodes(const Mesh2D& mesh) {
  std::vector<bool> on(mesh.node_count(), false);
  for (const auto& e : mesh.boundary_edges)
    if (e.label == BoundaryLabel::Dirichlet) on[e.a] = on[e.b] = true;
  return on;
}

Mesh2D load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_mesh: cannot open " + path);

  int lineno = 0;
  std::string line;
  const auto next_line = [&]() -> std::istringstream {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return std::istringstream(line);
    }
    fail(path, lineno, "unexpected end of file");
  };

  Mesh2D mesh;
  int m = 0, k = 0, b = 0;
  {
    auto s = next_line();
    if (!(s >> m >> k >> b) || m < 0 || k < 0 || b < 0)
      fail(path, lineno, "malformed counts header, expected `m k b`");
  }
  for (int i = 0; i < m; ++i) {
    auto s = next_line();
    double x, y;
    if (!(s >> x >> y)) fail(path, lineno, "malformed node line, expected `x y`");
    mesh.nodes.emplace_back(x, y);
  }
  for (int t = 0; t < k; ++t) {
    auto s = next_line();
    int i, j, l;
    if (!(s >> i >> j >> l)) fail(path, lineno, "malformed triangle line, expected `i j l`");
    for (int v : {i, j, l})
      if (v < 0 || v >= m) fail(path, lineno, "triangle node index out of range");
    mesh.triangles.push_back({i, j, l});
    if (triangle_area(mesh, t) <= 0.0)
      fail(path, lineno, "triangle " + std::to_string(t) + " is clockwise or degenerate");
  }
  for (int e = 0; e < b; ++e) {
    auto s = next_line();
    int i, j;
    std::string label;
    if (!(s >> i >> j >> label) || (label != "D" && label != "N"))
      fail(path, lineno, "malformed boundary edge line, expected `i j D|N`");
    if (i < 0 || i >= m || j < 0 || j >= m) fail(path, lineno, "boundary edge node index out of range");
    mesh.boundary_edges.push_back(
        {i, j, label == "D" ? BoundaryLabel::Dirichlet : BoundaryLabel::Neumann});
  }
  try {
    validate(mesh);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return mesh;
}

void save_mesh(const Mesh2D& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_mesh: cannot open " + path);
  out << mesh.node_count() << " " << mesh.triangle_count() << " " << mesh.boundary_edges.size()
      << "\n";
  char buf[80];
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x(), p.y());
    out << buf;
  }
  for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  for (const auto& e : mesh.boundary_edges)
    out << e.a << " " << e.b << " " << (e.label == BoundaryLabel::Dirichlet ? "D" : "N") << "\n";
  if (!out) throw std::runtime_error("save_mesh: write failed for " + path);
}

}  // namespace emm
