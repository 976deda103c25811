#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "emm/mesh.hpp"
#include "emm/report.hpp"

using namespace emm;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("rect mesh counts") {
  const Mesh2D one = rect_mesh(1, 1);
  CHECK(one.node_count() == 4);
  CHECK(one.triangle_count() == 2);
  CHECK(one.boundary_edges.size() == 4);
  int n_dirichlet = 0;
  for (const auto& e : one.boundary_edges)
    if (e.label == BoundaryLabel::Dirichlet) ++n_dirichlet;
  CHECK(n_dirichlet == 1);

  const Mesh2D two = rect_mesh(2, 2);
  CHECK(two.node_count() == 9);
  CHECK(two.triangle_count() == 8);
}

TEST_CASE("triangle areas sum to the unit square") {
  for (int n : {1, 3, 7}) {
    const Mesh2D mesh = rect_mesh(n, n + 1);
    double total = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const double a = triangle_area(mesh, t);
      CHECK(a > 0.0);
      total += a;
    }
    CHECK(std::abs(total - 1.0) <= 1e-14);
  }
}

TEST_CASE("all-Neumann labeling is rejected") {
  SideLabels sides{BoundaryLabel::Neumann, BoundaryLabel::Neumann, BoundaryLabel::Neumann,
                   BoundaryLabel::Neumann};
  CHECK_THROWS_AS(rect_mesh(2, 2, sides), std::invalid_argument);
}

TEST_CASE("Euler relation on generated meshes") {
  for (const Mesh2D& mesh : {rect_mesh(3, 2), refine4(rect_mesh(2, 2))}) {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : mesh.triangles)
      for (int k = 0; k < 3; ++k)
        edges.insert({std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])});
    // V - E + F = 1 for a triangulated disk (outer face excluded)
    CHECK(mesh.node_count() - static_cast<int>(edges.size()) + mesh.triangle_count() == 1);
  }
}

TEST_CASE("declared boundary equals the computed boundary") {
  const Mesh2D mesh = rect_mesh(3, 3);
  std::map<std::pair<int, int>, int> incidence;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k)
      incidence[{std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])}]++;
  std::set<std::pair<int, int>> computed;
  for (const auto& [e, c] : incidence)
    if (c == 1) computed.insert(e);
  std::set<std::pair<int, int>> declared;
  for (const auto& e : mesh.boundary_edges)
    declared.insert({std::min(e.a, e.b), std::max(e.a, e.b)});
  CHECK(computed == declared);
}

TEST_CASE("refine4 preserves area and quadruples triangles") {
  const Mesh2D coarse = rect_mesh(2, 3);
  const Mesh2D fine = refine4(coarse);
  CHECK(fine.triangle_count() == 4 * coarse.triangle_count());
  CHECK(fine.boundary_edges.size() == 2 * coarse.boundary_edges.size());
  double total = 0.0;
  for (int t = 0; t < fine.triangle_count(); ++t) total += triangle_area(fine, t);
  CHECK(std::abs(total - 1.0) <= 1e-14);
}

TEST_CASE("save/load round trip is exact") {
  const Mesh2D mesh = rect_mesh(3, 3);
  const std::string path = temp_path("emm_mesh_roundtrip.txt");
  save_mesh(mesh, path);
  const Mesh2D loaded = load_mesh(path);

  REQUIRE(loaded.node_count() == mesh.node_count());
  REQUIRE(loaded.triangle_count() == mesh.triangle_count());
  REQUIRE(loaded.boundary_edges.size() == mesh.boundary_edges.size());
  for (int i = 0; i < mesh.node_count(); ++i) {
    CHECK(loaded.nodes[i].x() == mesh.nodes[i].x());
    CHECK(loaded.nodes[i].y() == mesh.nodes[i].y());
  }
  for (int t = 0; t < mesh.triangle_count(); ++t) CHECK(loaded.triangles[t] == mesh.triangles[t]);
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    CHECK(loaded.boundary_edges[e].a == mesh.boundary_edges[e].a);
    CHECK(loaded.boundary_edges[e].b == mesh.boundary_edges[e].b);
    CHECK(loaded.boundary_edges[e].label == mesh.boundary_edges[e].label);
  }
  std::filesystem::remove(path);
}

TEST_CASE("parse errors carry line numbers") {
  const std::string path = temp_path("emm_mesh_bad.txt");

  // boundary edge lacking its label on line 9
  write_file(path,
             "4 2 4\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n0 1 D\n1 2\n2 3 N\n3 0 N\n");
  try {
    load_mesh(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":9:") != std::string::npos);
  }

  // clockwise triangle named in the error
  write_file(path, "4 2 4\n0 0\n1 0\n1 1\n0 1\n0 2 1\n0 2 3\n0 1 D\n1 2 N\n2 3 N\n3 0 N\n");
  try {
    load_mesh(path);
    FAIL("expected an orientation error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("triangle 0") != std::string::npos);
    CHECK(msg.find("clockwise") != std::string::npos);
  }

  // dangling node index
  write_file(path, "3 1 3\n0 0\n1 0\n0 1\n0 1 7\n0 1 D\n1 2 N\n2 0 N\n");
  CHECK_THROWS(load_mesh(path));
  std::filesystem::remove(path);
}

TEST_CASE("missing label for a whole boundary edge is caught by validation") {
  const std::string path = temp_path("emm_mesh_gap.txt");
  write_file(path, "4 2 3\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n0 1 D\n1 2 N\n2 3 N\n");
  try {
    load_mesh(path);
    FAIL("expected a label-coverage error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("lacks a label") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("dirichlet node detection") {
  const Mesh2D mesh = rect_mesh(2, 2);  // left side Dirichlet by default
  const auto on = dirichlet_nodes(mesh);
  int count = 0;
  for (int i = 0; i < mesh.node_count(); ++i)
    if (on[i]) {
      CHECK(mesh.nodes[i].x() == 0.0);
      ++count;
    }
  CHECK(count == 3);
}
