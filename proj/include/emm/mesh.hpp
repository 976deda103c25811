// Conforming triangle meshes over polygonal 2-D domains with labeled boundary
// edges (Dirichlet / Neumann).  Text file format, one-based nothing: all
// indices are 0-based.
//
//   line 1:  m k b          (node, triangle, boundary-edge counts)
//   m lines: x y
//   k lines: i j l          (triangle vertices, counterclockwise)
//   b lines: i j D|N        (boundary edge with label)
#pragma once

#include <array>
#include <string>
#include <vector>

#include "emm/voigt.hpp"

namespace emm {

enum class BoundaryLabel { Dirichlet, Neumann };

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryLabel label = BoundaryLabel::Neumann;
};

struct Mesh2D {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
};

struct SideLabels {
  BoundaryLabel left = BoundaryLabel::Dirichlet;
  BoundaryLabel right = BoundaryLabel::Neumann;
  BoundaryLabel bottom = BoundaryLabel::Neumann;
  BoundaryLabel top = BoundaryLabel::Neumann;
};

// Unit square [0,1]^2 triangulated into 2 nx ny triangles.  Rejects an
// all-Neumann side rule (the Dirichlet part must be nonempty).
Mesh2D rect_mesh(int nx, int ny, const SideLabels& sides = {});

// Uniform quadrisection: every triangle splits into four via edge midpoints;
// boundary edges split in two and inherit their labels.
Mesh2D refine4(const Mesh2D& mesh);

// Structural validation: positive (counterclockwise) areas, every declared
// boundary edge belongs to exactly one triangle, the declared boundary set
// equals the edge set computed from the triangles (so the labels cover the
// whole boundary), and the Dirichlet part is nonempty.  Throws on violation.
void validate(const Mesh2D& mesh);

double triangle_area(const Mesh2D& mesh, int t);

// Nodes lying on at least one Dirichlet boundary edge.
std::vector<bool> dirichlet_nodes(const Mesh2D& mesh);

Mesh2D load_mesh(const std::string& path);
void save_mesh(const Mesh2D& mesh, const std::string& path);

}  // namespace emm
