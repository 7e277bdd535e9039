#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "calderon/types.hpp"

namespace calderon {

/// Piecewise-linear triangular mesh with tagged boundary vertex loops.
struct TriMesh {
  std::vector<cplx> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<int> outer_boundary;            // ordered counterclockwise
  std::vector<int> inner_boundary;            // annulus only, ordered counterclockwise

  int n_vertices() const { return static_cast<int>(vertices.size()); }
};

/// Disk mesh built from `rings` concentric vertex rings; ring j carries 6 j
/// vertices, so the triangles are near-equilateral and the boundary has
/// 6 * rings vertices.
TriMesh make_disk_mesh(double radius, int rings);

/// Annulus mesh: n_radial + 1 rings of n_angular vertices each.
TriMesh make_annulus_mesh(double r_inner, double r_outer, int n_angular, int n_radial);

/// Stiffness matrix of  a(u, v) = sum_T gamma_T * int_T grad u . grad v,
/// with gamma_T the average of gamma at the three edge midpoints.
Eigen::SparseMatrix<double> assemble_stiffness(const TriMesh& mesh, const std::function<double(cplx)>& gamma);

double mesh_area(const TriMesh& mesh);

}  // namespace calderon
