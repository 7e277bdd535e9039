#include "calderon/mesh.hpp"

#include <cmath>

#include "calderon/error.hpp"

namespace calderon {

namespace {

double signed_area(cplx a, cplx b, cplx c) {
  return 0.5 * ((b.real() - a.real()) * (c.imag() - a.imag()) - (c.real() - a.real()) * (b.imag() - a.imag()));
}

// Stitches two closed vertex loops (inner with ni vertices, outer with no)
// whose angles start at zero, walking both by increasing angle.
void stitch_rings(std::vector<std::array<int, 3>>& tris, int inner0, int ni, int outer0, int no) {
  int i = 0, o = 0;
  while (i < ni || o < no) {
    const double next_inner = (i + 1.0) / ni;
    const double next_outer = (o + 1.0) / no;
    const int a = inner0 + i % ni;
    const int b = outer0 + o % no;
    if (o < no && (i >= ni || next_outer <= next_inner)) {
      tris.push_back({a, b, outer0 + (o + 1) % no});
      ++o;
    } else {
      tris.push_back({a, b, inner0 + (i + 1) % ni});
      ++i;
    }
  }
}

}  // namespace

TriMesh make_disk_mesh(double radius, int rings) {
  if (rings < 1) throw parameter_error("make_disk_mesh: rings must be >= 1");
  TriMesh m;
  m.vertices.push_back(0.0);
  std::vector<int> ring_start{0};
  for (int j = 1; j <= rings; ++j) {
    ring_start.push_back(m.n_vertices());
    const int count = 6 * j;
    const double r = radius * j / rings;
    for (int i = 0; i < count; ++i) m.vertices.push_back(std::polar(r, 2.0 * pi * i / count));
  }
  for (int i = 0; i < 6; ++i) m.triangles.push_back({0, 1 + i, 1 + (i + 1) % 6});
  for (int j = 2; j <= rings; ++j) stitch_rings(m.triangles, ring_start[j - 1], 6 * (j - 1), ring_start[j], 6 * j);
  for (int i = 0; i < 6 * rings; ++i) m.outer_boundary.push_back(ring_start[rings] + i);

  for (auto& t : m.triangles)
    if (signed_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) < 0) std::swap(t[1], t[2]);
  return m;
}

TriMesh make_annulus_mesh(double r_inner, double r_outer, int n_angular, int n_radial) {
  if (!(r_inner > 0.0 && r_outer > r_inner)) throw parameter_error("make_annulus_mesh: need 0 < r_inner < r_outer");
  if (n_angular < 8 || n_radial < 1) throw parameter_error("make_annulus_mesh: resolution too small");
  TriMesh m;
  for (int j = 0; j <= n_radial; ++j) {
    const double r = r_inner + (r_outer - r_inner) * j / n_radial;
    for (int i = 0; i < n_angular; ++i) m.vertices.push_back(std::polar(r, 2.0 * pi * i / n_angular));
  }
  auto id = [n_angular](int j, int i) { return j * n_angular + (i % n_angular); };
  for (int j = 0; j < n_radial; ++j) {
    for (int i = 0; i < n_angular; ++i) {
      const int a = id(j, i), b = id(j, i + 1), c = id(j + 1, i + 1), d = id(j + 1, i);
      // alternate diagonals to avoid a preferred direction
      if ((i + j) % 2 == 0) {
        m.triangles.push_back({a, b, c});
        m.triangles.push_back({a, c, d});
      } else {
        m.triangles.push_back({a, b, d});
        m.triangles.push_back({b, c, d});
      }
    }
  }
  for (auto& t : m.triangles)
    if (signed_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) < 0) std::swap(t[1], t[2]);
  for (int i = 0; i < n_angular; ++i) {
    m.inner_boundary.push_back(id(0, i));
    m.outer_boundary.push_back(id(n_radial, i));
  }
  return m;
}

Eigen::SparseMatrix<double> assemble_stiffness(const TriMesh& mesh, const std::function<double(cplx)>& gamma) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (const auto& t : mesh.triangles) {
    const cplx p[3] = {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    const double area = signed_area(p[0], p[1], p[2]);
    if (!(area > 0.0)) throw numerical_error("assemble_stiffness: degenerate or inverted triangle");
    const double g = (gamma(0.5 * (p[0] + p[1])) + gamma(0.5 * (p[1] + p[2])) + gamma(0.5 * (p[2] + p[0]))) / 3.0;
    // grad phi_i = rot90(opposite edge) / (2 area)
    cplx grad[3];
    for (int i = 0; i < 3; ++i) {
      const cplx e = p[(i + 2) % 3] - p[(i + 1) % 3];
      grad[i] = cplx(-e.imag(), e.real()) / (2.0 * area);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double dot = grad[i].real() * grad[j].real() + grad[i].imag() * grad[j].imag();
        trip.emplace_back(t[i], t[j], g * area * dot);
      }
  }
  Eigen::SparseMatrix<double> a(mesh.n_vertices(), mesh.n_vertices());
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

double mesh_area(const TriMesh& mesh) {
  double s = 0.0;
  for (const auto& t : mesh.triangles) s += signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  return s;
}

}  // namespace calderon
