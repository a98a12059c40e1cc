#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mvem/errors.hpp"

namespace mvem {

using Point = Eigen::Vector2d;

enum class BoundaryTag { Interior, Dirichlet, Neumann };

/// Maps the midpoint of a boundary edge to its boundary condition.
using BoundaryPredicate = std::function<BoundaryTag(const Point& midpoint)>;

/// Neumann on the edges lying on y = 0, Dirichlet elsewhere.
inline BoundaryPredicate x_axis_neumann(double tol = 1e-12) {
  return [tol](const Point& m) {
    return std::abs(m.y()) <= tol ? BoundaryTag::Neumann : BoundaryTag::Dirichlet;
  };
}

inline BoundaryPredicate all_dirichlet() {
  return [](const Point&) { return BoundaryTag::Dirichlet; };
}

struct MeshEdge {
  /// Endpoints, lower vertex index first. The edge direction runs v[0] -> v[1].
  std::array<int, 2> vertices{};
  /// Global unit normal: outward normal of cells.front().
  Point normal = Point::Zero();
  /// Incident cells in ascending order (one for boundary edges, two otherwise).
  std::vector<int> cells;
  BoundaryTag tag = BoundaryTag::Interior;

  bool is_boundary() const noexcept { return cells.size() == 1; }
};

/// Polygonal mesh with counter-clockwise cells and globally oriented edges.
///
/// Local edge j of a cell joins cells[c][j] to cells[c][(j+1) % n]; cell_edges and
/// cell_edge_signs are indexed the same way. The sign relates the cell's outward
/// normal to the global edge normal.
struct PolygonalMesh {
  std::vector<Point> vertices;
  std::vector<std::vector<int>> cells;
  std::vector<MeshEdge> edges;
  std::vector<std::vector<int>> cell_edges;
  std::vector<std::vector<int>> cell_edge_signs;

  int num_vertices() const noexcept { return static_cast<int>(vertices.size()); }
  int num_cells() const noexcept { return static_cast<int>(cells.size()); }
  int num_edges() const noexcept { return static_cast<int>(edges.size()); }
};

struct ElementGeometry {
  int cell = -1;
  Point centroid = Point::Zero();
  double diameter = 0.0;
  double area = 0.0;
  /// Vertex loop (CCW).
  std::vector<Point> vertices;
  /// Per local edge.
  std::vector<int> edge_ids;
  std::vector<double> edge_lengths;
  std::vector<Point> outward_normals;
  std::vector<int> signs;
  std::vector<BoundaryTag> edge_tags;
  /// True when the local edge runs against the global edge direction.
  std::vector<bool> reversed;

  int num_edges() const noexcept { return static_cast<int>(edge_ids.size()); }
};

namespace detail {

inline double signed_area(const std::vector<Point>& loop) {
  double a = 0.0;
  const auto n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = loop[i];
    const Point& q = loop[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

inline Point outward_normal(const Point& a, const Point& b) {
  const Point t = (b - a).normalized();
  return Point(t.y(), -t.x());
}

inline std::vector<Point> cell_loop(const PolygonalMesh& mesh, int cell) {
  std::vector<Point> loop;
  loop.reserve(mesh.cells[cell].size());
  for (int v : mesh.cells[cell]) loop.push_back(mesh.vertices[v]);
  return loop;
}

} // namespace detail

/// Assigns global edge normals and per-cell orientation signs.
///
/// The global normal of each edge is the outward normal of its lowest-index cell,
/// which gets sign +1; the other incident cell gets -1.
inline PolygonalMesh orient_edges(PolygonalMesh mesh) {
  mesh.cell_edge_signs.assign(mesh.cells.size(), {});
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    auto& edge = mesh.edges[e];
    if (edge.cells.empty() || edge.cells.size() > 2)
      throw NonManifoldMesh("edge " + std::to_string(e) + " has " +
                            std::to_string(edge.cells.size()) + " incident cells");
    std::sort(edge.cells.begin(), edge.cells.end());
  }
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& loop = mesh.cells[c];
    const auto n = loop.size();
    auto& signs = mesh.cell_edge_signs[c];
    signs.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      auto& edge = mesh.edges[mesh.cell_edges[c][j]];
      const Point a = mesh.vertices[loop[j]];
      const Point b = mesh.vertices[loop[(j + 1) % n]];
      const Point nout = detail::outward_normal(a, b);
      if (edge.cells.front() == c) {
        edge.normal = nout;
        signs[j] = 1;
      } else {
        signs[j] = -1;
      }
    }
  }
  return mesh;
}

/// Builds edges, incidence, orientation and boundary tags from a vertex/cell list.
inline PolygonalMesh make_mesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells,
                               const BoundaryPredicate& boundary = all_dirichlet()) {
  PolygonalMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.cells = std::move(cells);
  const int nv = mesh.num_vertices();

  std::map<std::pair<int, int>, int> edge_lookup;
  mesh.cell_edges.resize(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& loop = mesh.cells[c];
    if (loop.size() < 3)
      throw InvalidArgument("cell " + std::to_string(c) + " has fewer than three vertices");
    for (int v : loop)
      if (v < 0 || v >= nv)
        throw InvalidArgument("cell " + std::to_string(c) + " references vertex " + std::to_string(v));
    if (detail::signed_area(detail::cell_loop(mesh, c)) <= 0.0)
      throw InvalidArgument("cell " + std::to_string(c) + " is not counter-clockwise");

    const auto n = loop.size();
    for (std::size_t j = 0; j < n; ++j) {
      const int a = loop[j];
      const int b = loop[(j + 1) % n];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_lookup.try_emplace({key.first, key.second}, mesh.num_edges());
      if (inserted) {
        MeshEdge edge;
        edge.vertices = {key.first, key.second};
        mesh.edges.push_back(edge);
      }
      mesh.edges[it->second].cells.push_back(c);
      mesh.cell_edges[c].push_back(it->second);
    }
  }

  mesh = orient_edges(std::move(mesh));

  for (auto& edge : mesh.edges) {
    if (!edge.is_boundary()) {
      edge.tag = BoundaryTag::Interior;
      continue;
    }
    const Point mid = 0.5 * (mesh.vertices[edge.vertices[0]] + mesh.vertices[edge.vertices[1]]);
    edge.tag = boundary(mid);
    if (edge.tag == BoundaryTag::Interior)
      throw InvalidArgument("boundary predicate returned Interior for a boundary edge");
  }
  return mesh;
}

/// nx-by-ny tensor grid of identical rectangles covering [0,width] x [0,height].
inline PolygonalMesh build_rectangle_grid(int nx, int ny, double width, double height,
                                          const BoundaryPredicate& boundary = x_axis_neumann()) {
  if (nx < 1 || ny < 1 || !(width > 0.0) || !(height > 0.0))
    throw InvalidArgument("rectangle grid needs nx, ny >= 1 and positive extents");
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      vertices.emplace_back(width * i / nx, height * j / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::vector<int>> cells;
  cells.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return make_mesh(std::move(vertices), std::move(cells), boundary);
}

/// Centroid, diameter, area and per-edge data of one cell.
inline ElementGeometry element_geometry(const PolygonalMesh& mesh, int cell) {
  if (cell < 0 || cell >= mesh.num_cells())
    throw InvalidArgument("cell index " + std::to_string(cell) + " out of range");
  ElementGeometry geo;
  geo.cell = cell;
  geo.vertices = detail::cell_loop(mesh, cell);
  const auto& loop = geo.vertices;
  const auto n = loop.size();

  double a2 = 0.0;
  Point c = Point::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = loop[i];
    const Point& q = loop[(i + 1) % n];
    const double cross = p.x() * q.y() - q.x() * p.y();
    a2 += cross;
    c += cross * (p + q);
  }
  geo.area = 0.5 * a2;

  double diam = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      diam = std::max(diam, (loop[i] - loop[j]).norm());
  geo.diameter = diam;

  if (!(geo.area > 1e-14 * diam * diam))
    throw DegenerateElement("cell " + std::to_string(cell) + " has area " +
                            std::to_string(geo.area));
  geo.centroid = c / (3.0 * a2);

  for (std::size_t j = 0; j < n; ++j) {
    const int e = mesh.cell_edges[cell][j];
    const Point& a = loop[j];
    const Point& b = loop[(j + 1) % n];
    geo.edge_ids.push_back(e);
    geo.edge_lengths.push_back((b - a).norm());
    geo.outward_normals.push_back(detail::outward_normal(a, b));
    geo.signs.push_back(mesh.cell_edge_signs[cell][j]);
    geo.edge_tags.push_back(mesh.edges[e].tag);
    geo.reversed.push_back(mesh.cells[cell][j] != mesh.edges[e].vertices[0]);
  }
  return geo;
}

/// Ratio between the longest and the shortest edge of the cell.
inline double aspect_ratio(const ElementGeometry& geo) {
  const auto [lo, hi] = std::minmax_element(geo.edge_lengths.begin(), geo.edge_lengths.end());
  return *hi / *lo;
}

/// Largest element diameter.
inline double mesh_size(const PolygonalMesh& mesh) {
  double h = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto loop = detail::cell_loop(mesh, c);
    for (std::size_t i = 0; i < loop.size(); ++i)
      for (std::size_t j = i + 1; j < loop.size(); ++j)
        h = std::max(h, (loop[i] - loop[j]).norm());
  }
  return h;
}

/// Reads the plain-text mesh format:
///
///   <number of vertices>
///   x y                      (one line per vertex)
///   <number of cells>
///   i0 i1 i2 ...             (one line per cell, 0-based CCW vertex indices)
///
/// Blank lines and lines starting with '#' are skipped.
inline PolygonalMesh read_mesh(std::istream& in, const BoundaryPredicate& boundary = all_dirichlet()) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line);
  }
  std::size_t cursor = 0;
  auto next_line = [&]() -> std::istringstream {
    if (cursor >= lines.size()) throw InvalidArgument("mesh file ended early");
    return std::istringstream(lines[cursor++]);
  };
  auto read_count = [&](const char* what) {
    auto ss = next_line();
    long count = -1;
    if (!(ss >> count) || count < 0) throw InvalidArgument(std::string("bad ") + what + " count");
    return static_cast<std::size_t>(count);
  };

  const auto nv = read_count("vertex");
  std::vector<Point> vertices(nv);
  for (auto& v : vertices) {
    auto ss = next_line();
    if (!(ss >> v.x() >> v.y())) throw InvalidArgument("bad vertex line");
  }
  const auto nc = read_count("cell");
  std::vector<std::vector<int>> cells(nc);
  for (auto& cell : cells) {
    auto ss = next_line();
    for (int v; ss >> v;) cell.push_back(v);
    if (!ss.eof()) throw InvalidArgument("bad cell line");
  }
  return make_mesh(std::move(vertices), std::move(cells), boundary);
}

} // namespace mvem
