// SPDX-License-Identifier: MIT
#include "alfeld/mesh.hpp"

#include "alfeld/errors.hpp"
#include "alfeld/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace alfeld {

Eigen::VectorXd CellGeometry::barycentric(const Eigen::VectorXd& x) const
{
  Eigen::VectorXd lam(d + 1);
  Eigen::VectorXd y = x - v.col(0);
  for (int i = 0; i <= d; ++i)
    lam(i) = grad.col(i).dot(y);
  lam(0) += 1.0;
  return lam;
}

double simplex_measure(const Eigen::MatrixXd& p)
{
  const int l = static_cast<int>(p.cols()) - 1;
  if (l == 0)
    return 1.0;
  Eigen::MatrixXd e(p.rows(), l);
  for (int m = 0; m < l; ++m)
    e.col(m) = p.col(m + 1) - p.col(0);
  const double g = (e.transpose() * e).determinant();
  return std::sqrt(std::max(g, 0.0)) / factorial(l);
}

CellGeometry geometry_pack(const Eigen::MatrixXd& vertices)
{
  const int d = static_cast<int>(vertices.rows());
  if (vertices.cols() != d + 1)
    throw GeometryError("geometry_pack: need d+1 vertices in R^d");
  CellGeometry g;
  g.d = d;
  g.v = vertices;
  g.vc = vertices.rowwise().mean();
  g.diameter = 0;
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j)
      g.diameter = std::max(g.diameter, (vertices.col(i) - vertices.col(j)).norm());
  Eigen::MatrixXd e(d, d);
  for (int m = 0; m < d; ++m)
    e.col(m) = vertices.col(m + 1) - vertices.col(0);
  g.volume = std::abs(e.determinant()) / factorial(d);
  if (!(g.volume > 1e-12 * std::pow(g.diameter, d)))
    throw GeometryError("geometry_pack: degenerate cell");
  const Eigen::MatrixXd inv = e.inverse();
  g.grad.resize(d, d + 1);
  for (int m = 0; m < d; ++m)
    g.grad.col(m + 1) = inv.row(m).transpose();
  g.grad.col(0) = -g.grad.rightCols(d).rowwise().sum();
  g.normal.resize(d, d + 1);
  g.height.resize(d + 1);
  for (int i = 0; i <= d; ++i) {
    const double nrm = g.grad.col(i).norm();
    g.height(i) = 1.0 / nrm;
    g.normal.col(i) = -g.grad.col(i) / nrm;
  }
  return g;
}

int Mesh::num_boundary_faces() const
{
  return static_cast<int>(std::count_if(faces.begin(), faces.end(), [](auto& f) { return f.boundary(); }));
}

Eigen::MatrixXd Mesh::cell_vertices(int c) const
{
  Eigen::MatrixXd v(dim, dim + 1);
  for (int i = 0; i <= dim; ++i)
    v.col(i) = points.col(cells[c][i]);
  return v;
}

CellGeometry Mesh::geometry(int c) const { return geometry_pack(cell_vertices(c)); }

double Mesh::max_diameter() const
{
  double h = 0;
  for (int c = 0; c < num_cells(); ++c)
    h = std::max(h, geometry(c).diameter);
  return h;
}

double Mesh::total_volume() const
{
  double v = 0;
  for (int c = 0; c < num_cells(); ++c)
    v += geometry(c).volume;
  return v;
}

namespace {

bool inside(const CellGeometry& g, const Eigen::VectorXd& x, double tol)
{
  return g.barycentric(x).minCoeff() >= -tol;
}

// Geometric part of the conformity check: no vertex may touch a cell it does
// not belong to, and every boundary face must face the exterior.
void check_geometric_conformity(const Mesh& m, const std::vector<CellGeometry>& geo)
{
  const int d = m.dim;
  std::vector<Eigen::VectorXd> lo(m.num_cells()), hi(m.num_cells());
  for (int c = 0; c < m.num_cells(); ++c) {
    lo[c] = geo[c].v.rowwise().minCoeff();
    hi[c] = geo[c].v.rowwise().maxCoeff();
  }
  auto candidates = [&](const Eigen::VectorXd& x, double pad) {
    std::vector<int> out;
    for (int c = 0; c < m.num_cells(); ++c)
      if (((x.array() >= lo[c].array() - pad) && (x.array() <= hi[c].array() + pad)).all())
        out.push_back(c);
    return out;
  };
  for (int vtx = 0; vtx < m.num_vertices(); ++vtx) {
    const Eigen::VectorXd x = m.points.col(vtx);
    for (int c : candidates(x, 1e-12)) {
      if (std::binary_search(m.cells[c].begin(), m.cells[c].end(), vtx))
        continue;
      if (inside(geo[c], x, 1e-10))
        throw ConformityError("build_mesh: vertex " + std::to_string(vtx) + " touches cell " +
                              std::to_string(c) + " without being one of its vertices");
    }
  }
  for (const auto& f : m.faces) {
    if (!f.boundary())
      continue;
    Eigen::VectorXd xc = Eigen::VectorXd::Zero(d);
    for (int v : f.verts)
      xc += m.points.col(v);
    xc /= d;
    const Eigen::VectorXd x = xc + 1e-7 * geo[f.cell[0]].diameter * f.normal;
    for (int c : candidates(x, 0.0))
      if (inside(geo[c], x, 0.0))
        throw ConformityError("build_mesh: boundary face of cell " + std::to_string(f.cell[0]) +
                              " overlaps cell " + std::to_string(c));
  }
}

} // namespace

Mesh build_mesh(const Eigen::MatrixXd& points, const std::vector<std::vector<int>>& cells)
{
  Mesh m;
  m.dim = static_cast<int>(points.rows());
  const int d = m.dim;
  if (d < 1)
    throw DomainError("build_mesh: dimension must be >= 1");
  m.points = points;
  m.cells.reserve(cells.size());
  for (const auto& c : cells) {
    if (static_cast<int>(c.size()) != d + 1)
      throw DomainError("build_mesh: each cell needs d+1 vertices");
    std::vector<int> s = c;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
      throw DomainError("build_mesh: repeated vertex in a cell");
    if (s.front() < 0 || s.back() >= points.cols())
      throw DomainError("build_mesh: vertex index out of range");
    m.cells.push_back(std::move(s));
  }
  std::vector<CellGeometry> geo;
  geo.reserve(m.cells.size());
  for (int c = 0; c < m.num_cells(); ++c) {
    try {
      geo.push_back(m.geometry(c));
    } catch (const GeometryError&) {
      throw GeometryError("build_mesh: cell " + std::to_string(c) + " is degenerate");
    }
  }

  std::map<std::vector<int>, int> lookup;
  m.cell_faces.assign(m.num_cells(), std::vector<int>(d + 1));
  m.cell_face_sign.assign(m.num_cells(), std::vector<int>(d + 1));
  for (int c = 0; c < m.num_cells(); ++c) {
    for (int p = 0; p <= d; ++p) {
      std::vector<int> fv;
      for (int q = 0; q <= d; ++q)
        if (q != p)
          fv.push_back(m.cells[c][q]);
      auto [it, fresh] = lookup.try_emplace(fv, m.num_faces());
      if (fresh) {
        MeshFace f;
        f.verts = fv;
        f.cell = {c, -1};
        f.local = {p, -1};
        f.normal = geo[c].normal.col(p);
        m.faces.push_back(std::move(f));
        m.cell_face_sign[c][p] = 1;
      } else {
        MeshFace& f = m.faces[it->second];
        if (f.cell[1] >= 0)
          throw ConformityError("build_mesh: face shared by more than two cells");
        f.cell[1] = c;
        f.local[1] = p;
        m.cell_face_sign[c][p] = -1;
      }
      m.cell_faces[c][p] = it->second;
    }
  }
  check_geometric_conformity(m, geo);
  return m;
}

Mesh uniform_box_mesh(int d, int n)
{
  if (d != 2 && d != 3)
    throw DomainError("uniform_box_mesh: d must be 2 or 3");
  if (n < 1)
    throw DomainError("uniform_box_mesh: n must be >= 1");
  const int np = n + 1;
  int nv = 1;
  for (int a = 0; a < d; ++a)
    nv *= np;
  Eigen::MatrixXd pts(d, nv);
  auto id = [&](const std::vector<int>& ix) {
    int r = 0, s = 1;
    for (int a = 0; a < d; ++a) {
      r += ix[a] * s;
      s *= np;
    }
    return r;
  };
  for (int v = 0; v < nv; ++v) {
    int r = v;
    for (int a = 0; a < d; ++a) {
      pts(a, v) = static_cast<double>(r % np) / n;
      r /= np;
    }
  }
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> cells;
  int ncubes = 1;
  for (int a = 0; a < d; ++a)
    ncubes *= n;
  for (int q = 0; q < ncubes; ++q) {
    std::vector<int> org(d);
    int r = q;
    for (int a = 0; a < d; ++a) {
      org[a] = r % n;
      r /= n;
    }
    std::vector<int> p = perm;
    do {
      std::vector<int> cur = org;
      std::vector<int> cell{id(cur)};
      for (int a = 0; a < d; ++a) {
        ++cur[p[a]];
        cell.push_back(id(cur));
      }
      cells.push_back(cell);
    } while (std::next_permutation(p.begin(), p.end()));
  }
  return build_mesh(pts, cells);
}

Mesh read_mesh(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw DomainError("read_mesh: cannot open " + path);
  int d = 0, nv = 0, nc = 0;
  if (!(in >> d >> nv >> nc) || d < 1 || nv < 0 || nc < 0)
    throw DomainError("read_mesh: bad header in " + path);
  Eigen::MatrixXd pts(d, nv);
  for (int v = 0; v < nv; ++v)
    for (int a = 0; a < d; ++a)
      if (!(in >> pts(a, v)))
        throw DomainError("read_mesh: truncated coordinates in " + path);
  std::vector<std::vector<int>> cells(nc, std::vector<int>(d + 1));
  for (auto& c : cells)
    for (auto& i : c)
      if (!(in >> i))
        throw DomainError("read_mesh: truncated cells in " + path);
  return build_mesh(pts, cells);
}

void write_mesh(const std::string& path, const Mesh& mesh)
{
  std::ofstream out(path);
  if (!out)
    throw DomainError("write_mesh: cannot open " + path);
  out << mesh.dim << ' ' << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  out << std::setprecision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    for (int a = 0; a < mesh.dim; ++a)
      out << (a ? " " : "") << mesh.points(a, v);
    out << '\n';
  }
  for (const auto& c : mesh.cells) {
    for (std::size_t i = 0; i < c.size(); ++i)
      out << (i ? " " : "") << c[i];
    out << '\n';
  }
}

SplitMesh barycentric_refine(const Mesh& mesh)
{
  const int d = mesh.dim;
  const int nv = mesh.num_vertices();
  SplitMesh s;
  s.coarse = mesh;
  Eigen::MatrixXd pts(d, nv + mesh.num_cells());
  pts.leftCols(nv) = mesh.points;
  std::vector<std::vector<int>> cells;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    pts.col(nv + c) = mesh.cell_vertices(c).rowwise().mean();
    s.barycenter.push_back(nv + c);
    std::vector<int> kids;
    for (int i = 0; i <= d; ++i) {
      std::vector<int> cell;
      for (int q = 0; q <= d; ++q)
        if (q != i)
          cell.push_back(mesh.cells[c][q]);
      cell.push_back(nv + c);
      kids.push_back(static_cast<int>(cells.size()));
      s.parent.push_back({c, i});
      cells.push_back(cell);
    }
    s.children.push_back(kids);
  }
  s.fine = build_mesh(pts, cells);
  std::map<std::vector<int>, int> lookup;
  for (int f = 0; f < s.fine.num_faces(); ++f)
    lookup[s.fine.faces[f].verts] = f;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    std::vector<int> ids;
    for (int i = 0; i <= d; ++i)
      for (int j = i + 1; j <= d; ++j) {
        std::vector<int> fv;
        for (int q = 0; q <= d; ++q)
          if (q != i && q != j)
            fv.push_back(mesh.cells[c][q]);
        fv.push_back(nv + c);
        ids.push_back(lookup.at(fv));
      }
    s.interior_faces.push_back(ids);
  }
  return s;
}

} // namespace alfeld
