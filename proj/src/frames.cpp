// SPDX-License-Identifier: MIT
#include "alfeld/frames.hpp"

#include "alfeld/errors.hpp"

#include <cmath>

namespace alfeld {

namespace {

void fix_sign(Eigen::MatrixXd& q)
{
  for (int c = 0; c < q.cols(); ++c)
    for (int r = 0; r < q.rows(); ++r)
      if (std::abs(q(r, c)) > 1e-12) {
        if (q(r, c) < 0)
          q.col(c) *= -1.0;
        break;
      }
}

} // namespace

Eigen::MatrixXd edge_tangents(const CellGeometry& g, const std::vector<int>& labels)
{
  const int l = static_cast<int>(labels.size()) - 1;
  Eigen::MatrixXd t(g.d, std::max(l, 0));
  for (int m = 1; m <= l; ++m)
    t.col(m - 1) = g.t(labels[0], labels[m]);
  return t;
}

Eigen::MatrixXd normal_frame(const Eigen::MatrixXd& tangents, int d)
{
  const int l = static_cast<int>(tangents.cols());
  if (l == 0)
    return Eigen::MatrixXd::Identity(d, d);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(tangents);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd n = Q.rightCols(d - l);
  fix_sign(n);
  return n;
}

Eigen::MatrixXd tangent_frame(const Eigen::MatrixXd& tangents)
{
  const int d = static_cast<int>(tangents.rows());
  const int l = static_cast<int>(tangents.cols());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(tangents);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd t = Q.leftCols(l);
  fix_sign(t);
  return t;
}

Eigen::MatrixXd sym_outer(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
  return 0.5 * (a * b.transpose() + b * a.transpose());
}

TNFrame build_frame(const CellGeometry& g, const IndexSet& f)
{
  const int d = g.d;
  if (f.has_c() || f.size() > d)
    throw DomainError("build_frame: f must be a subsimplex of T with dim f <= d-1");
  TNFrame fr{f, {}, {}, {}, {}, {}};
  for (int i : complement_star(f))
    fr.star.push_back(i);
  const int l = f.size() - 1;
  const int nn = d - l;
  fr.tangents = edge_tangents(g, f.labels());
  fr.face_normals.resize(d, nn);
  fr.tn_normals.resize(d, nn);
  fr.dual_normals.resize(d, nn);
  for (int m = 0; m < nn; ++m) {
    const int i = fr.star[m];
    fr.face_normals.col(m) = g.normal.col(i);
    // surface gradient of lambda_i on f + {i}: remove the part along the
    // tangent plane's orthogonal complement
    std::vector<int> fi = f.labels();
    fi.push_back(i);
    const Eigen::MatrixXd tfi = edge_tangents(g, fi);
    const Eigen::VectorXd gr = g.grad.col(i);
    const Eigen::VectorXd coef = tfi.colPivHouseholderQr().solve(gr);
    Eigen::VectorXd s = tfi * coef;
    const double ns = s.norm();
    if (ns < 1e-14)
      throw GeometryError("build_frame: degenerate tangential-normal vector");
    s /= ns;
    fr.tn_normals.col(m) = s;
    fr.dual_normals.col(m) = s / s.dot(fr.face_normals.col(m));
  }
  return fr;
}

Eigen::MatrixXd SymSplit::normal_part() const
{
  Eigen::MatrixXd r(nn.rows(), nn.cols() + tn.cols());
  r << nn, tn;
  return r;
}

Eigen::MatrixXd SymSplit::all() const
{
  const Eigen::Index rows = std::max({tt.rows(), nn.rows(), tn.rows()});
  Eigen::MatrixXd r(rows, tt.cols() + nn.cols() + tn.cols());
  r << tt, nn, tn;
  return r;
}

SymSplit sym_decompose(const Eigen::MatrixXd& tangents, const Eigen::MatrixXd& normals)
{
  const int d = static_cast<int>(std::max(tangents.rows(), normals.rows()));
  const SymIndex si(d);
  const int l = static_cast<int>(tangents.cols());
  const int n = static_cast<int>(normals.cols());
  SymSplit s;
  s.tt.resize(si.ns, l * (l + 1) / 2);
  s.nn.resize(si.ns, n * (n + 1) / 2);
  s.tn.resize(si.ns, l * n);
  int c = 0;
  for (int a = 0; a < l; ++a)
    for (int b = a; b < l; ++b)
      s.tt.col(c++) = si.pack(sym_outer(tangents.col(a), tangents.col(b)));
  c = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      s.nn.col(c++) = si.pack(sym_outer(normals.col(a), normals.col(b)));
  c = 0;
  for (int a = 0; a < l; ++a)
    for (int b = 0; b < n; ++b)
      s.tn.col(c++) = si.pack(sym_outer(tangents.col(a), normals.col(b)));
  return s;
}

SymSplit sym_decompose(const CellGeometry& g, const IndexSet& f)
{
  if (f.has_c())
    throw DomainError("sym_decompose: f must be a subsimplex of T");
  const Eigen::MatrixXd t = edge_tangents(g, f.labels());
  if (f.size() == g.d + 1)
    return sym_decompose(t, Eigen::MatrixXd(g.d, 0));
  return sym_decompose(t, build_frame(g, f).face_normals);
}

std::vector<Eigen::MatrixXd> phi_field(const SplitCell& cell, const IndexSet& f, int i, int j)
{
  const int d = cell.dim();
  if (f.has_c() || f.contains(i) || f.contains(j) || i < 0 || j < 0 || i > d || j > d)
    throw DomainError("phi_field: need i, j in f*");
  std::vector<Eigen::MatrixXd> out(d + 1, Eigen::MatrixXd::Zero(d, d));
  if (i == j)
    return out;
  const CellGeometry& g = cell.geometry();
  const int v = f[0];
  const Eigen::VectorXd tc = g.t(v, d + 1);
  out[i] = sym_outer(tc, g.t(v, j));
  out[j] = -sym_outer(tc, g.t(v, i));
  return out;
}

Eigen::MatrixXd qnf_matrix(const SplitCell& cell, const IndexSet& f)
{
  const int d = cell.dim();
  const SymIndex si(d);
  const TNFrame fr = build_frame(cell.geometry(), f);
  const Eigen::MatrixXd N = sym_decompose(fr.tangents, fr.face_normals).normal_part();
  const int ns = static_cast<int>(fr.star.size());
  const int nphi = ns * (ns - 1) / 2;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d * ns, N.cols() + nphi);
  for (int r = 0; r < ns; ++r) {
    const int i = fr.star[r];
    const Eigen::VectorXd n = fr.face_normals.col(r);
    for (int c = 0; c < N.cols(); ++c)
      A.block(d * r, c, d, 1) = si.unpack(N.col(c)) * n;
    int c = static_cast<int>(N.cols());
    for (int a = 0; a < ns; ++a)
      for (int b = a + 1; b < ns; ++b) {
        const auto phi = phi_field(cell, f, fr.star[a], fr.star[b]);
        A.block(d * r, c++, d, 1) = phi[i] * n;
      }
  }
  return A;
}

} // namespace alfeld
