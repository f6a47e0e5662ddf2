// SPDX-License-Identifier: MIT
#include "alfeld/assembly.hpp"

#include "alfeld/errors.hpp"
#include "assembly_detail.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <numbers>
#include <sstream>

namespace alfeld {

namespace {

constexpr double pi = std::numbers::pi;

} // namespace

ElasticityProblem manufactured_problem(int d, double mu, double lambda)
{
  ElasticityProblem pb;
  pb.d = d;
  pb.mu = mu;
  pb.lambda = lambda;
  // P = prod sin(pi x_j); every displacement component equals P
  auto grad = [d](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(d);
    for (int j = 0; j < d; ++j) {
      double v = pi * std::cos(pi * x(j));
      for (int l = 0; l < d; ++l)
        if (l != j)
          v *= std::sin(pi * x(l));
      g(j) = v;
    }
    return g;
  };
  auto hess = [d](const Eigen::VectorXd& x) {
    Eigen::MatrixXd H(d, d);
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) {
        double v = 1;
        for (int m = 0; m < d; ++m) {
          if (m == j && m == l)
            v *= -pi * pi * std::sin(pi * x(m));
          else if (m == j || m == l)
            v *= pi * std::cos(pi * x(m));
          else
            v *= std::sin(pi * x(m));
        }
        H(j, l) = v;
      }
    return H;
  };
  pb.u = [d](const Eigen::VectorXd& x) {
    double p = 1;
    for (int j = 0; j < d; ++j)
      p *= std::sin(pi * x(j));
    return Eigen::VectorXd::Constant(d, p);
  };
  pb.grad_u = [d, grad](const Eigen::VectorXd& x) {
    const Eigen::VectorXd g = grad(x);
    Eigen::MatrixXd G(d, d);
    for (int i = 0; i < d; ++i)
      G.row(i) = g.transpose();
    return G;
  };
  pb.sigma = [d, mu, lambda, grad](const Eigen::VectorXd& x) {
    const Eigen::VectorXd g = grad(x);
    Eigen::MatrixXd s(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        s(i, j) = mu * (g(i) + g(j));
    s.diagonal().array() += lambda * g.sum();
    return s;
  };
  pb.f = [d, mu, lambda, hess](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd H = hess(x);
    const Eigen::VectorXd rows = H.rowwise().sum();
    Eigen::VectorXd f(d);
    for (int i = 0; i < d; ++i)
      f(i) = -(mu * H.trace() + (mu + lambda) * rows(i));
    return f;
  };
  return pb;
}

ElasticityProblem divergence_free_problem(double mu, double lambda)
{
  ElasticityProblem pb;
  pb.d = 2;
  pb.mu = mu;
  pb.lambda = lambda;
  // psi = a(x) b(y), a = sin^2(pi x); u = (a b', -a' b)
  struct D {
    double v[4];
  };
  auto der = [](double t) {
    return D{{std::pow(std::sin(pi * t), 2), pi * std::sin(2 * pi * t), 2 * pi * pi * std::cos(2 * pi * t),
              -4 * pi * pi * pi * std::sin(2 * pi * t)}};
  };
  pb.u = [der](const Eigen::VectorXd& x) {
    const D a = der(x(0)), b = der(x(1));
    return Eigen::Vector2d(a.v[0] * b.v[1], -a.v[1] * b.v[0]).eval();
  };
  pb.grad_u = [der](const Eigen::VectorXd& x) {
    const D a = der(x(0)), b = der(x(1));
    Eigen::MatrixXd G(2, 2);
    G << a.v[1] * b.v[1], a.v[0] * b.v[2], -a.v[2] * b.v[0], -a.v[1] * b.v[1];
    return G;
  };
  pb.sigma = [mu, g = pb.grad_u](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd G = g(x);
    return Eigen::MatrixXd(mu * (G + G.transpose()));
  };
  pb.f = [mu, der](const Eigen::VectorXd& x) {
    const D a = der(x(0)), b = der(x(1));
    const double l1 = a.v[2] * b.v[1] + a.v[0] * b.v[3];
    const double l2 = -(a.v[3] * b.v[0] + a.v[1] * b.v[2]);
    return Eigen::Vector2d(-mu * l1, -mu * l2).eval();
  };
  return pb;
}

Eigen::MatrixXd compliance(const Eigen::MatrixXd& sigma, double mu, double lambda)
{
  const int d = static_cast<int>(sigma.rows());
  Eigen::MatrixXd r = sigma / (2 * mu);
  r.diagonal().array() -= lambda / (2 * mu * (2 * mu + d * lambda)) * sigma.trace();
  return r;
}

Eigen::MatrixXd compliance_dev_tr(const Eigen::MatrixXd& sigma, double mu, double lambda)
{
  const int d = static_cast<int>(sigma.rows());
  const double tr = sigma.trace();
  Eigen::MatrixXd dev = sigma;
  dev.diagonal().array() -= tr / d;
  Eigen::MatrixXd r = dev / (2 * mu);
  r.diagonal().array() += tr / (d * (2 * mu + d * lambda));
  return r;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const ElementSpace> ElementCache::get(Family family, const Eigen::MatrixXd& vertices, int k,
                                                      const std::vector<int>& face_sign)
{
  std::ostringstream key;
  key << static_cast<int>(family) << ':' << k << ':';
  for (int s : face_sign)
    key << (s > 0 ? '+' : '-');
  const double scale = std::max((vertices.col(1) - vertices.col(0)).norm(), 1e-300);
  for (int c = 1; c < vertices.cols(); ++c)
    for (int r = 0; r < vertices.rows(); ++r)
      key << ':' << std::llround((vertices(r, c) - vertices(r, 0)) / scale * 1e9);
  key << ':' << std::llround(std::log2(scale) * 1e9);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = map_.find(key.str());
    if (it != map_.end())
      return it->second;
  }
  auto e = std::make_shared<const ElementSpace>(build_element(family, vertices, k, face_sign));
  std::lock_guard<std::mutex> lock(mutex_);
  return map_.emplace(key.str(), e).first->second;
}

std::size_t ElementCache::size() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return map_.size();
}

int GlobalSpace::num_boundary_dofs() const
{
  int n = 0;
  for (char b : boundary)
    n += b ? 1 : 0;
  return n;
}

GlobalSpace global_space(const Mesh& mesh, Family family, int k, ElementCache* cache)
{
  ElementCache local;
  ElementCache& ec = cache ? *cache : local;
  GlobalSpace s;
  s.mesh = &mesh;
  s.family = family;
  s.k = k;
  const int nc = mesh.num_cells();
  s.element.resize(nc);
  s.cell.reserve(nc);
  for (int c = 0; c < nc; ++c) {
    const Eigen::MatrixXd X = mesh.cell_vertices(c);
    s.element[c] = ec.get(family, X, k, mesh.cell_face_sign[c]);
    s.cell.emplace_back(X);
  }
  const int d = mesh.dim;
  s.face_dofs = nc ? s.element[0]->face_dofs : 0;
  s.cell_dofs = nc ? s.element[0]->cell_dofs : 0;
  s.ndofs = mesh.num_faces() * s.face_dofs + nc * s.cell_dofs;
  s.boundary.assign(s.ndofs, 0);
  s.cell_map.resize(nc);
  for (int c = 0; c < nc; ++c) {
    auto& m = s.cell_map[c];
    m.resize((d + 1) * s.face_dofs + s.cell_dofs);
    for (int p = 0; p <= d; ++p)
      for (int t = 0; t < s.face_dofs; ++t)
        m[p * s.face_dofs + t] = mesh.cell_faces[c][p] * s.face_dofs + t;
    for (int t = 0; t < s.cell_dofs; ++t)
      m[(d + 1) * s.face_dofs + t] = mesh.num_faces() * s.face_dofs + c * s.cell_dofs + t;
  }
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (mesh.faces[f].boundary())
      for (int t = 0; t < s.face_dofs; ++t)
        s.boundary[f * s.face_dofs + t] = 1;
  return s;
}

int DispSpace::per_cell(int d) const
{
  return kind == Poly ? d * static_cast<int>(binomial(degree + d, d)) : d * (d + 1) / 2;
}

std::string DispSpace::str() const { return kind == Poly ? "P" + std::to_string(degree) : "RM"; }

Eigen::MatrixXd disp_basis(const CellGeometry& g, const DispSpace& ds)
{
  const int d = g.d;
  if (ds.kind == DispSpace::Poly) {
    const int n = ds.per_cell(d);
    return Eigen::MatrixXd::Identity(n, n);
  }
  const int nr = rm_dim(d);
  Eigen::MatrixXd P(d * (d + 1), nr);
  for (int j = 0; j <= d; ++j) {
    const Eigen::MatrixXd R = rm_values(g.v.col(j), g.vc);
    for (int a = 0; a < d; ++a)
      P.row(a * (d + 1) + j) = R.row(a);
  }
  return P;
}

Eigen::VectorXd coarse_values(int d, int r, const Eigen::VectorXd& lambda)
{
  return bernstein_values(d + 1, r, lambda);
}

Eigen::MatrixXd coarse_gradients(const CellGeometry& g, int r, const Eigen::VectorXd& lambda)
{
  const int d = g.d;
  const auto& hi = MultiIndexSet::get(d + 1, r);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(hi.size(), d);
  if (r == 0)
    return G;
  const auto& lo = MultiIndexSet::get(d + 1, r - 1);
  const Eigen::VectorXd B = bernstein_values(d + 1, r - 1, lambda);
  std::vector<int> a(d + 1);
  for (int beta = 0; beta < lo.size(); ++beta) {
    std::copy(lo[beta], lo[beta] + d + 1, a.begin());
    for (int j = 0; j <= d; ++j) {
      ++a[j];
      G.row(hi.index(a.data())) += r * B(beta) * g.grad.col(j).transpose();
      --a[j];
    }
  }
  return G;
}

Eigen::MatrixXd coarse_vec_embedding(const SplitCell& cell, int r, const FieldSpace& vfs)
{
  const int d = cell.dim();
  const auto& mi = MultiIndexSet::get(d + 1, r);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(vfs.size(), d * mi.size());
  for (int a = 0; a < mi.size(); ++a) {
    const PwPoly p = cell.from_coarse(BPoly::basis(d + 1, r, a));
    for (int c = 0; c < d; ++c)
      add_vec(E.col(c * mi.size() + a), vfs, p, Eigen::VectorXd::Unit(d, c));
  }
  return E;
}

Eigen::MatrixXd compliance_mass(const SplitCell& cell, const FieldSpace& fs, double mu, double lambda)
{
  const int d = fs.dim();
  const SymIndex si(d);
  const double c = lambda / (2 * mu * (2 * mu + d * lambda));
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(si.ns, si.ns);
  for (int s = 0; s < si.ns; ++s) {
    K(s, s) = si.weight(s) / (2 * mu);
    for (int t = 0; t < si.ns; ++t)
      if (si.ab[s].first == si.ab[s].second && si.ab[t].first == si.ab[t].second)
        K(s, t) -= c;
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(fs.size(), fs.size());
  for (int i = 0; i <= d; ++i) {
    const Eigen::MatrixXd Mb = bernstein_mass(d + 1, fs.degree(), fs.degree(), cell.sub(i).volume);
    for (int s = 0; s < si.ns; ++s)
      for (int t = 0; t < si.ns; ++t)
        if (K(s, t) != 0.0)
          M.block(fs.offset(i, s), fs.offset(i, t), fs.nalpha(), fs.nalpha()) = K(s, t) * Mb;
  }
  return M;
}

// ---------------------------------------------------------------------------

namespace detail {

LocalOps local_ops(const ElementSpace& e, const DispSpace& ds, double mu, double lambda)
{
  const int d = e.d;
  const int m = e.fs.degree();
  const int rc = ds.coef_degree();
  LocalOps o;
  o.A = e.nodal.transpose() * compliance_mass(e.cell, e.fs, mu, lambda) * e.nodal;
  o.DN = div_matrix(e.cell, e.fs) * e.nodal;
  const FieldSpace vq = vec_space(d, std::max(m - 1, rc));
  const Eigen::MatrixXd E = elevate_field(vec_space(d, m - 1), vq, o.DN);
  const Eigen::MatrixXd Mv = field_mass(e.cell, vq, Eigen::VectorXd::Ones(d));
  o.P = disp_basis(e.cell.geometry(), ds);
  const Eigen::MatrixXd V = coarse_vec_embedding(e.cell, rc, vq) * o.P;
  o.B = V.transpose() * Mv * E;
  o.DD = E.transpose() * Mv * E;
  o.Mu = V.transpose() * Mv * V;
  return o;
}

// (f, v) for the displacement basis and (f, div tau) for the nodal basis.
void local_loads(const SplitCell& cell, const ElementSpace& e, const LocalOps& o, const DispSpace& ds,
                 const VectorFn& f, int qd, Eigen::VectorXd& Fv, Eigen::VectorXd& Fd)
{
  const int d = e.d;
  const int rc = ds.coef_degree();
  const int na = MultiIndexSet::get(d + 1, rc).size();
  const FieldSpace vm = vec_space(d, e.fs.degree() - 1);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d * na);
  Fd = Eigen::VectorXd::Zero(e.dim());
  for (const QPoint& p : cell_points(cell, qd)) {
    const Eigen::VectorXd fx = f(p.x);
    const Eigen::VectorXd B = coarse_values(d, rc, cell.geometry().barycentric(p.x));
    for (int a = 0; a < d; ++a)
      g.segment(a * na, na) += p.w * fx(a) * B;
    Fd += p.w * field_values(vm, o.DN, p.piece, p.mu).transpose() * fx;
  }
  Fv = o.P.transpose() * g;
}

int default_quad(const DiscreteSolution& s, int qd)
{
  return qd > 0 ? qd : 2 * std::max(s.sfs.degree(), s.k + 2);
}

Eigen::MatrixXd to_components(const Eigen::VectorXd& coef, int d)
{
  const int na = static_cast<int>(coef.size()) / d;
  Eigen::MatrixXd U(na, d);
  for (int a = 0; a < d; ++a)
    U.col(a) = coef.segment(a * na, na);
  return U;
}

} // namespace detail

using detail::LocalOps;

namespace {

DiscreteSolution solve_conforming(const Mesh& mesh, const ElasticityProblem& pb, Family family, int k,
                                  const DispSpace& ds, bool stabilized, const SolveOptions& opt)
{
  const GlobalSpace S = global_space(mesh, family, k, opt.cache);
  const int d = mesh.dim;
  const int nc = mesh.num_cells();
  const int nu = ds.per_cell(d);
  const int N = S.ndofs + nc * nu;
  std::map<const ElementSpace*, LocalOps> ops;
  for (int c = 0; c < nc; ++c)
    if (!ops.count(S.element[c].get()))
      ops.emplace(S.element[c].get(), detail::local_ops(*S.element[c], ds, pb.mu, pb.lambda));

  DiscreteSolution sol;
  sol.mesh = &mesh;
  sol.d = d;
  sol.k = k;
  sol.sfs = S.element.empty() ? FieldSpace() : S.element[0]->fs;
  const int qd = opt.quad_degree > 0 ? opt.quad_degree : 2 * std::max(sol.sfs.degree(), k + 2);

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  for (int c = 0; c < nc; ++c) {
    const ElementSpace& e = *S.element[c];
    const LocalOps& o = ops.at(&e);
    const auto& map = S.cell_map[c];
    const Eigen::MatrixXd K = stabilized ? Eigen::MatrixXd(o.A + o.DD) : o.A;
    for (int i = 0; i < e.dim(); ++i)
      for (int j = 0; j < e.dim(); ++j)
        if (K(i, j) != 0.0)
          trip.emplace_back(map[i], map[j], K(i, j));
    const int u0 = S.ndofs + c * nu;
    for (int r = 0; r < nu; ++r)
      for (int j = 0; j < e.dim(); ++j)
        if (o.B(r, j) != 0.0) {
          trip.emplace_back(u0 + r, map[j], o.B(r, j));
          trip.emplace_back(map[j], u0 + r, o.B(r, j));
        }
    Eigen::VectorXd Fv, Fd;
    detail::local_loads(S.cell[c], e, o, ds, pb.f, qd, Fv, Fd);
    rhs.segment(u0, nu) -= Fv;
    if (stabilized)
      for (int j = 0; j < e.dim(); ++j)
        rhs(map[j]) -= Fd(j);
  }
  Eigen::SparseMatrix<double> K(N, N);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success)
    throw NumericalError("saddle-point factorization failed (" + to_string(family) + ", " + ds.str() + ")");
  const Eigen::VectorXd x = lu.solve(rhs);
  const double res = (K * x - rhs).norm() / (K.norm() * x.norm() + rhs.norm() + 1e-300);
  if (!std::isfinite(res) || res > 1e-12)
    throw NumericalError("saddle-point backward error " + std::to_string(res));

  sol.report = {stabilized ? "stabilized" : "mixed", N, res, 0};
  sol.dofs = N;
  sol.sigma_global = x.head(S.ndofs);
  sol.u_global = x.tail(nc * nu);
  sol.u_degree = ds.coef_degree();
  for (int c = 0; c < nc; ++c) {
    const ElementSpace& e = *S.element[c];
    Eigen::VectorXd loc(e.dim());
    for (int j = 0; j < e.dim(); ++j)
      loc(j) = x(S.cell_map[c][j]);
    sol.cell.push_back(S.cell[c]);
    sol.sigma_dofs.push_back(loc);
    sol.sigma.push_back(e.nodal * loc);
    sol.u.push_back(detail::to_components(ops.at(&e).P * x.segment(S.ndofs + c * nu, nu), d));
  }
  return sol;
}

} // namespace

DiscreteSolution solve_stabilized(const Mesh& mesh, const ElasticityProblem& pb, int k, const SolveOptions& opt)
{
  if (k < 2)
    throw DomainError("solve_stabilized: k >= 2 required");
  return solve_conforming(mesh, pb, Family::HighReduced, k, DispSpace::poly(k - 1), true, opt);
}

DiscreteSolution solve_mixed(const Mesh& mesh, const ElasticityProblem& pb, Family family, int k, const DispSpace& ds,
                             const SolveOptions& opt)
{
  return solve_conforming(mesh, pb, family, k, ds, false, opt);
}

// ---------------------------------------------------------------------------

void postprocess_displacement(DiscreteSolution& sol, const ElasticityProblem& pb, int quad_degree)
{
  const int d = sol.d;
  const int p = sol.k + 1;
  const int na = MultiIndexSet::get(d + 1, p).size();
  const int nr = rm_dim(d);
  const int n = d * na;
  const int qd = detail::default_quad(sol, quad_degree);
  const SymIndex si(d);
  sol.ustar_degree = p;
  sol.ustar.assign(sol.cell.size(), Eigen::MatrixXd());
  for (std::size_t c = 0; c < sol.cell.size(); ++c) {
    const SplitCell& cell = sol.cell[c];
    const CellGeometry& g = cell.geometry();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + nr, n + nr);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + nr);
    for (const QPoint& q : cell_points(cell, qd)) {
      const Eigen::VectorXd lam = g.barycentric(q.x);
      const Eigen::VectorXd B = coarse_values(d, p, lam);
      const Eigen::MatrixXd G = coarse_gradients(g, p, lam);
      // eps(B_alpha e_a) = sym(e_a grad B_alpha^T); packed with Frobenius weights
      Eigen::MatrixXd Eps = Eigen::MatrixXd::Zero(si.ns, n);
      for (int a = 0; a < d; ++a)
        for (int al = 0; al < na; ++al) {
          Eigen::MatrixXd e = Eigen::MatrixXd::Zero(d, d);
          e.row(a) = G.row(al);
          Eps.col(a * na + al) = si.pack(e);
        }
      Eigen::VectorXd w(si.ns);
      for (int s = 0; s < si.ns; ++s)
        w(s) = si.weight(s);
      const Eigen::MatrixXd sig = si.unpack(field_values(sol.sfs, sol.sigma[c], q.piece, q.mu));
      const Eigen::VectorXd asig = si.pack(compliance(sig, pb.mu, pb.lambda));
      K.topLeftCorner(n, n) += q.w * Eps.transpose() * w.asDiagonal() * Eps;
      b.head(n) += q.w * Eps.transpose() * w.asDiagonal() * asig;
      const Eigen::MatrixXd R = rm_values(q.x, g.vc);
      const Eigen::VectorXd Bu = coarse_values(d, sol.u_degree, lam);
      const Eigen::VectorXd uh = sol.u[c].transpose() * Bu;
      for (int a = 0; a < d; ++a)
        for (int al = 0; al < na; ++al)
          K.block(a * na + al, n, 1, nr) += q.w * B(al) * R.row(a);
      b.tail(nr) += q.w * R.transpose() * uh;
    }
    K.bottomLeftCorner(nr, n) = K.topRightCorner(n, nr).transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible())
      throw NumericalError("postprocess: singular local system");
    const Eigen::VectorXd x = lu.solve(b);
    if ((K * x - b).norm() > 1e-10 * std::max(1.0, b.norm()))
      throw NumericalError("postprocess: local residual above tolerance");
    sol.ustar[c] = detail::to_components(x.head(n), d);
  }
}

ErrorNorms error_norms(const DiscreteSolution& sol, const ElasticityProblem& pb, int quad_degree)
{
  if (!pb.has_exact())
    throw DomainError("error_norms: exact solution required");
  const int d = sol.d;
  const int qd = detail::default_quad(sol, quad_degree);
  const SymIndex si(d);
  double es = 0, ed = 0, eu = 0, ns = 0, eps1 = 0, face1 = 0, epost = 0;
  const bool super = sol.mult_degree >= 0;
  const bool post = sol.ustar_degree >= 0 && static_cast<bool>(pb.grad_u);
  const FieldSpace vm = vec_space(d, sol.sfs.degree() - 1);
  const Mesh& mesh = *sol.mesh;

  for (std::size_t c = 0; c < sol.cell.size(); ++c) {
    const SplitCell& cell = sol.cell[c];
    const CellGeometry& g = cell.geometry();
    const Eigen::VectorXd dsig = div_matrix(cell, sol.sfs) * sol.sigma[c];
    Eigen::MatrixXd v0;
    if (super) {
      // v0 = Q_{k-1} u - u_h
      Eigen::MatrixXd Q(MultiIndexSet::get(d + 1, sol.u_degree).size(), d);
      for (int a = 0; a < d; ++a)
        Q.col(a) = l2_project_poly(
                       cell, sol.u_degree, [&](const QPoint& p) { return pb.u(p.x)(a); }, qd)
                       .c;
      v0 = Q - sol.u[c];
    }
    for (const QPoint& p : cell_points(cell, qd)) {
      const Eigen::MatrixXd s = pb.sigma(p.x);
      const Eigen::MatrixXd sh = si.unpack(field_values(sol.sfs, sol.sigma[c], p.piece, p.mu));
      es += p.w * (s - sh).squaredNorm();
      ns += p.w * s.squaredNorm();
      const Eigen::VectorXd divh = field_values(vm, dsig, p.piece, p.mu);
      ed += p.w * (pb.f(p.x) + divh).squaredNorm();
      const Eigen::VectorXd lam = g.barycentric(p.x);
      const Eigen::VectorXd uh = sol.u[c].transpose() * coarse_values(d, sol.u_degree, lam);
      eu += p.w * (pb.u(p.x) - uh).squaredNorm();
      if (super) {
        const Eigen::MatrixXd G = v0.transpose() * coarse_gradients(g, sol.u_degree, lam);
        eps1 += p.w * (0.5 * (G + G.transpose())).squaredNorm();
      }
      if (post) {
        const Eigen::MatrixXd Gu = pb.grad_u(p.x);
        const Eigen::MatrixXd Gs = sol.ustar[c].transpose() * coarse_gradients(g, sol.ustar_degree, lam);
        const Eigen::MatrixXd E = Gu - Gs;
        epost += p.w * (0.5 * (E + E.transpose())).squaredNorm();
      }
    }
    if (super) {
      const double hinv = 1.0 / g.diameter;
      for (int q = 0; q <= d; ++q) {
        const int fid = mesh.cell_faces[c][q];
        std::vector<int> labels;
        for (int l = 0; l <= d; ++l)
          if (l != q)
            labels.push_back(l);
        const bool interior = !mesh.faces[fid].boundary();
        const int mk = sol.mult_degree;
        // Q_{k,F} u on interior faces; v_b = Q_{k,F} u - mu_h there, 0 on the boundary
        Eigen::VectorXd qF;
        const auto pts = entity_points(cell, labels, q, qd);
        if (interior) {
          const int nb = MultiIndexSet::get(d, mk).size();
          const double area = simplex_measure(cell.vertices(labels));
          const Eigen::MatrixXd Mf = bernstein_mass(d, mk, mk, area);
          Eigen::MatrixXd r = Eigen::MatrixXd::Zero(nb, d);
          for (const QPoint& p : pts)
            r += p.w * bernstein_values(d, mk, p.nu) * pb.u(p.x).transpose();
          const Eigen::MatrixXd X = Mf.ldlt().solve(r);
          qF.resize(nb * d);
          for (int a = 0; a < nb; ++a)
            for (int b = 0; b < d; ++b)
              qF(a * d + b) = X(a, b) - sol.multiplier[fid](a * d + b);
        }
        for (const QPoint& p : pts) {
          Eigen::VectorXd diff = v0.transpose() * coarse_values(d, sol.u_degree, g.barycentric(p.x));
          if (interior) {
            const Eigen::VectorXd Bf = bernstein_values(d, mk, p.nu);
            for (int a = 0; a < Bf.size(); ++a)
              diff -= Bf(a) * qF.segment(a * d, d);
          }
          face1 += hinv * p.w * diff.squaredNorm();
        }
      }
    }
  }
  ErrorNorms n;
  n.sigma_L2 = std::sqrt(es);
  n.sigma_Hdiv = std::sqrt(es + ed);
  n.u_L2 = std::sqrt(eu);
  n.sigma_norm = std::sqrt(ns);
  if (super)
    n.super_1h = std::sqrt(eps1 + face1);
  if (post)
    n.post_eps = std::sqrt(epost);
  return n;
}

double max_normal_jump(const GlobalSpace& space, const Eigen::VectorXd& coef)
{
  const Mesh& mesh = *space.mesh;
  const int d = mesh.dim;
  const SymIndex si(d);
  double jump = 0;
  std::vector<Eigen::VectorXd> field(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const ElementSpace& e = *space.element[c];
    Eigen::VectorXd loc(e.dim());
    for (int j = 0; j < e.dim(); ++j)
      loc(j) = coef(space.cell_map[c][j]);
    field[c] = e.nodal * loc;
    jump = std::max(jump, (interior_jump_matrix(e.cell, e.fs) * field[c]).cwiseAbs().maxCoeff());
  }
  for (const MeshFace& F : mesh.faces) {
    if (F.boundary())
      continue;
    const Eigen::VectorXd n = F.normal;
    std::vector<std::vector<Eigen::VectorXd>> tr(2);
    for (int s = 0; s < 2; ++s) {
      const int c = F.cell[s];
      const int p = F.local[s];
      const ElementSpace& e = *space.element[c];
      std::vector<int> labels;
      for (int l = 0; l <= d; ++l)
        if (l != p)
          labels.push_back(l);
      for (const QPoint& q : entity_points(space.cell[c], labels, p, e.fs.degree() + 1))
        tr[s].push_back(si.unpack(field_values(e.fs, field[c], q.piece, q.mu)) * n);
    }
    for (std::size_t q = 0; q < tr[0].size(); ++q)
      jump = std::max(jump, (tr[0][q] - tr[1][q]).cwiseAbs().maxCoeff());
  }
  return jump;
}

} // namespace alfeld
