// SPDX-License-Identifier: MIT
//
// Discrete inf-sup constants from the Schur pencil B G^{-1} B^T x = beta^2 M x.
#include "alfeld/errors.hpp"
#include "alfeld/verify.hpp"

#include "assembly_detail.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace alfeld {

PairSpec psi_pair(int k)
{
  return {PairSpec::Conforming, Family::HighPsi, k, DispSpace::poly(k - 1), false,
          "HighPsi x P" + std::to_string(k - 1)};
}

PairSpec reduced_projected_pair(int k)
{
  return {PairSpec::Conforming, Family::HighReduced, k, DispSpace::poly(k - 1), true,
          "HighReduced x P" + std::to_string(k - 1) + " (projected div)"};
}

PairSpec linear_pair(Family f)
{
  if (!is_linear(f))
    throw DomainError("linear_pair: " + to_string(f) + " is not a linear family");
  const DispSpace ds = f == Family::LinearPhiSplit ? DispSpace::poly(1) : DispSpace::rm();
  return {PairSpec::Conforming, f, 1, ds, false, to_string(f) + " x " + ds.str()};
}

PairSpec broken_pk_pair(int k)
{
  return {PairSpec::BrokenPkConforming, Family::HighReduced, k, DispSpace::poly(k - 1), false,
          "H(div) cap P" + std::to_string(k) + " x P" + std::to_string(k - 1)};
}

namespace {

struct CellBlocks {
  Eigen::MatrixXd G;  // ||tau||^2 + ||div tau||^2 (or projected)
  Eigen::MatrixXd B;  // (div tau, v)
  Eigen::MatrixXd Mu; // displacement mass
};

CellBlocks cell_blocks(const ElementSpace& e, const PairSpec& pair)
{
  // compliance with mu = 1/2, lambda = 0 is the Frobenius L2 Gram
  const detail::LocalOps o = detail::local_ops(e, pair.disp, 0.5, 0.0);
  CellBlocks b;
  b.B = o.B;
  b.Mu = o.Mu;
  b.G = o.A + (pair.projected_div ? Eigen::MatrixXd(o.B.transpose() * o.Mu.ldlt().solve(o.B)) : o.DD);
  return b;
}

// Pieces of a conforming P_k(T_h; S) field without enrichment: the null space
// of the coarse normal jumps acting on broken P_k(T; S).
Eigen::MatrixXd broken_pk_basis(const Mesh& mesh, const std::vector<SplitCell>& cells, const FieldSpace& fs,
                                const std::vector<Eigen::MatrixXd>& emb)
{
  const int d = mesh.dim;
  const SymIndex si(d);
  const int nloc = static_cast<int>(emb[0].cols());
  std::vector<Eigen::RowVectorXd> rows;
  for (const MeshFace& F : mesh.faces) {
    if (F.boundary())
      continue;
    std::vector<std::vector<QPoint>> pts(2);
    for (int s = 0; s < 2; ++s) {
      std::vector<int> labels;
      for (int l = 0; l <= d; ++l)
        if (l != F.local[s])
          labels.push_back(l);
      pts[s] = entity_points(cells[F.cell[s]], labels, F.local[s], 2 * fs.degree());
    }
    for (std::size_t q = 0; q < pts[0].size(); ++q)
      for (int a = 0; a < d; ++a) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(mesh.num_cells() * nloc);
        for (int s = 0; s < 2; ++s) {
          const int c = F.cell[s];
          const QPoint& p = pts[s][q];
          const Eigen::MatrixXd vals = field_values(fs, emb[c], p.piece, p.mu);
          for (int j = 0; j < nloc; ++j)
            r(c * nloc + j) += (s == 0 ? 1.0 : -1.0) * (si.unpack(vals.col(j)) * F.normal)(a);
        }
        rows.push_back(r);
      }
  }
  Eigen::MatrixXd C(rows.size(), mesh.num_cells() * nloc);
  for (std::size_t i = 0; i < rows.size(); ++i)
    C.row(i) = rows[i];
  if (C.rows() == 0)
    return Eigen::MatrixXd::Identity(C.cols(), C.cols());
  return null_space(C);
}

double smallest_generalized(const Eigen::MatrixXd& S, const std::vector<Eigen::MatrixXd>& Mblocks,
                            Eigen::VectorXd* vec)
{
  // M is block diagonal: reduce with its Cholesky factor
  const int n = static_cast<int>(S.rows());
  Eigen::MatrixXd Linv = Eigen::MatrixXd::Zero(n, n);
  int off = 0;
  for (const auto& M : Mblocks) {
    const Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
      throw NumericalError("infsup: displacement mass is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    Linv.block(off, off, M.rows(), M.rows()) =
        L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(M.rows(), M.rows()));
    off += static_cast<int>(M.rows());
  }
  Eigen::MatrixXd T = Linv * S * Linv.transpose();
  T = 0.5 * (T + T.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, vec ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("infsup: eigensolver failed");
  if (vec)
    *vec = Linv.transpose() * es.eigenvectors().col(0);
  return es.eigenvalues()(0);
}

} // namespace

InfSupLevel infsup_level(const Mesh& mesh, const PairSpec& pair, Eigen::VectorXd* kernel)
{
  const int d = mesh.dim;
  const int nc = mesh.num_cells();
  const int nu = pair.disp.per_cell(d);
  InfSupLevel lv;
  lv.h = mesh.max_diameter();
  lv.disp_dofs = nc * nu;
  std::vector<Eigen::MatrixXd> Mblocks(nc);
  Eigen::MatrixXd S;

  if (pair.stress == PairSpec::Conforming) {
    ElementCache cache;
    const GlobalSpace gs = global_space(mesh, pair.family, pair.k, &cache);
    lv.stress_dofs = gs.ndofs;
    std::map<const ElementSpace*, CellBlocks> blocks;
    std::vector<Eigen::Triplet<double>> tg, tb;
    for (int c = 0; c < nc; ++c) {
      const ElementSpace* e = gs.element[c].get();
      if (!blocks.count(e))
        blocks.emplace(e, cell_blocks(*e, pair));
      const CellBlocks& b = blocks.at(e);
      const auto& map = gs.cell_map[c];
      for (int i = 0; i < e->dim(); ++i)
        for (int j = 0; j < e->dim(); ++j)
          if (b.G(i, j) != 0.0)
            tg.emplace_back(map[i], map[j], b.G(i, j));
      for (int r = 0; r < nu; ++r)
        for (int j = 0; j < e->dim(); ++j)
          if (b.B(r, j) != 0.0)
            tb.emplace_back(c * nu + r, map[j], b.B(r, j));
      Mblocks[c] = b.Mu;
    }
    Eigen::SparseMatrix<double> G(gs.ndofs, gs.ndofs), B(nc * nu, gs.ndofs);
    G.setFromTriplets(tg.begin(), tg.end());
    B.setFromTriplets(tb.begin(), tb.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(G);
    if (ldlt.info() != Eigen::Success)
      throw NumericalError("infsup: stress Gram factorization failed");
    const Eigen::SparseMatrix<double> Bt = B.transpose();
    S = Eigen::MatrixXd::Zero(nc * nu, nc * nu);
    const int chunk = 256;
    for (int c0 = 0; c0 < nc * nu; c0 += chunk) {
      const int w = std::min(chunk, nc * nu - c0);
      const Eigen::MatrixXd rhs = Eigen::MatrixXd(Bt.middleCols(c0, w));
      const Eigen::MatrixXd X = ldlt.solve(rhs);
      S.middleCols(c0, w) = B * X;
    }
  } else {
    const FieldSpace fs = sym_space(d, pair.k);
    std::vector<SplitCell> cells;
    std::vector<Eigen::MatrixXd> emb;
    for (int c = 0; c < nc; ++c) {
      cells.emplace_back(mesh.cell_vertices(c));
      emb.push_back(coarse_sym_polys(cells.back(), fs, pair.k));
    }
    const Eigen::MatrixXd Z = broken_pk_basis(mesh, cells, fs, emb);
    const int nloc = static_cast<int>(emb[0].cols());
    lv.stress_dofs = static_cast<int>(Z.cols());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Z.cols(), Z.cols());
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nc * nu, Z.cols());
    for (int c = 0; c < nc; ++c) {
      ElementSpace e;
      e.d = d;
      e.k = pair.k;
      e.cell = cells[c];
      e.fs = fs;
      e.nodal = emb[c];
      const CellBlocks b = cell_blocks(e, pair);
      const Eigen::MatrixXd Zc = Z.middleRows(c * nloc, nloc);
      G += Zc.transpose() * b.G * Zc;
      B.middleRows(c * nu, nu) = b.B * Zc;
      Mblocks[c] = b.Mu;
    }
    S = B * Eigen::LDLT<Eigen::MatrixXd>(G).solve(B.transpose());
  }
  const double l = smallest_generalized(S, Mblocks, kernel);
  lv.beta = std::sqrt(std::max(l, 0.0));
  return lv;
}

InfSupReport infsup_constant(const std::vector<Mesh>& meshes, const std::vector<int>& labels, const PairSpec& pair)
{
  InfSupReport r;
  r.pair = pair.name;
  r.norm = pair.projected_div ? "||tau||^2 + ||Q div tau||^2" : "||tau||^2 + ||div tau||^2";
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    InfSupLevel lv = infsup_level(meshes[i], pair, i + 1 == meshes.size() ? &r.kernel : nullptr);
    lv.n = i < labels.size() ? labels[i] : static_cast<int>(i);
    r.levels.push_back(lv);
  }
  double lo = INFINITY, hi = 0;
  for (const auto& lv : r.levels) {
    lo = std::min(lo, lv.beta);
    hi = std::max(hi, lv.beta);
  }
  r.min_beta = r.levels.empty() ? 0 : lo;
  r.ratio = lo > 0 ? hi / lo : INFINITY;
  return r;
}

InfSupReport infsup_constant(int d, const std::vector<int>& box_levels, const PairSpec& pair)
{
  std::vector<Mesh> meshes;
  for (int n : box_levels)
    meshes.push_back(uniform_box_mesh(d, n));
  return infsup_constant(meshes, box_levels, pair);
}

} // namespace alfeld
