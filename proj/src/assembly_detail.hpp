// SPDX-License-Identifier: MIT
// Shared between the conforming and hybridized solvers.
#pragma once

#include "alfeld/assembly.hpp"

namespace alfeld::detail {

struct LocalOps {
  Eigen::MatrixXd A;  // compliance Gram
  Eigen::MatrixXd DD; // (div, div)
  Eigen::MatrixXd B;  // (div tau, v): ndisp x nstress
  Eigen::MatrixXd Mu; // displacement mass
  Eigen::MatrixXd DN; // div of the nodal basis in vec_space(d, m - 1)
  Eigen::MatrixXd P;  // displacement basis (coarse coefficients)
};

LocalOps local_ops(const ElementSpace& e, const DispSpace& ds, double mu, double lambda);

void local_loads(const SplitCell& cell, const ElementSpace& e, const LocalOps& o, const DispSpace& ds,
                 const VectorFn& f, int qd, Eigen::VectorXd& Fv, Eigen::VectorXd& Fd);

Eigen::MatrixXd to_components(const Eigen::VectorXd& coef, int d);

} // namespace alfeld::detail
