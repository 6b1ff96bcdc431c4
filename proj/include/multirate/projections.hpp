#pragma once

#include <functional>

#include "multirate/fespace.hpp"

namespace multirate {

/// Scalar-node numbering for the globally continuous space: matching
/// interface nodes of the two subdomain spaces share one merged id.
/// Construction verifies that paired nodes coincide geometrically.
class MergedNodes {
 public:
  MergedNodes(const CoupledMesh& cm, const FESpace& s1, const FESpace& s2);
  int merged(int j, int node) const { return j == 1 ? map1_[node] : map2_[node]; }
  int count() const { return count_; }

 private:
  std::vector<int> map1_, map2_;
  int count_ = 0;
};

struct CoupledField {
  Eigen::VectorXd u1, u2;
};

/// Per-subdomain gradient handle of the exact solution: vdim x dim matrix.
using CoupledGradFn = std::function<Eigen::MatrixXd(int j, double x, double y)>;

/// Elliptic (Ritz) projection onto the continuous-across-the-interface space
/// of order r: (grad Ru, grad phi)_Omega = (grad u, grad phi)_Omega with
/// homogeneous Dirichlet values on the whole outer boundary.  Traces of the
/// result agree across the interface exactly (shared dofs).
CoupledField ritz_projection(const CoupledMesh& cm, int order, int vdim,
                             const CoupledGradFn& grad_exact);

/// Divergence-constrained Ritz projection for velocity fields; the order r-1
/// multiplier enforcing the constraint stays internal.
CoupledField stokes_ritz_projection(const CoupledMesh& cm, int order,
                                    const CoupledGradFn& grad_exact);

/// L2 projection onto one subdomain space: (Pf, psi) = (f, psi).
Eigen::VectorXd l2_projection(const FESpace& s, const SpaceFn& f);

}  // namespace multirate
