#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "multirate/linalg.hpp"
#include "multirate/mesh.hpp"

namespace multirate {

/// Equispaced Lagrange basis of the given order on [0,1].
double lagrange_value(int order, int i, double x);
double lagrange_deriv(int order, int i, double x);

/// Gauss-Legendre rule mapped to [0,1].
struct QuadratureRule {
  std::vector<double> pts;
  std::vector<double> wts;
};
QuadratureRule gauss_on_unit(int n);

/// Vector-valued function of a point; 1D meshes ignore y.
using SpaceFn = std::function<Eigen::VectorXd(double, double)>;
/// Gradient handle returning a vdim x dim matrix.
using SpaceGradFn = std::function<Eigen::MatrixXd(double, double)>;

/// Continuous Lagrange space of order r (tensor product on quads) with an
/// interleaved component layout: dof = scalar_node * vdim + component.
/// Nodes on facets whose tag is listed as constrained are Dirichlet nodes.
class FESpace {
 public:
  FESpace(SubdomainMesh mesh, int order, int vdim, std::vector<BoundaryTag> constrained_tags);

  const SubdomainMesh& mesh() const { return mesh_; }
  int order() const { return order_; }
  int vdim() const { return vdim_; }
  int dim() const { return mesh_.dim(); }

  int num_scalar_nodes() const { return num_nodes_; }
  int num_dofs() const { return num_nodes_ * vdim_; }
  int nodes_per_cell() const { return npc_; }
  int dof(int scalar_node, int comp) const { return scalar_node * vdim_ + comp; }

  std::array<double, 2> node_coord(int node) const;
  void cell_nodes(int cell, std::vector<int>& out) const;
  /// Scalar nodes on one side of a cell, ascending coordinate order.
  void side_nodes(int cell, int side, std::vector<int>& out) const;

  bool node_constrained(int node) const { return node_tag_[node].has_value(); }
  std::optional<BoundaryTag> node_constraint_tag(int node) const { return node_tag_[node]; }
  bool dof_constrained(int d) const { return node_constrained(d / vdim_); }
  const std::vector<int>& free_dofs() const { return free_dofs_; }
  int num_free() const { return static_cast<int>(free_dofs_.size()); }
  /// Position of a dof among the free dofs, -1 when constrained.
  int free_index(int d) const { return free_index_[d]; }

  /// Nodal interpolation of a vdim-valued function.
  Eigen::VectorXd interpolate(const SpaceFn& fn) const;
  /// Zero on free dofs; per-tag handle values on constrained dofs.
  Eigen::VectorXd boundary_values(const SpaceFn& dirichlet_fn, const SpaceFn& inflow_fn) const;

  /// Point evaluation of a coefficient vector (tests and error measurement).
  Eigen::VectorXd eval(const Eigen::VectorXd& coeffs, double x, double y = 0.0) const;
  Eigen::MatrixXd eval_grad(const Eigen::VectorXd& coeffs, double x, double y = 0.0) const;

  /// Reference basis tables at the tensor Gauss points of this space's
  /// default cell rule ((order+1)^dim points).
  struct RefData {
    int nq;                    // total quadrature points
    std::vector<double> wts;   // reference weights (unit cell measure)
    Eigen::MatrixXd phi;       // nq x nodes_per_cell
    Eigen::MatrixXd dxi;       // reference-coordinate derivatives
    Eigen::MatrixXd deta;
    std::vector<std::array<double, 2>> pts;  // reference coordinates
  };
  const RefData& ref_data() const { return ref_; }
  /// Basis values/derivatives at an arbitrary reference point.
  void basis_at(double xi, double eta, Eigen::VectorXd& phi, Eigen::VectorXd& dxi,
                Eigen::VectorXd& deta) const;

 private:
  SubdomainMesh mesh_;
  int order_, vdim_, npc_, num_nodes_, nodes_x_;
  std::vector<std::optional<BoundaryTag>> node_tag_;
  std::vector<int> free_dofs_;
  std::vector<int> free_index_;
  RefData ref_;
};

struct FEFunction {
  const FESpace* space;
  Eigen::VectorXd coeffs;
};

// ---------------------------------------------------------------------------
// Volume assembly.  All builders return full-dof matrices; constraint
// elimination happens at system-assembly time.  The OpenMP path and the
// serial path produce bit-identical matrices.
// ---------------------------------------------------------------------------

SparseMatrix mass_matrix(const FESpace& s, ExecMode mode = ExecMode::serial);
/// (grad u, grad v), block-diagonal over components.
SparseMatrix stiffness_matrix(const FESpace& s, ExecMode mode = ExecMode::serial);
/// (eps(u), eps(v)) with eps the symmetric gradient; vdim must equal dim.
SparseMatrix symgrad_matrix(const FESpace& s, ExecMode mode = ExecMode::serial);
/// (div u, q): rows are pressure dofs, columns velocity dofs.
SparseMatrix div_matrix(const FESpace& pres, const FESpace& vel,
                        ExecMode mode = ExecMode::serial);
/// Load vector of f against the basis at a fixed time slice.
Eigen::VectorXd source_vector(const FESpace& s, const SpaceFn& f,
                              ExecMode mode = ExecMode::serial);

// ---------------------------------------------------------------------------
// Interface assembly.  Matrices map full trial dofs of side b to full test
// dofs of side a; sides are 1 or 2 on the coupled mesh.
// ---------------------------------------------------------------------------

/// <trial, test>_Gamma (componentwise dot; spaces must share vdim).
SparseMatrix interface_mass(const CoupledMesh& cm, const FESpace& sa, int a, const FESpace& sb,
                            int b);
/// <d trial/d n_b, test>_Gamma for scalar spaces.
SparseMatrix interface_flux_grad(const CoupledMesh& cm, const FESpace& sa, int a,
                                 const FESpace& sb, int b);
/// <eps(trial) n_b, test>_Gamma for vector spaces.
SparseMatrix interface_flux_symgrad(const CoupledMesh& cm, const FESpace& sa, int a,
                                    const FESpace& sb, int b);
/// <trial_pressure (n_b . test_velocity)>_Gamma.
SparseMatrix interface_pressure_normal(const CoupledMesh& cm, const FESpace& vel_a, int a,
                                       const FESpace& pres_b, int b);

// ---------------------------------------------------------------------------
// Norms and errors.
// ---------------------------------------------------------------------------

enum class NormKind { l2_domain, h1_seminorm, interface_l2_jump, triple };

struct TripleWeights {
  double nu1 = 1.0;
  double nu2 = 1.0;
  double gamma_over_h = 0.0;
};

/// Norm of a pair of FE functions on the coupled mesh.  The triple norm is
/// (nu1^2 |grad u1|^2 + nu2^2 |grad u2|^2 + gamma/h |u2 - u1|_Gamma^2)^(1/2).
double coupled_norm(const CoupledMesh& cm, const FESpace& s1, const Eigen::VectorXd& u1,
                    const FESpace& s2, const Eigen::VectorXd& u2, NormKind kind,
                    TripleWeights w = {});

/// L2 and H1-seminorm errors against closed-form handles.
double l2_error(const FESpace& s, const Eigen::VectorXd& coeffs, const SpaceFn& exact);
double h1_semi_error(const FESpace& s, const Eigen::VectorXd& coeffs, const SpaceGradFn& grad);

}  // namespace multirate
