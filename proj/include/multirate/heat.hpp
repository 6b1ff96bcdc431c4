#pragma once

#include <map>
#include <memory>

#include "multirate/fespace.hpp"
#include "multirate/timegrid.hpp"

namespace multirate {

using ScalarSpaceTimeFn = std::function<double(double x, double y, double t)>;

/// Two diffusion problems coupled across the interface by Nitsche terms.
/// Empty handles mean zero sources / homogeneous Dirichlet data.
struct HeatProblem {
  double nu1 = 1.0;
  double nu2 = 1.0;
  ScalarSpaceTimeFn f1;
  ScalarSpaceTimeFn f2;
  ScalarSpaceTimeFn dirichlet;
  double gamma = 0.0;  // <= 0 picks the default below
};

inline double heat_gamma(const HeatProblem& p, int order) {
  return p.gamma > 0.0 ? p.gamma : 10.0 * std::max(p.nu1, p.nu2) * order * order;
}

/// Per-subproblem dG(0) trajectories whose payloads are full coefficient
/// vectors (constrained dofs carry their boundary values).
struct TransientTrajectory {
  PiecewiseConstantTimeFn u1;
  PiecewiseConstantTimeFn u2;
};

/// Term selection for probe tests.
struct HeatParts {
  bool mass = true;
  bool stiffness = true;
  bool consistency = true;
  bool symmetry = true;
  bool penalty = true;
  bool source = true;
};

/// Assembles and solves the fully discrete coupled heat system one macro step
/// at a time.  All micro steps of both subdomains within a macro step form a
/// single monolithic linear system; the opposite side's trace always enters
/// through the interval-average transfer weights.
class HeatAssembler {
 public:
  using Parts = HeatParts;

  HeatAssembler(HeatProblem problem, CoupledMesh cmesh, int order,
                ExecMode mode = ExecMode::openmp);

  const FESpace& space(int j) const { return j == 1 ? space1_ : space2_; }
  const CoupledMesh& cmesh() const { return cmesh_; }
  const HeatProblem& problem() const { return problem_; }
  double gamma_over_h() const { return heat_gamma(problem_, order_) / cmesh_.h(); }

  /// Dirichlet values at time t (zero on free dofs).
  Eigen::VectorXd boundary_state(int j, double t) const;

  BlockSystem assemble_macro_step(const MultirateMesh& tm, int n, const Eigen::VectorXd& prev1,
                                  const Eigen::VectorXd& prev2,
                                  const Parts& parts = Parts()) const;

  TransientTrajectory solve_transient(std::shared_ptr<const MultirateMesh> tm) const;

 private:
  // Single assembly path; with emit_matrix false only the right-hand side is
  // produced (for macro steps whose matrix is already factored).
  void assemble_into(const MultirateMesh& tm, int n, const Eigen::VectorXd& prev1,
                     const Eigen::VectorXd& prev2, const Parts& parts, bool emit_matrix,
                     std::vector<Triplet>* trips, Eigen::VectorXd& rhs) const;

  HeatProblem problem_;
  CoupledMesh cmesh_;
  int order_;
  ExecMode mode_;
  FESpace space1_, space2_;
  SparseMatrix mass_[2], stiff_[2];
  SparseMatrix tmass_[2][2];   // [test side][trial side]
  SparseMatrix flux_[2][2];    // <d trial / d n_trial, test>
  SparseMatrix fluxT_[2][2];   // <trial, d test / d n_test>
};

BlockSystem assemble_heat_macro_step(const HeatProblem& p, const CoupledMesh& cm, int order,
                                     const MultirateMesh& tm, int n,
                                     const Eigen::VectorXd& prev1, const Eigen::VectorXd& prev2);

TransientTrajectory solve_heat_transient(const HeatProblem& p, const CoupledMesh& cm, int order,
                                         std::shared_ptr<const MultirateMesh> tm);

/// Manufactured 1D solution on (0, 1/2) u (1/2, 1): piecewise cubics in space
/// times sin(pi t), built to satisfy value and flux continuity at x = 1/2 for
/// any positive viscosity pair, with sources in closed form.
struct ManufacturedHeat {
  HeatProblem problem;
  std::function<double(int j, double x, double t)> u;
  std::function<double(int j, double x, double t)> dudx;
  /// Separable structure: u_j(x, t) = g(j, t) X_j(x).
  std::function<double(int j, double x)> profile;
  std::function<double(int j, double x)> profile_dx;
  std::function<double(int j, double t)> g;
};
ManufacturedHeat manufactured_heat_1d(double nu1, double nu2);

/// Fast/slow variant: both interface value and flux of the exact solution
/// vanish, so each side can oscillate at its own frequency.
ManufacturedHeat manufactured_heat_1d_two_speed(double nu1, double nu2, double freq1,
                                                double freq2);

}  // namespace multirate
