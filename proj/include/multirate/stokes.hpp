#pragma once

#include <memory>

#include "multirate/fespace.hpp"
#include "multirate/timegrid.hpp"

namespace multirate {

using VectorSpaceTimeFn = std::function<Eigen::Vector2d(double x, double y, double t)>;

/// Two transient Stokes problems coupled across the interface.  Taylor-Hood
/// pair: velocity order r >= 2, pressure order r-1.  Outflow boundaries are
/// natural (do-nothing), which also fixes the pressure level.
struct StokesProblem {
  double nu1 = 1.0;
  double nu2 = 56.0;
  VectorSpaceTimeFn f1;       // body forces; empty = 0
  VectorSpaceTimeFn f2;
  VectorSpaceTimeFn inflow1;  // inflow Dirichlet data; empty = 0
  VectorSpaceTimeFn inflow2;
  double gamma = 0.0;         // <= 0 picks the default below
  int order = 2;
};

inline double stokes_gamma(const StokesProblem& p, int order) {
  return p.gamma > 0.0 ? p.gamma : 10.0 * std::max(2.0 * p.nu1, 2.0 * p.nu2) * order * order;
}

/// Velocity/pressure dG(0) trajectories; payloads are full coefficient
/// vectors per subdomain.
struct StokesTrajectory {
  PiecewiseConstantTimeFn u1;
  PiecewiseConstantTimeFn u2;
  PiecewiseConstantTimeFn p1;
  PiecewiseConstantTimeFn p2;
};

struct StokesParts {
  bool mass = true;
  bool viscous = true;
  bool consistency = true;
  bool symmetry = true;
  bool penalty = true;
  bool pressure = true;           // b^k terms in the momentum rows
  bool incompressibility = true;  // the b-bar^k rows
  bool source = true;
};

/// Monolithic per-macro-step assembly of the fully discrete coupled Stokes
/// system, mirroring the heat assembler: every opposite-side trace (velocity
/// and pressure alike) passes through the interval-average transfer weights.
class StokesAssembler {
 public:
  using Parts = StokesParts;

  StokesAssembler(StokesProblem problem, CoupledMesh cmesh, ExecMode mode = ExecMode::openmp);

  const FESpace& velocity_space(int j) const { return j == 1 ? vel1_ : vel2_; }
  const FESpace& pressure_space(int j) const { return j == 1 ? pres1_ : pres2_; }
  const CoupledMesh& cmesh() const { return cmesh_; }
  const StokesProblem& problem() const { return problem_; }
  double gamma_over_h() const { return stokes_gamma(problem_, problem_.order) / cmesh_.h(); }

  Eigen::VectorXd boundary_velocity(int j, double t) const;

  BlockSystem assemble_macro_step(const MultirateMesh& tm, int n, const Eigen::VectorXd& prev_u1,
                                  const Eigen::VectorXd& prev_u2,
                                  const Parts& parts = Parts()) const;

  StokesTrajectory solve_transient(std::shared_ptr<const MultirateMesh> tm) const;

 private:
  void assemble_into(const MultirateMesh& tm, int n, const Eigen::VectorXd& prev_u1,
                     const Eigen::VectorXd& prev_u2, const Parts& parts, bool emit_matrix,
                     std::vector<Triplet>* trips, Eigen::VectorXd& rhs) const;

  StokesProblem problem_;
  CoupledMesh cmesh_;
  ExecMode mode_;
  FESpace vel1_, vel2_, pres1_, pres2_;
  SparseMatrix vmass_[2], keps_[2], bdiv_[2], bdivT_[2];
  SparseMatrix tv_[2][2];    // velocity trace mass
  SparseMatrix fe_[2][2];    // <eps(trial) n_trial, test>
  SparseMatrix feT_[2][2];   // <trial, eps(test) n_test>
  SparseMatrix pn_[2][2];    // <p_trial (n_trial . test_vel)>
  SparseMatrix qn_[2][2];    // <psi_test (n_test . trial_vel)>
};

BlockSystem assemble_stokes_macro_step(const StokesProblem& p, const CoupledMesh& cm,
                                       const MultirateMesh& tm, int n,
                                       const Eigen::VectorXd& prev_u1,
                                       const Eigen::VectorXd& prev_u2);

StokesTrajectory solve_stokes_transient(const StokesProblem& p, const CoupledMesh& cm,
                                        std::shared_ptr<const MultirateMesh> tm);

/// The two-pipe benchmark data: nu = (1, 56), parabolic inflows
/// sin(pi t) y (1 -+ y) on the left edges, zero body force, horizon 1.
StokesProblem two_pipe_benchmark();

}  // namespace multirate
