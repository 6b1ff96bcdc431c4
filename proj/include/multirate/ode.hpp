#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "multirate/timegrid.hpp"

namespace multirate {

/// Two coupled ODE systems u_j' = f_j(t, u1, u2) with states of fixed (per
/// side) dimension.  The zero initial state is the default; exact is optional
/// and only needed for error measurement.
struct CoupledODEProblem {
  using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&,
                                            const Eigen::VectorXd&)>;
  using Exact = std::function<std::pair<Eigen::VectorXd, Eigen::VectorXd>(double)>;

  Rhs f1;
  Rhs f2;
  Eigen::VectorXd u0_1;
  Eigen::VectorXd u0_2;
  double horizon = 1.0;
  Exact exact;  // may be empty

  static CoupledODEProblem zero_initial(Rhs f1, Rhs f2, int dim1, int dim2,
                                        double horizon = 1.0) {
    return {std::move(f1), std::move(f2), Eigen::VectorXd::Zero(dim1),
            Eigen::VectorXd::Zero(dim2), horizon, {}};
  }
};

struct MacroStepDiagnostics {
  int iterations;
  double residual;
};

struct MultirateODESolution {
  PiecewiseConstantTimeFn u1;
  PiecewiseConstantTimeFn u2;
  std::vector<MacroStepDiagnostics> diagnostics;
};

struct OdeSolveOptions {
  double damping = 1.0;  // joint fixed-point damping factor
};

/// Multirate implicit Euler: macro steps are marched sequentially; within a
/// macro step all micro unknowns of both sides are solved jointly by a damped
/// fixed-point iteration, where the opposite side always enters through its
/// exact interval average.  The coupling is genuinely implicit (coarse value
/// depends on the average of the fine micro values and vice versa), so a
/// single sequential micro sweep cannot satisfy the system.
MultirateODESolution solve_multirate(const CoupledODEProblem& problem,
                                     std::shared_ptr<const MultirateMesh> mesh, double tol,
                                     int max_iter, const OdeSolveOptions& opts = {});

/// Euclidean final-time errors (e1, e2) against problem.exact.
std::pair<double, double> final_time_error(const MultirateODESolution& sol,
                                           const CoupledODEProblem& problem);

struct OdeStudyRow {
  int level;
  double k1, k2, k;
  double e1, e2;
  double rate_e1, rate_e2;  // NaN before the first comparison, inf on zero errors
};

struct OdeStudy {
  std::vector<OdeStudyRow> rows;
};

OdeStudy ode_convergence_study(const CoupledODEProblem& problem,
                               const std::vector<std::shared_ptr<const MultirateMesh>>& schedule,
                               double tol, int max_iter = 2000,
                               const OdeSolveOptions& opts = {});

/// Columns: level,k1,k2,k,e1,e2,rate_e1,rate_e2.
void write_ode_csv(const OdeStudy& study, std::ostream& out);

}  // namespace multirate
