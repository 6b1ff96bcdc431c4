#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "multirate/config.hpp"
#include "multirate/heat.hpp"
#include "multirate/ode.hpp"
#include "multirate/stokes.hpp"

namespace multirate {

/// Squared error quantities of one refinement level, following the a priori
/// estimates: velocity_sq is |e(T)|^2 + int |||e|||^2 dt, the subdomain
/// entries are the nu_j^2 |grad e_j|^2 time integrals, pressure_sq is the
/// L2-in-space time integral of the pressure error.
struct ErrorRecord {
  int level = 0;
  int n_steps_1 = 0;
  int n_steps_2 = 0;
  double k1 = 0.0, k2 = 0.0, h = 0.0;
  double velocity_sq = 0.0;
  double velocity_sq_sub1 = 0.0;
  double velocity_sq_sub2 = 0.0;
  double jump_sq = 0.0;       // gamma/h interface part of velocity_sq
  double final_sq = 0.0;      // |e(T)|^2 part of velocity_sq
  double pressure_sq = 0.0;
  double pressure_sq_sub1 = 0.0;
  double pressure_sq_sub2 = 0.0;
};

struct RateTable {
  std::vector<ErrorRecord> records;
  std::vector<double> rate_velocity;  // NaN before the first pair, inf on zero errors
  std::vector<double> rate_pressure;
};

/// log2(E_i / E_{i+1}) between consecutive halvings; NaN sentinel where one
/// of the values is not positive.
std::vector<double> observed_rates(const std::vector<std::pair<double, double>>& table);

/// Pair of dG(0) trajectories (velocity-like field, optional pressure).
struct TrajectoryView {
  const PiecewiseConstantTimeFn* u1 = nullptr;
  const PiecewiseConstantTimeFn* u2 = nullptr;
  const PiecewiseConstantTimeFn* p1 = nullptr;
  const PiecewiseConstantTimeFn* p2 = nullptr;
};

inline TrajectoryView view(const TransientTrajectory& t) { return {&t.u1, &t.u2, nullptr, nullptr}; }
inline TrajectoryView view(const StokesTrajectory& t) { return {&t.u1, &t.u2, &t.p1, &t.p2}; }

/// Quadratic-form cache for theorem-style error measurements between two
/// trajectories on the same spatial mesh; time integrals are evaluated
/// exactly on the common refinement of all involved time partitions.
class ErrorNorms {
 public:
  ErrorNorms(const CoupledMesh& cm, const FESpace& s1, const FESpace& s2, const FESpace* q1,
             const FESpace* q2, double nu1, double nu2, double gamma_over_h);

  ErrorRecord compare(const TrajectoryView& a, const TrajectoryView& b) const;

 private:
  SparseMatrix mass_[2], stiff_[2];
  SparseMatrix jump_[2][2];
  SparseMatrix pmass_[2];
  bool has_pressure_ = false;
  double nu_[2];
  double goh_;
};

/// Single-rate uniform reference solves standing in for the unavailable
/// exact solution; always independent of any multirate structure.
StokesTrajectory stokes_reference(const StokesProblem& p, const CoupledMesh& cm, int n_ref,
                                  double horizon);
TransientTrajectory heat_reference(const HeatProblem& p, const CoupledMesh& cm, int order,
                                   int n_ref, double horizon);

enum class Schedule { uniform, refine_sub1_only, refine_sub2_only };
Schedule schedule_from_string(const std::string& s);

/// The time meshes of one refinement schedule: `levels` meshes starting from
/// a uniform single-rate mesh with `initial_steps` macro steps.
std::vector<std::shared_ptr<const MultirateMesh>> schedule_meshes(Schedule schedule,
                                                                  int initial_steps,
                                                                  double horizon, int levels);

void fill_rates(RateTable& table);

/// CSV with the exact column set used by all PDE studies.
std::string rate_table_csv(const RateTable& table);
/// Companion gnuplot script plotting the CSV.
std::string gnuplot_script(const std::string& csv_name);

/// The coupled linear test problem behind `ode-study`: manufactured exact
/// solution u1 = sin(2t), u2 = t exp(-t).
CoupledODEProblem study_ode_problem();

struct StudyResult {
  RateTable table;  // heat / stokes studies
  OdeStudy ode;     // ode studies
  std::string csv;
  std::string plot;
};

/// Runs the configured refinement study end to end: builds the problem and
/// meshes, solves every level, measures errors against the reference (PDE
/// kinds) or the exact solution (ode), and renders the CSV.
StudyResult run_study(const StudyConfig& cfg);

}  // namespace multirate
