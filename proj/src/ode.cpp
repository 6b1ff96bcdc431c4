#include "multirate/ode.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace multirate {

namespace {

// All micro unknowns of one macro step, indexed [j-1][m] with m = 1..N_j and
// slot 0 holding the previous macro end state.
struct MacroState {
  std::array<std::vector<Eigen::VectorXd>, 2> u;
};

Eigen::VectorXd interval_average(const std::vector<Eigen::VectorXd>& vals,
                                 const std::vector<double>& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(vals[1].size());
  for (std::size_t s = 0; s < w.size(); ++s)
    if (w[s] != 0.0) out += w[s] * vals[s + 1];
  return out;
}

}  // namespace

MultirateODESolution solve_multirate(const CoupledODEProblem& problem,
                                     std::shared_ptr<const MultirateMesh> mesh, double tol,
                                     int max_iter, const OdeSolveOptions& opts) {
  if (std::abs(mesh->horizon() - problem.horizon) > 1e-12 * std::max(1.0, problem.horizon))
    throw MeshMismatch("time mesh horizon differs from problem horizon");
  const CoupledODEProblem::Rhs* rhs[2] = {&problem.f1, &problem.f2};

  std::vector<Eigen::VectorXd> vals1, vals2;
  std::vector<MacroStepDiagnostics> diag;
  Eigen::VectorXd prev[2] = {problem.u0_1, problem.u0_2};

  for (int n = 0; n < mesh->num_macro_steps(); ++n) {
    const int count[2] = {mesh->micro_count(n, 1), mesh->micro_count(n, 2)};
    const double klen[2] = {mesh->micro_length(n, 1), mesh->micro_length(n, 2)};
    const auto w1 = transfer_weights(*mesh, n, 1, Partition::sub2);
    const auto w2 = transfer_weights(*mesh, n, 2, Partition::sub1);

    MacroState x;
    for (int j = 0; j < 2; ++j) x.u[j].assign(count[j] + 1, prev[j]);

    auto sweep = [&](const MacroState& in) {
      MacroState out = in;
      for (int j = 0; j < 2; ++j) {
        const auto& w = (j == 0) ? w1 : w2;
        for (int m = 1; m <= count[j]; ++m) {
          const double t = mesh->micro_node(n, j + 1, m);
          const Eigen::VectorXd avg = interval_average(in.u[1 - j], w[m - 1]);
          const Eigen::VectorXd& own = in.u[j][m];
          const Eigen::VectorXd f = (j == 0) ? (*rhs[0])(t, own, avg) : (*rhs[1])(t, avg, own);
          out.u[j][m] = in.u[j][m - 1] + klen[j] * f;
        }
      }
      return out;
    };
    auto residual = [&](const MacroState& s) {
      double r = 0.0;
      for (int j = 0; j < 2; ++j) {
        const auto& w = (j == 0) ? w1 : w2;
        for (int m = 1; m <= count[j]; ++m) {
          const double t = mesh->micro_node(n, j + 1, m);
          const Eigen::VectorXd avg = interval_average(s.u[1 - j], w[m - 1]);
          const Eigen::VectorXd f =
              (j == 0) ? (*rhs[0])(t, s.u[j][m], avg) : (*rhs[1])(t, avg, s.u[j][m]);
          r = std::max(r, (s.u[j][m] - s.u[j][m - 1] - klen[j] * f)
                              .lpNorm<Eigen::Infinity>());
        }
      }
      return r;
    };

    int it = 0;
    double res = residual(x);
    while (res > tol) {
      if (++it > max_iter)
        throw IterationDiverged("macro step " + std::to_string(n) +
                                    " did not converge in " + std::to_string(max_iter) +
                                    " iterations",
                                res);
      MacroState g = sweep(x);
      if (opts.damping != 1.0) {
        for (int j = 0; j < 2; ++j)
          for (int m = 1; m <= count[j]; ++m)
            g.u[j][m] = (1.0 - opts.damping) * x.u[j][m] + opts.damping * g.u[j][m];
      }
      x = std::move(g);
      res = residual(x);
      if (!std::isfinite(res))
        throw IterationDiverged("macro step " + std::to_string(n) + " diverged", res);
    }
    diag.push_back({std::max(it, 1), res});

    for (int m = 1; m <= count[0]; ++m) vals1.push_back(x.u[0][m]);
    for (int m = 1; m <= count[1]; ++m) vals2.push_back(x.u[1][m]);
    prev[0] = x.u[0][count[0]];
    prev[1] = x.u[1][count[1]];
  }

  return {PiecewiseConstantTimeFn(mesh, Partition::sub1, problem.u0_1, std::move(vals1)),
          PiecewiseConstantTimeFn(mesh, Partition::sub2, problem.u0_2, std::move(vals2)),
          std::move(diag)};
}

std::pair<double, double> final_time_error(const MultirateODESolution& sol,
                                           const CoupledODEProblem& problem) {
  if (!problem.exact) throw MissingExact("problem has no exact solution handle");
  const double T = problem.horizon;
  const auto [e1, e2] = problem.exact(T);
  const double err1 = (sol.u1.value(sol.u1.num_intervals() - 1) - e1).norm();
  const double err2 = (sol.u2.value(sol.u2.num_intervals() - 1) - e2).norm();
  return {err1, err2};
}

OdeStudy ode_convergence_study(const CoupledODEProblem& problem,
                               const std::vector<std::shared_ptr<const MultirateMesh>>& schedule,
                               double tol, int max_iter, const OdeSolveOptions& opts) {
  if (schedule.empty()) throw std::invalid_argument("empty mesh schedule");
  OdeStudy study;
  for (std::size_t lvl = 0; lvl < schedule.size(); ++lvl) {
    const auto& mesh = schedule[lvl];
    auto sol = solve_multirate(problem, mesh, tol, max_iter, opts);
    auto [e1, e2] = final_time_error(sol, problem);
    OdeStudyRow row;
    row.level = static_cast<int>(lvl);
    row.k1 = mesh->max_micro_length(1);
    row.k2 = mesh->max_micro_length(2);
    row.k = std::max(row.k1, row.k2);
    row.e1 = e1;
    row.e2 = e2;
    row.rate_e1 = row.rate_e2 = std::nan("");
    if (lvl > 0) {
      const auto& p = study.rows.back();
      row.rate_e1 = (p.e1 > 0 && e1 > 0) ? std::log2(p.e1 / e1) : INFINITY;
      row.rate_e2 = (p.e2 > 0 && e2 > 0) ? std::log2(p.e2 / e2) : INFINITY;
    }
    study.rows.push_back(row);
  }
  return study;
}

void write_ode_csv(const OdeStudy& study, std::ostream& out) {
  out << "level,k1,k2,k,e1,e2,rate_e1,rate_e2\n";
  char buf[256];
  for (const auto& r : study.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.level,
                  r.k1, r.k2, r.k, r.e1, r.e2, r.rate_e1, r.rate_e2);
    out << buf;
  }
}

}  // namespace multirate
