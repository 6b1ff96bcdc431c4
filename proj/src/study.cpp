#include "multirate/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace multirate {

std::vector<double> observed_rates(const std::vector<std::pair<double, double>>& table) {
  if (table.size() < 2) throw std::invalid_argument("need at least two levels for rates");
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < table.size(); ++i) {
    const double a = table[i].second, b = table[i + 1].second;
    rates.push_back((a > 0.0 && b > 0.0) ? std::log2(a / b) : std::nan(""));
  }
  return rates;
}

ErrorNorms::ErrorNorms(const CoupledMesh& cm, const FESpace& s1, const FESpace& s2,
                       const FESpace* q1, const FESpace* q2, double nu1, double nu2,
                       double gamma_over_h)
    : nu_{nu1, nu2}, goh_(gamma_over_h) {
  mass_[0] = mass_matrix(s1);
  mass_[1] = mass_matrix(s2);
  stiff_[0] = stiffness_matrix(s1);
  stiff_[1] = stiffness_matrix(s2);
  jump_[0][0] = interface_mass(cm, s1, 1, s1, 1);
  jump_[0][1] = interface_mass(cm, s1, 1, s2, 2);
  jump_[1][0] = interface_mass(cm, s2, 2, s1, 1);
  jump_[1][1] = interface_mass(cm, s2, 2, s2, 2);
  if (q1 && q2) {
    pmass_[0] = mass_matrix(*q1);
    pmass_[1] = mass_matrix(*q2);
    has_pressure_ = true;
  }
}

namespace {

void merge_breakpoints(const PiecewiseConstantTimeFn& f, std::vector<double>& pts) {
  for (int i = 0; i < f.num_intervals(); ++i) pts.push_back(f.interval_end(i));
  pts.push_back(0.0);
}

}  // namespace

ErrorRecord ErrorNorms::compare(const TrajectoryView& a, const TrajectoryView& b) const {
  if (a.u1->dim() != b.u1->dim() || a.u2->dim() != b.u2->dim())
    throw MeshMismatch("trajectories live on different spatial meshes");
  std::vector<double> pts;
  merge_breakpoints(*a.u1, pts);
  merge_breakpoints(*a.u2, pts);
  merge_breakpoints(*b.u1, pts);
  merge_breakpoints(*b.u2, pts);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](double x, double y) { return std::abs(x - y) < 1e-13; }),
            pts.end());

  ErrorRecord rec;
  const PiecewiseConstantTimeFn* au[2] = {a.u1, a.u2};
  const PiecewiseConstantTimeFn* bu[2] = {b.u1, b.u2};
  const PiecewiseConstantTimeFn* ap[2] = {a.p1, a.p2};
  const PiecewiseConstantTimeFn* bp[2] = {b.p1, b.p2};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = pts[i + 1] - pts[i];
    const double tmid = 0.5 * (pts[i] + pts[i + 1]);
    Eigen::VectorXd e[2];
    for (int j = 0; j < 2; ++j) {
      e[j] = au[j]->eval(tmid) - bu[j]->eval(tmid);
      const double g = e[j].dot(stiff_[j].apply(e[j]));
      (j == 0 ? rec.velocity_sq_sub1 : rec.velocity_sq_sub2) += len * nu_[j] * nu_[j] * g;
    }
    rec.jump_sq += len * goh_ *
                   (e[1].dot(jump_[1][1].apply(e[1])) - e[1].dot(jump_[1][0].apply(e[0])) -
                    e[0].dot(jump_[0][1].apply(e[1])) + e[0].dot(jump_[0][0].apply(e[0])));
    if (has_pressure_ && a.p1 && b.p1) {
      for (int j = 0; j < 2; ++j) {
        const Eigen::VectorXd ep = ap[j]->eval(tmid) - bp[j]->eval(tmid);
        (j == 0 ? rec.pressure_sq_sub1 : rec.pressure_sq_sub2) +=
            len * ep.dot(pmass_[j].apply(ep));
      }
    }
  }
  const double T = pts.back();
  for (int j = 0; j < 2; ++j) {
    const Eigen::VectorXd ef = au[j]->eval(T) - bu[j]->eval(T);
    rec.final_sq += ef.dot(mass_[j].apply(ef));
  }
  rec.velocity_sq = rec.final_sq + rec.velocity_sq_sub1 + rec.velocity_sq_sub2 + rec.jump_sq;
  rec.pressure_sq = rec.pressure_sq_sub1 + rec.pressure_sq_sub2;
  return rec;
}

StokesTrajectory stokes_reference(const StokesProblem& p, const CoupledMesh& cm, int n_ref,
                                  double horizon) {
  return solve_stokes_transient(p, cm,
                                std::make_shared<MultirateMesh>(uniform_mesh(n_ref, horizon)));
}

TransientTrajectory heat_reference(const HeatProblem& p, const CoupledMesh& cm, int order,
                                   int n_ref, double horizon) {
  return solve_heat_transient(p, cm, order,
                              std::make_shared<MultirateMesh>(uniform_mesh(n_ref, horizon)));
}

Schedule schedule_from_string(const std::string& s) {
  if (s == "uniform") return Schedule::uniform;
  if (s == "refine_sub1_only") return Schedule::refine_sub1_only;
  if (s == "refine_sub2_only") return Schedule::refine_sub2_only;
  throw ConfigError("unknown schedule: " + s);
}

std::vector<std::shared_ptr<const MultirateMesh>> schedule_meshes(Schedule schedule,
                                                                  int initial_steps,
                                                                  double horizon, int levels) {
  std::vector<std::shared_ptr<const MultirateMesh>> meshes;
  if (schedule == Schedule::uniform) {
    for (int lvl = 0; lvl < levels; ++lvl)
      meshes.push_back(
          std::make_shared<MultirateMesh>(uniform_mesh(initial_steps << lvl, horizon)));
    return meshes;
  }
  const int j = (schedule == Schedule::refine_sub1_only) ? 1 : 2;
  MultirateMesh mesh = uniform_mesh(initial_steps, horizon);
  meshes.push_back(std::make_shared<MultirateMesh>(mesh));
  for (int lvl = 1; lvl < levels; ++lvl) {
    mesh = mesh.refine_micro_all(j);
    meshes.push_back(std::make_shared<MultirateMesh>(mesh));
  }
  return meshes;
}

void fill_rates(RateTable& table) {
  table.rate_velocity.assign(table.records.size(), std::nan(""));
  table.rate_pressure.assign(table.records.size(), std::nan(""));
  for (std::size_t i = 1; i < table.records.size(); ++i) {
    const auto& p = table.records[i - 1];
    const auto& c = table.records[i];
    table.rate_velocity[i] = (p.velocity_sq > 0 && c.velocity_sq > 0)
                                 ? std::log2(p.velocity_sq / c.velocity_sq)
                                 : INFINITY;
    table.rate_pressure[i] = (p.pressure_sq > 0 && c.pressure_sq > 0)
                                 ? std::log2(p.pressure_sq / c.pressure_sq)
                                 : INFINITY;
  }
}

std::string rate_table_csv(const RateTable& table) {
  std::string out =
      "level,n_steps_1,n_steps_2,h,velocity_sq_total,velocity_sq_sub1,velocity_sq_sub2,"
      "pressure_sq_total,pressure_sq_sub1,pressure_sq_sub2,rate_velocity,rate_pressure\n";
  char buf[512];
  for (std::size_t i = 0; i < table.records.size(); ++i) {
    const auto& r = table.records[i];
    std::snprintf(buf, sizeof(buf),
                  "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.level,
                  r.n_steps_1, r.n_steps_2, r.h, r.velocity_sq, r.velocity_sq_sub1,
                  r.velocity_sq_sub2, r.pressure_sq, r.pressure_sq_sub1, r.pressure_sq_sub2,
                  table.rate_velocity[i], table.rate_pressure[i]);
    out += buf;
  }
  return out;
}

std::string gnuplot_script(const std::string& csv_name) {
  std::string s;
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead\n";
  s += "set logscale xy\n";
  s += "set xlabel 'time steps (subproblem 1)'\n";
  s += "set ylabel 'squared error'\n";
  s += "plot '" + csv_name + "' using 2:5 with linespoints title 'velocity', \\\n";
  s += "     '" + csv_name + "' using 2:8 with linespoints title 'pressure'\n";
  return s;
}

CoupledODEProblem study_ode_problem() {
  auto scalar = [](double v) {
    Eigen::VectorXd x(1);
    x[0] = v;
    return x;
  };
  auto u1e = [](double t) { return std::sin(2 * t); };
  auto u2e = [](double t) { return t * std::exp(-t); };
  CoupledODEProblem p;
  p.f1 = [=](double t, const Eigen::VectorXd& u1, const Eigen::VectorXd& u2) {
    return scalar(-u1[0] + u2[0] + 2 * std::cos(2 * t) + u1e(t) - u2e(t));
  };
  p.f2 = [=](double t, const Eigen::VectorXd& u1, const Eigen::VectorXd& u2) {
    return scalar(u1[0] - u2[0] + (1 - t) * std::exp(-t) - u1e(t) + u2e(t));
  };
  p.u0_1 = scalar(0.0);
  p.u0_2 = scalar(0.0);
  p.horizon = 1.0;
  p.exact = [=](double t) { return std::make_pair(scalar(u1e(t)), scalar(u2e(t))); };
  return p;
}

namespace {

int finest_steps(const std::vector<std::shared_ptr<const MultirateMesh>>& meshes) {
  int finest = 0;
  for (const auto& m : meshes)
    finest = std::max({finest, m->num_intervals(Partition::sub1),
                       m->num_intervals(Partition::sub2)});
  return finest;
}

void check_reference(int n_ref, int finest) {
  if (n_ref < 16 * finest || (n_ref & (n_ref - 1)) != 0)
    throw ConfigError("reference_steps must be a power of two >= 16x the finest level (" +
                      std::to_string(16 * finest) + ")");
}

template <typename Traj, typename Solve>
RateTable pde_rate_table(const StudyConfig& cfg, const Traj& reference, const ErrorNorms& norms,
                         const std::vector<std::shared_ptr<const MultirateMesh>>& meshes,
                         double h, Solve&& solve) {
  RateTable table;
  const TrajectoryView ref_view = view(reference);
  for (std::size_t lvl = 0; lvl < meshes.size(); ++lvl) {
    const auto& tm = meshes[lvl];
    Traj traj = solve(tm);
    ErrorRecord rec = norms.compare(view(traj), ref_view);
    rec.level = static_cast<int>(lvl);
    rec.n_steps_1 = tm->num_intervals(Partition::sub1);
    rec.n_steps_2 = tm->num_intervals(Partition::sub2);
    rec.k1 = tm->max_micro_length(1);
    rec.k2 = tm->max_micro_length(2);
    rec.h = h;
    table.records.push_back(rec);
  }
  fill_rates(table);
  return table;
}

}  // namespace

StudyResult run_study(const StudyConfig& cfg) {
  StudyResult result;
  const Schedule schedule = schedule_from_string(cfg.schedule);
  auto meshes = schedule_meshes(schedule, cfg.initial_steps, cfg.horizon, cfg.levels);

  if (cfg.kind == "ode") {
    OdeSolveOptions opts;
    opts.damping = cfg.damping;
    result.ode = ode_convergence_study(study_ode_problem(), meshes, cfg.tol, cfg.max_iter, opts);
    std::ostringstream csv;
    write_ode_csv(result.ode, csv);
    result.csv = csv.str();
    result.plot = "set datafile separator ','\nset key autotitle columnhead\nset logscale xy\n"
                  "plot 'study.csv' using 2:5 with linespoints title 'e1', \\\n"
                  "     'study.csv' using 3:6 with linespoints title 'e2'\n";
    return result;
  }

  check_reference(cfg.reference_steps, finest_steps(meshes));
  if (cfg.kind == "heat") {
    auto cm = build_coupled_mesh_1d(0.5, 0.5 / cfg.space_m);
    HeatProblem problem;
    if (cfg.manufactured) problem = manufactured_heat_1d(cfg.nu1, cfg.nu2).problem;
    problem.nu1 = cfg.nu1;
    problem.nu2 = cfg.nu2;
    problem.gamma = cfg.gamma;
    auto reference = heat_reference(problem, cm, cfg.order_r, cfg.reference_steps, cfg.horizon);
    FESpace s1(cm.sub(1), cfg.order_r, 1, {});
    FESpace s2(cm.sub(2), cfg.order_r, 1, {});
    ErrorNorms norms(cm, s1, s2, nullptr, nullptr, cfg.nu1, cfg.nu2,
                     heat_gamma(problem, cfg.order_r) / cm.h());
    result.table = pde_rate_table(cfg, reference, norms, meshes, cm.h(), [&](const auto& tm) {
      return solve_heat_transient(problem, cm, cfg.order_r, tm);
    });
  } else {
    auto cm = build_two_pipe_mesh(cfg.space_m);
    StokesProblem problem = two_pipe_benchmark();
    problem.nu1 = cfg.nu1;
    problem.nu2 = cfg.nu2;
    problem.gamma = cfg.gamma;
    problem.order = cfg.order_r;
    StokesAssembler solver(problem, cm);
    auto reference = solver.solve_transient(
        std::make_shared<MultirateMesh>(uniform_mesh(cfg.reference_steps, cfg.horizon)));
    FESpace s1(cm.sub(1), cfg.order_r, 2, {});
    FESpace s2(cm.sub(2), cfg.order_r, 2, {});
    FESpace q1(cm.sub(1), cfg.order_r - 1, 1, {});
    FESpace q2(cm.sub(2), cfg.order_r - 1, 1, {});
    ErrorNorms norms(cm, s1, s2, &q1, &q2, cfg.nu1, cfg.nu2,
                     stokes_gamma(problem, cfg.order_r) / cm.h());
    result.table = pde_rate_table(cfg, reference, norms, meshes, cm.h(), [&](const auto& tm) {
      return solver.solve_transient(tm);
    });
  }
  result.csv = rate_table_csv(result.table);
  result.plot = gnuplot_script("study.csv");
  return result;
}

}  // namespace multirate
