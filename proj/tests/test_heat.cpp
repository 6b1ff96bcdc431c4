#include <doctest.h>

#include <cmath>
#include <random>

#include "multirate/heat.hpp"
#include "oracles.hpp"

using namespace multirate;

namespace {

std::shared_ptr<const MultirateMesh> make_mesh(std::vector<double> nodes,
                                               std::vector<std::array<int, 2>> counts) {
  return std::make_shared<MultirateMesh>(MultirateMesh::build(std::move(nodes), std::move(counts)));
}

}  // namespace

TEST_CASE("zero data gives the zero trajectory") {
  HeatProblem p;
  p.nu1 = 1.0;
  p.nu2 = 2.0;
  auto cm = build_coupled_mesh_1d(0.5, 1.0 / 8);
  auto tm = make_mesh({0.0, 0.5, 1.0}, {{{2, 1}}, {{1, 2}}});
  auto traj = solve_heat_transient(p, cm, 1, tm);
  for (const auto& v : traj.u1.values()) CHECK(v.lpNorm<Eigen::Infinity>() <= 1e-14);
  for (const auto& v : traj.u2.values()) CHECK(v.lpNorm<Eigen::Infinity>() <= 1e-14);
  // Bookkeeping: one payload per micro interval on each side.
  CHECK(traj.u1.num_intervals() == 3);
  CHECK(traj.u2.num_intervals() == 3);
}

TEST_CASE("manufactured solution satisfies the interface conditions") {
  const double nu1 = 1.0, nu2 = 7.0;
  auto m = manufactured_heat_1d(nu1, nu2);
  for (double t : {0.1, 0.37, 0.92}) {
    CHECK(std::abs(m.u(1, 0.5, t) - m.u(2, 0.5, t)) <= 1e-14);
    CHECK(std::abs(nu1 * m.dudx(1, 0.5, t) - nu2 * m.dudx(2, 0.5, t)) <= 1e-12);
    // Outer boundary values vanish.
    CHECK(std::abs(m.u(1, 0.0, t)) <= 1e-14);
    CHECK(std::abs(m.u(2, 1.0, t)) <= 1e-14);
  }
  // Strong residual du/dt - nu u'' - f = 0, via finite differences.
  auto residual = [&](int j, double x, double t) {
    const double e = 1e-5;
    const double dudt = (m.u(j, x, t + e) - m.u(j, x, t - e)) / (2 * e);
    const double uxx = (m.u(j, x + e, t) - 2 * m.u(j, x, t) + m.u(j, x - e, t)) / (e * e);
    const double nu = j == 1 ? nu1 : nu2;
    const double f = j == 1 ? m.problem.f1(x, 0, t) : m.problem.f2(x, 0, t);
    return dudt - nu * uxx - f;
  };
  CHECK(std::abs(residual(1, 0.25, 0.3)) <= 1e-4);
  CHECK(std::abs(residual(2, 0.8, 0.62)) <= 1e-4);
}

TEST_CASE("single-rate reduction matches the standalone backward-Euler oracle") {
  auto m = manufactured_heat_1d(1.0, 3.0);
  auto cm = build_coupled_mesh_1d(0.5, 1.0 / 16);
  const int steps = 6;
  auto tm = std::make_shared<MultirateMesh>(uniform_mesh(steps, 1.0));
  auto mine = solve_heat_transient(m.problem, cm, 1, tm);
  auto ref = oracles::heat_single_rate(m.problem, cm, 1, steps, 1.0);
  for (int i = 0; i < steps; ++i) {
    CHECK((mine.u1.value(i) - ref.u1.value(i)).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK((mine.u2.value(i) - ref.u2.value(i)).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("macro matrices pass the coercivity check") {
  auto m = manufactured_heat_1d(1.0, 5.0);
  auto cm = build_coupled_mesh_1d(0.5, 1.0 / 8);
  HeatAssembler asmb(m.problem, cm, 1, ExecMode::serial);
  Eigen::VectorXd z1 = Eigen::VectorXd::Zero(asmb.space(1).num_dofs());
  Eigen::VectorXd z2 = Eigen::VectorXd::Zero(asmb.space(2).num_dofs());
  for (auto counts : std::vector<std::array<int, 2>>{{1, 1}, {4, 1}, {1, 4}}) {
    auto tm = make_mesh({0.0, 0.25}, {counts});
    auto sys = asmb.assemble_macro_step(*tm, 0, z1, z2);
    CHECK(symmetric_part_cholesky_ok(sys.matrix()));
  }
}

TEST_CASE("multirate interface terms cancel in the quadratic form") {
  auto m = manufactured_heat_1d(2.0, 3.0);
  auto cm = build_coupled_mesh_1d(0.5, 1.0 / 8);
  HeatAssembler asmb(m.problem, cm, 1, ExecMode::serial);
  Eigen::VectorXd z1 = Eigen::VectorXd::Zero(asmb.space(1).num_dofs());
  Eigen::VectorXd z2 = Eigen::VectorXd::Zero(asmb.space(2).num_dofs());
  auto tm = make_mesh({0.0, 0.25}, {{{4, 1}}});
  HeatAssembler::Parts parts;
  parts.mass = parts.stiffness = parts.penalty = parts.source = false;
  auto sys = asmb.assemble_macro_step(*tm, 0, z1, z2, parts);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd x(sys.size());
  for (int i = 0; i < x.size(); ++i) x[i] = dist(rng);
  const double q = x.dot(sys.matrix().apply(x));
  CHECK(std::abs(q) <= 1e-12 * sys.matrix().inf_norm() * x.squaredNorm());
}

TEST_CASE("interpolated exact solution has small discrete residual") {
  auto m = manufactured_heat_1d(1.0, 2.0);
  double prev = 0.0;
  for (int lvl = 0; lvl < 3; ++lvl) {
    const int nx = 8 << lvl;
    const int nt = 8 << lvl;
    auto cm = build_coupled_mesh_1d(0.5, 0.5 / nx);
    HeatAssembler asmb(m.problem, cm, 1, ExecMode::serial);
    auto tm = std::make_shared<MultirateMesh>(uniform_mesh(nt, 1.0));
    auto at = [&](int j, double t) {
      return asmb.space(j).interpolate([&](double x, double) {
        Eigen::VectorXd v(1);
        v[0] = m.u(j, x, t);
        return v;
      });
    };
    // Residual of the first macro step with the exact interpolant plugged in.
    auto sys = asmb.assemble_macro_step(*tm, 0, at(1, 0.0), at(2, 0.0));
    Eigen::VectorXd x(sys.size());
    const double t1 = tm->micro_node(0, 1, 1);
    auto full1 = at(1, t1);
    auto full2 = at(2, t1);
    int idx = 0;
    for (int d = 0; d < asmb.space(1).num_dofs(); ++d)
      if (!asmb.space(1).dof_constrained(d)) x[idx++] = full1[d];
    for (int d = 0; d < asmb.space(2).num_dofs(); ++d)
      if (!asmb.space(2).dof_constrained(d)) x[idx++] = full2[d];
    const double k = tm->macro_length(0);
    const double res = (sys.matrix().apply(x) - sys.rhs()).lpNorm<Eigen::Infinity>() / k;
    if (lvl > 0) CHECK(res <= prev / 1.5);
    prev = res;
  }
}

TEST_CASE("transient convergence smoke on the manufactured problem") {
  auto m = manufactured_heat_1d(1.0, 2.0);
  auto cm = build_coupled_mesh_1d(0.5, 1.0 / 64);
  auto tm = std::make_shared<MultirateMesh>(uniform_mesh(64, 1.0));
  auto traj = solve_heat_transient(m.problem, cm, 1, tm);
  FESpace s1(cm.sub(1), 1, 1, {});
  FESpace s2(cm.sub(2), 1, 1, {});
  auto exact_at = [&](int j, double t) {
    return [&, j, t](double x, double) {
      Eigen::VectorXd v(1);
      v[0] = m.u(j, x, t);
      return v;
    };
  };
  const double e1 = l2_error(s1, traj.u1.value(traj.u1.num_intervals() - 1), exact_at(1, 1.0));
  const double e2 = l2_error(s2, traj.u2.value(traj.u2.num_intervals() - 1), exact_at(2, 1.0));
  CHECK(std::hypot(e1, e2) <= 1e-2);
}

TEST_CASE("multirate trajectory bookkeeping on a mixed mesh") {
  auto m = manufactured_heat_1d(1.0, 4.0);
  auto cm = build_coupled_mesh_1d(0.5, 1.0 / 8);
  auto tm = make_mesh({0.0, 0.25, 0.75, 1.0}, {{{4, 1}}, {{1, 2}}, {{1, 1}}});
  auto traj = solve_heat_transient(m.problem, cm, 1, tm);
  CHECK(traj.u1.num_intervals() == 6);
  CHECK(traj.u2.num_intervals() == 4);
  for (const auto& v : traj.u1.values()) CHECK(v.allFinite());
  for (const auto& v : traj.u2.values()) CHECK(v.allFinite());
}
