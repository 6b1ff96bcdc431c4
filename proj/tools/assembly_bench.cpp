// Times the OpenMP assembly kernels against the serial reference path and
// verifies that both produce bit-identical results.
//
// Usage: assembly_bench [m] [reps]   (default m=16, reps=3)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "multirate/fespace.hpp"
#include "multirate/stokes.hpp"

using namespace multirate;
using clock_type = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock_type::now();
    fn();
    const auto t1 = clock_type::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double openmp_ms, bool identical) {
  std::printf("%-22s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx   %s\n", name, serial_ms,
              openmp_ms, serial_ms / openmp_ms, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int m = argc > 1 ? std::atoi(argv[1]) : 16;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  std::printf("two-pipe mesh, m = %d (h = %.4g), %d repetitions, %d threads\n", m, 1.0 / m, reps,
              max_threads());

  auto cm = build_two_pipe_mesh(m);
  FESpace vel(cm.sub(1), 2, 2, {BoundaryTag::dirichlet, BoundaryTag::inflow});
  FESpace pres(cm.sub(1), 1, 1, {});
  bool all_ok = true;

  {
    SparseMatrix a, b;
    const double ts = time_ms([&] { a = mass_matrix(vel, ExecMode::serial); }, reps);
    const double tp = time_ms([&] { b = mass_matrix(vel, ExecMode::openmp); }, reps);
    report("velocity mass", ts, tp, a == b);
    all_ok &= (a == b);
  }
  {
    SparseMatrix a, b;
    const double ts = time_ms([&] { a = symgrad_matrix(vel, ExecMode::serial); }, reps);
    const double tp = time_ms([&] { b = symgrad_matrix(vel, ExecMode::openmp); }, reps);
    report("symmetric gradient", ts, tp, a == b);
    all_ok &= (a == b);
  }
  {
    SparseMatrix a, b;
    const double ts = time_ms([&] { a = div_matrix(pres, vel, ExecMode::serial); }, reps);
    const double tp = time_ms([&] { b = div_matrix(pres, vel, ExecMode::openmp); }, reps);
    report("divergence", ts, tp, a == b);
    all_ok &= (a == b);
  }
  {
    auto f = [](double x, double y) {
      return Eigen::Vector2d(std::sin(3 * x) * y, std::cos(2 * y) + x).eval();
    };
    Eigen::VectorXd a, b;
    const double ts = time_ms([&] { a = source_vector(vel, f, ExecMode::serial); }, reps);
    const double tp = time_ms([&] { b = source_vector(vel, f, ExecMode::openmp); }, reps);
    const bool ok = (a - b).lpNorm<Eigen::Infinity>() == 0.0;
    report("source quadrature", ts, tp, ok);
    all_ok &= ok;
  }
  {
    auto problem = two_pipe_benchmark();
    auto tm = std::make_shared<MultirateMesh>(
        MultirateMesh::build({0.0, 1.0}, {{{4, 1}}}));
    SparseMatrix a, b;
    const double ts = time_ms(
        [&] {
          StokesAssembler asmb(problem, cm, ExecMode::serial);
          Eigen::VectorXd z1 = Eigen::VectorXd::Zero(asmb.velocity_space(1).num_dofs());
          Eigen::VectorXd z2 = Eigen::VectorXd::Zero(asmb.velocity_space(2).num_dofs());
          a = asmb.assemble_macro_step(*tm, 0, z1, z2).matrix();
        },
        reps);
    const double tp = time_ms(
        [&] {
          StokesAssembler asmb(problem, cm, ExecMode::openmp);
          Eigen::VectorXd z1 = Eigen::VectorXd::Zero(asmb.velocity_space(1).num_dofs());
          Eigen::VectorXd z2 = Eigen::VectorXd::Zero(asmb.velocity_space(2).num_dofs());
          b = asmb.assemble_macro_step(*tm, 0, z1, z2).matrix();
        },
        reps);
    report("stokes macro step", ts, tp, a == b);
    all_ok &= (a == b);
  }

  if (!all_ok) {
    std::printf("FAILURE: parallel and serial kernels disagree\n");
    return 1;
  }
  return 0;
}
