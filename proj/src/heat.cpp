#include "multirate/heat.hpp"

#include <cmath>
#include <tuple>

namespace multirate {

namespace {

SpaceFn at_time(const ScalarSpaceTimeFn& f, double t) {
  if (!f) return [](double, double) { return Eigen::VectorXd::Zero(1); };
  return [&f, t](double x, double y) {
    Eigen::VectorXd v(1);
    v[0] = f(x, y, t);
    return v;
  };
}

}  // namespace

HeatAssembler::HeatAssembler(HeatProblem problem, CoupledMesh cmesh, int order, ExecMode mode)
    : problem_(std::move(problem)), cmesh_(std::move(cmesh)), order_(order), mode_(mode),
      space1_(cmesh_.sub(1), order, 1, {BoundaryTag::dirichlet, BoundaryTag::inflow}),
      space2_(cmesh_.sub(2), order, 1, {BoundaryTag::dirichlet, BoundaryTag::inflow}) {
  for (int j = 0; j < 2; ++j) {
    const FESpace& s = j == 0 ? space1_ : space2_;
    mass_[j] = mass_matrix(s, mode_);
    stiff_[j] = stiffness_matrix(s, mode_);
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const FESpace& sa = a == 0 ? space1_ : space2_;
      const FESpace& sb = b == 0 ? space1_ : space2_;
      tmass_[a][b] = interface_mass(cmesh_, sa, a + 1, sb, b + 1);
      flux_[a][b] = interface_flux_grad(cmesh_, sa, a + 1, sb, b + 1);
    }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) fluxT_[a][b] = flux_[b][a].transpose();
}

Eigen::VectorXd HeatAssembler::boundary_state(int j, double t) const {
  auto fn = at_time(problem_.dirichlet, t);
  return space(j).boundary_values(fn, fn);
}

void HeatAssembler::assemble_into(const MultirateMesh& tm, int n, const Eigen::VectorXd& prev1,
                                  const Eigen::VectorXd& prev2, const Parts& parts,
                                  bool emit_matrix, std::vector<Triplet>* trips,
                                  Eigen::VectorXd& rhs) const {
  const int count[2] = {tm.micro_count(n, 1), tm.micro_count(n, 2)};
  const double klen[2] = {tm.micro_length(n, 1), tm.micro_length(n, 2)};
  const int nfree[2] = {space1_.num_free(), space2_.num_free()};
  const double nu[2] = {problem_.nu1, problem_.nu2};
  const double goh = gamma_over_h();
  const int total = count[0] * nfree[0] + count[1] * nfree[1];

  auto block_off = [&](int j, int m) {
    return j == 0 ? m * nfree[0] : count[0] * nfree[0] + m * nfree[1];
  };

  // Boundary values at the micro end times, plus the previous macro state in
  // slot m = -1.
  std::array<std::vector<Eigen::VectorXd>, 2> bc;
  for (int j = 0; j < 2; ++j) {
    bc[j].resize(count[j]);
    for (int m = 0; m < count[j]; ++m)
      bc[j][m] = boundary_state(j + 1, tm.micro_node(n, j + 1, m + 1));
  }
  const Eigen::VectorXd* prev[2] = {&prev1, &prev2};

  rhs = Eigen::VectorXd::Zero(total);

  // One term: coeff * A acting on trial block (cj, cm) tested against rows of
  // block (rj, rm).  cm == -1 selects the previous macro end state.
  auto scatter = [&](const SparseMatrix& A, double coeff, int rj, int rm, int cj, int cm) {
    const FESpace& rs = rj == 0 ? space1_ : space2_;
    const FESpace& cs = cj == 0 ? space1_ : space2_;
    const int roff = block_off(rj, rm);
    const Eigen::VectorXd* known = (cm < 0) ? prev[cj] : nullptr;
    const Eigen::VectorXd* cbc = (cm < 0) ? nullptr : &bc[cj][cm];
    const int coff = (cm < 0) ? 0 : block_off(cj, cm);
    A.for_each_entry([&](int i, int k, double v) {
      const int fi = rs.free_index(i);
      if (fi < 0) return;
      if (known) {
        rhs[roff + fi] -= coeff * v * (*known)[k];
        return;
      }
      const int fk = cs.free_index(k);
      if (fk >= 0) {
        if (emit_matrix) trips->push_back({roff + fi, coff + fk, coeff * v});
      } else {
        rhs[roff + fi] -= coeff * v * (*cbc)[k];
      }
    });
  };

  const auto w1 = transfer_weights(tm, n, 1, Partition::sub2);
  const auto w2 = transfer_weights(tm, n, 2, Partition::sub1);

  for (int j = 0; j < 2; ++j) {
    const FESpace& s = j == 0 ? space1_ : space2_;
    const int o = 1 - j;
    const double k = klen[j];
    for (int m = 0; m < count[j]; ++m) {
      if (parts.mass) {
        scatter(mass_[j], 1.0, j, m, j, m);
        scatter(mass_[j], -1.0, j, m, j, m - 1);
      }
      if (parts.stiffness) scatter(stiff_[j], k * nu[j], j, m, j, m);

      const auto& w = (j == 0) ? w1[m] : w2[m];
      // Both sides share one sign pattern: minus on the own-trace flux, plus
      // on the transferred one; the symmetry and penalty terms mirror it.
      if (parts.consistency) {
        scatter(flux_[j][j], -0.5 * k * nu[j], j, m, j, m);
        for (int mo = 0; mo < count[o]; ++mo)
          if (w[mo] != 0.0) scatter(flux_[j][o], 0.5 * k * nu[o] * w[mo], j, m, o, mo);
      }
      if (parts.symmetry) {
        scatter(fluxT_[j][j], 0.5 * k * nu[j], j, m, j, m);
        for (int mo = 0; mo < count[o]; ++mo)
          if (w[mo] != 0.0) scatter(fluxT_[j][o], -0.5 * k * nu[j] * w[mo], j, m, o, mo);
      }
      if (parts.penalty) {
        scatter(tmass_[j][j], k * goh, j, m, j, m);
        for (int mo = 0; mo < count[o]; ++mo)
          if (w[mo] != 0.0) scatter(tmass_[j][o], -k * goh * w[mo], j, m, o, mo);
      }
      if (parts.source) {
        const ScalarSpaceTimeFn& f = (j == 0) ? problem_.f1 : problem_.f2;
        if (f) {
          const double t = tm.micro_node(n, j + 1, m + 1);
          const Eigen::VectorXd load = source_vector(s, at_time(f, t), mode_);
          const int roff = block_off(j, m);
          for (int d = 0; d < s.num_dofs(); ++d) {
            const int fd = s.free_index(d);
            if (fd >= 0) rhs[roff + fd] += k * load[d];
          }
        }
      }
    }
  }
}

BlockSystem HeatAssembler::assemble_macro_step(const MultirateMesh& tm, int n,
                                               const Eigen::VectorXd& prev1,
                                               const Eigen::VectorXd& prev2,
                                               const Parts& parts) const {
  const int count[2] = {tm.micro_count(n, 1), tm.micro_count(n, 2)};
  const int nfree[2] = {space1_.num_free(), space2_.num_free()};
  const int total = count[0] * nfree[0] + count[1] * nfree[1];
  std::vector<Triplet> trips;
  Eigen::VectorXd rhs;
  assemble_into(tm, n, prev1, prev2, parts, true, &trips, rhs);
  std::vector<BlockSystem::Block> blocks;
  std::vector<UnknownLabel> labels;
  labels.reserve(total);
  for (int j = 0; j < 2; ++j)
    for (int m = 0; m < count[j]; ++m) {
      blocks.push_back({"u" + std::to_string(j + 1) + "_m" + std::to_string(m), nfree[j]});
      for (int i = 0; i < nfree[j]; ++i) labels.push_back({j + 1, m, "u", i});
    }
  return BlockSystem(std::move(blocks),
                     SparseMatrix::from_triplets(total, total, std::move(trips)), std::move(rhs),
                     std::move(labels));
}

TransientTrajectory HeatAssembler::solve_transient(
    std::shared_ptr<const MultirateMesh> tm) const {
  Eigen::VectorXd state[2] = {boundary_state(1, 0.0), boundary_state(2, 0.0)};
  std::vector<Eigen::VectorXd> vals1, vals2;
  Eigen::VectorXd init[2] = {state[0], state[1]};

  // Identical macro steps share one factorization; assembly on a cached step
  // only rebuilds the right-hand side.  The matrix depends on the macro step
  // only through (length, counts) and assembly is deterministic.
  std::map<std::tuple<double, int, int>, std::unique_ptr<DirectSolver>> cache;
  for (int n = 0; n < tm->num_macro_steps(); ++n) {
    const auto key = std::make_tuple(tm->macro_length(n), tm->micro_count(n, 1),
                                     tm->micro_count(n, 2));
    auto it = cache.find(key);
    Eigen::VectorXd rhs;
    if (it == cache.end()) {
      auto sys = assemble_macro_step(*tm, n, state[0], state[1]);
      it = cache.emplace(key, std::make_unique<DirectSolver>(sys.matrix())).first;
      rhs = sys.rhs();
    } else {
      assemble_into(*tm, n, state[0], state[1], Parts(), false, nullptr, rhs);
    }
    Eigen::VectorXd x = it->second->solve(rhs);

    int off = 0;
    for (int j = 0; j < 2; ++j) {
      const FESpace& s = space(j + 1);
      for (int m = 0; m < tm->micro_count(n, j + 1); ++m) {
        Eigen::VectorXd full = boundary_state(j + 1, tm->micro_node(n, j + 1, m + 1));
        for (int d = 0; d < s.num_dofs(); ++d)
          if (s.free_index(d) >= 0) full[d] = x[off + s.free_index(d)];
        (j == 0 ? vals1 : vals2).push_back(full);
        off += s.num_free();
      }
      state[j] = (j == 0 ? vals1 : vals2).back();
    }
  }
  return {PiecewiseConstantTimeFn(tm, Partition::sub1, init[0], std::move(vals1)),
          PiecewiseConstantTimeFn(tm, Partition::sub2, init[1], std::move(vals2))};
}

BlockSystem assemble_heat_macro_step(const HeatProblem& p, const CoupledMesh& cm, int order,
                                     const MultirateMesh& tm, int n,
                                     const Eigen::VectorXd& prev1, const Eigen::VectorXd& prev2) {
  return HeatAssembler(p, cm, order).assemble_macro_step(tm, n, prev1, prev2);
}

TransientTrajectory solve_heat_transient(const HeatProblem& p, const CoupledMesh& cm, int order,
                                         std::shared_ptr<const MultirateMesh> tm) {
  return HeatAssembler(p, cm, order).solve_transient(std::move(tm));
}

ManufacturedHeat manufactured_heat_1d(double nu1, double nu2) {
  // X1 = nu2 x (x - 1/2)(x + 1) + x (1 - x), X2 = nu1 (x - 1/2)(1 - x)(x + 1)
  // + x (1 - x): both vanish on the outer boundary, share the value 1/4 at
  // x = 1/2, and satisfy nu1 X1' = nu2 X2' there.
  auto profile = [nu1, nu2](int j, double x) {
    const double shared = x * (1.0 - x);
    if (j == 1) return nu2 * x * (x - 0.5) * (x + 1.0) + shared;
    return nu1 * (x - 0.5) * (1.0 - x) * (x + 1.0) + shared;
  };
  auto profile_dx = [nu1, nu2](int j, double x) {
    const double dshared = 1.0 - 2.0 * x;
    if (j == 1) return nu2 * (3.0 * x * x + x - 0.5) + dshared;
    return nu1 * (1.0 + x - 3.0 * x * x) + dshared;
  };
  auto profile_dxx = [nu1, nu2](int j, double x) {
    if (j == 1) return nu2 * (6.0 * x + 1.0) - 2.0;
    return nu1 * (1.0 - 6.0 * x) - 2.0;
  };
  ManufacturedHeat m;
  m.problem.nu1 = nu1;
  m.problem.nu2 = nu2;
  m.g = [](int, double t) { return std::sin(M_PI * t); };
  m.profile = profile;
  m.profile_dx = profile_dx;
  m.u = [=](int j, double x, double t) { return std::sin(M_PI * t) * profile(j, x); };
  m.dudx = [=](int j, double x, double t) { return std::sin(M_PI * t) * profile_dx(j, x); };
  m.problem.f1 = [=](double x, double, double t) {
    return M_PI * std::cos(M_PI * t) * profile(1, x) - nu1 * std::sin(M_PI * t) * profile_dxx(1, x);
  };
  m.problem.f2 = [=](double x, double, double t) {
    return M_PI * std::cos(M_PI * t) * profile(2, x) - nu2 * std::sin(M_PI * t) * profile_dxx(2, x);
  };
  return m;
}

ManufacturedHeat manufactured_heat_1d_two_speed(double nu1, double nu2, double freq1,
                                                double freq2) {
  // Double roots at the interface: value and flux both vanish there, so the
  // two sides evolve with independent time factors.
  auto profile = [](int j, double x) {
    const double r = x - 0.5;
    return (j == 1 ? x : (1.0 - x)) * r * r * 16.0;
  };
  auto profile_dx = [](int j, double x) {
    const double r = x - 0.5;
    return (j == 1 ? r * r + 2.0 * x * r : -r * r + 2.0 * (1.0 - x) * r) * 16.0;
  };
  auto profile_dxx = [](int j, double x) {
    const double r = x - 0.5;
    return (j == 1 ? 4.0 * r + 2.0 * x : -4.0 * r + 2.0 * (1.0 - x)) * 16.0;
  };
  auto g = [freq1, freq2](int j, double t) {
    return std::sin(2.0 * M_PI * (j == 1 ? freq1 : freq2) * t);
  };
  auto dg = [freq1, freq2](int j, double t) {
    const double w = 2.0 * M_PI * (j == 1 ? freq1 : freq2);
    return w * std::cos(w * t);
  };
  ManufacturedHeat m;
  m.problem.nu1 = nu1;
  m.problem.nu2 = nu2;
  m.g = g;
  m.profile = profile;
  m.profile_dx = profile_dx;
  m.u = [=](int j, double x, double t) { return g(j, t) * profile(j, x); };
  m.dudx = [=](int j, double x, double t) { return g(j, t) * profile_dx(j, x); };
  m.problem.f1 = [=](double x, double, double t) {
    return dg(1, t) * profile(1, x) - nu1 * g(1, t) * profile_dxx(1, x);
  };
  m.problem.f2 = [=](double x, double, double t) {
    return dg(2, t) * profile(2, x) - nu2 * g(2, t) * profile_dxx(2, x);
  };
  return m;
}

}  // namespace multirate
