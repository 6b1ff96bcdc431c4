#include "multirate/stokes.hpp"

#include <cmath>
#include <map>
#include <tuple>

namespace multirate {

namespace {

SpaceFn vec_at_time(const VectorSpaceTimeFn& f, double t) {
  if (!f) return [](double, double) { return Eigen::VectorXd::Zero(2); };
  return [&f, t](double x, double y) -> Eigen::VectorXd { return f(x, y, t); };
}

const SpaceFn kZero2 = [](double, double) { return Eigen::VectorXd::Zero(2); };

}  // namespace

StokesAssembler::StokesAssembler(StokesProblem problem, CoupledMesh cmesh, ExecMode mode)
    : problem_(std::move(problem)), cmesh_(std::move(cmesh)), mode_(mode),
      vel1_(cmesh_.sub(1), problem_.order, 2, {BoundaryTag::dirichlet, BoundaryTag::inflow}),
      vel2_(cmesh_.sub(2), problem_.order, 2, {BoundaryTag::dirichlet, BoundaryTag::inflow}),
      pres1_(cmesh_.sub(1), problem_.order - 1, 1, {}),
      pres2_(cmesh_.sub(2), problem_.order - 1, 1, {}) {
  if (problem_.order < 2) throw std::invalid_argument("Taylor-Hood needs velocity order >= 2");
  for (int j = 0; j < 2; ++j) {
    const FESpace& v = j == 0 ? vel1_ : vel2_;
    const FESpace& q = j == 0 ? pres1_ : pres2_;
    vmass_[j] = mass_matrix(v, mode_);
    keps_[j] = symgrad_matrix(v, mode_);
    bdiv_[j] = div_matrix(q, v, mode_);
    bdivT_[j] = bdiv_[j].transpose();
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const FESpace& va = a == 0 ? vel1_ : vel2_;
      const FESpace& vb = b == 0 ? vel1_ : vel2_;
      const FESpace& qb = b == 0 ? pres1_ : pres2_;
      tv_[a][b] = interface_mass(cmesh_, va, a + 1, vb, b + 1);
      fe_[a][b] = interface_flux_symgrad(cmesh_, va, a + 1, vb, b + 1);
      pn_[a][b] = interface_pressure_normal(cmesh_, va, a + 1, qb, b + 1);
    }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      feT_[a][b] = fe_[b][a].transpose();
      qn_[a][b] = pn_[b][a].transpose();
    }
}

Eigen::VectorXd StokesAssembler::boundary_velocity(int j, double t) const {
  const VectorSpaceTimeFn& inflow = (j == 1) ? problem_.inflow1 : problem_.inflow2;
  return velocity_space(j).boundary_values(kZero2, vec_at_time(inflow, t));
}

void StokesAssembler::assemble_into(const MultirateMesh& tm, int n,
                                    const Eigen::VectorXd& prev_u1,
                                    const Eigen::VectorXd& prev_u2, const Parts& parts,
                                    bool emit_matrix, std::vector<Triplet>* trips,
                                    Eigen::VectorXd& rhs) const {
  const int count[2] = {tm.micro_count(n, 1), tm.micro_count(n, 2)};
  const double klen[2] = {tm.micro_length(n, 1), tm.micro_length(n, 2)};
  const double nu[2] = {problem_.nu1, problem_.nu2};
  const double goh = gamma_over_h();
  const FESpace* vel[2] = {&vel1_, &vel2_};
  const FESpace* pres[2] = {&pres1_, &pres2_};
  const int nfu[2] = {vel1_.num_free(), vel2_.num_free()};
  const int nfp[2] = {pres1_.num_dofs(), pres2_.num_dofs()};

  // Layout: subproblem 1 micro blocks [u, p] first, then subproblem 2.
  auto u_off = [&](int j, int m) {
    const int base = j == 0 ? 0 : count[0] * (nfu[0] + nfp[0]);
    return base + m * (nfu[j] + nfp[j]);
  };
  auto p_off = [&](int j, int m) { return u_off(j, m) + nfu[j]; };
  const int total = count[0] * (nfu[0] + nfp[0]) + count[1] * (nfu[1] + nfp[1]);

  std::array<std::vector<Eigen::VectorXd>, 2> bc;
  for (int j = 0; j < 2; ++j) {
    bc[j].resize(count[j]);
    for (int m = 0; m < count[j]; ++m)
      bc[j][m] = boundary_velocity(j + 1, tm.micro_node(n, j + 1, m + 1));
  }
  const Eigen::VectorXd* prev[2] = {&prev_u1, &prev_u2};

  rhs = Eigen::VectorXd::Zero(total);

  // Row space: velocity (field 0) or pressure (field 1); likewise for the
  // trial space.  cm == -1 selects the previous macro end state (velocity).
  auto scatter = [&](const SparseMatrix& A, double coeff, int rfield, int rj, int rm, int cfield,
                     int cj, int cm) {
    const FESpace& rs = rfield == 0 ? *vel[rj] : *pres[rj];
    const FESpace& cs = cfield == 0 ? *vel[cj] : *pres[cj];
    const int roff = rfield == 0 ? u_off(rj, rm) : p_off(rj, rm);
    const int coff = (cm < 0) ? 0 : (cfield == 0 ? u_off(cj, cm) : p_off(cj, cm));
    const Eigen::VectorXd* known = (cm < 0) ? prev[cj] : nullptr;
    const Eigen::VectorXd* cbc = (cm >= 0 && cfield == 0) ? &bc[cj][cm] : nullptr;
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
    const int o = 1 - j;
    const double k = klen[j];
    for (int m = 0; m < count[j]; ++m) {
      const auto& w = (j == 0) ? w1[m] : w2[m];
      // Momentum rows.
      if (parts.mass) {
        scatter(vmass_[j], 1.0, 0, j, m, 0, j, m);
        scatter(vmass_[j], -1.0, 0, j, m, 0, j, m - 1);
      }
      if (parts.viscous) scatter(keps_[j], 2.0 * k * nu[j], 0, j, m, 0, j, m);
      if (parts.consistency) {
        scatter(fe_[j][j], -k * nu[j], 0, j, m, 0, j, m);
        for (int mo = 0; mo < count[o]; ++mo)
          if (w[mo] != 0.0) scatter(fe_[j][o], k * nu[o] * w[mo], 0, j, m, 0, o, mo);
      }
      if (parts.symmetry) {
        scatter(feT_[j][j], k * nu[j], 0, j, m, 0, j, m);
        for (int mo = 0; mo < count[o]; ++mo)
          if (w[mo] != 0.0) scatter(feT_[j][o], -k * nu[j] * w[mo], 0, j, m, 0, o, mo);
      }
      if (parts.penalty) {
        scatter(tv_[j][j], k * goh, 0, j, m, 0, j, m);
        for (int mo = 0; mo < count[o]; ++mo)
          if (w[mo] != 0.0) scatter(tv_[j][o], -k * goh * w[mo], 0, j, m, 0, o, mo);
      }
      if (parts.pressure) {
        scatter(bdivT_[j], -k, 0, j, m, 1, j, m);
        scatter(pn_[j][j], 0.5 * k, 0, j, m, 1, j, m);
        for (int mo = 0; mo < count[o]; ++mo)
          if (w[mo] != 0.0) scatter(pn_[j][o], -0.5 * k * w[mo], 0, j, m, 1, o, mo);
      }
      if (parts.source) {
        const VectorSpaceTimeFn& f = (j == 0) ? problem_.f1 : problem_.f2;
        if (f) {
          const double t = tm.micro_node(n, j + 1, m + 1);
          const Eigen::VectorXd load = source_vector(*vel[j], vec_at_time(f, t), mode_);
          const int roff = u_off(j, m);
          for (int d = 0; d < vel[j]->num_dofs(); ++d) {
            const int fd = vel[j]->free_index(d);
            if (fd >= 0) rhs[roff + fd] += k * load[d];
          }
        }
      }
      // Incompressibility rows.
      if (parts.incompressibility) {
        scatter(bdiv_[j], -k, 1, j, m, 0, j, m);
        scatter(qn_[j][j], 0.5 * k, 1, j, m, 0, j, m);
        for (int mo = 0; mo < count[o]; ++mo)
          if (w[mo] != 0.0) scatter(qn_[j][o], -0.5 * k * w[mo], 1, j, m, 0, o, mo);
      }
    }
  }
}

BlockSystem StokesAssembler::assemble_macro_step(const MultirateMesh& tm, int n,
                                                 const Eigen::VectorXd& prev_u1,
                                                 const Eigen::VectorXd& prev_u2,
                                                 const Parts& parts) const {
  const int count[2] = {tm.micro_count(n, 1), tm.micro_count(n, 2)};
  const int nfu[2] = {vel1_.num_free(), vel2_.num_free()};
  const int nfp[2] = {pres1_.num_dofs(), pres2_.num_dofs()};
  const int total = count[0] * (nfu[0] + nfp[0]) + count[1] * (nfu[1] + nfp[1]);
  std::vector<Triplet> trips;
  Eigen::VectorXd rhs;
  assemble_into(tm, n, prev_u1, prev_u2, parts, true, &trips, rhs);
  std::vector<BlockSystem::Block> blocks;
  std::vector<UnknownLabel> labels;
  labels.reserve(total);
  for (int j = 0; j < 2; ++j)
    for (int m = 0; m < count[j]; ++m) {
      blocks.push_back({"u" + std::to_string(j + 1) + "_m" + std::to_string(m), nfu[j]});
      for (int i = 0; i < nfu[j]; ++i) labels.push_back({j + 1, m, "u", i});
      blocks.push_back({"p" + std::to_string(j + 1) + "_m" + std::to_string(m), nfp[j]});
      for (int i = 0; i < nfp[j]; ++i) labels.push_back({j + 1, m, "p", i});
    }
  return BlockSystem(std::move(blocks),
                     SparseMatrix::from_triplets(total, total, std::move(trips)), std::move(rhs),
                     std::move(labels));
}

StokesTrajectory StokesAssembler::solve_transient(std::shared_ptr<const MultirateMesh> tm) const {
  Eigen::VectorXd state[2] = {boundary_velocity(1, 0.0), boundary_velocity(2, 0.0)};
  const Eigen::VectorXd init[2] = {state[0], state[1]};
  std::vector<Eigen::VectorXd> uvals[2], pvals[2];

  // One factorization per distinct (length, counts) macro step shape; cached
  // steps only rebuild the right-hand side.
  std::map<std::tuple<double, int, int>, std::unique_ptr<DirectSolver>> cache;
  for (int n = 0; n < tm->num_macro_steps(); ++n) {
    const auto key =
        std::make_tuple(tm->macro_length(n), tm->micro_count(n, 1), tm->micro_count(n, 2));
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
      const FESpace& v = velocity_space(j + 1);
      const FESpace& q = pressure_space(j + 1);
      for (int m = 0; m < tm->micro_count(n, j + 1); ++m) {
        Eigen::VectorXd ufull = boundary_velocity(j + 1, tm->micro_node(n, j + 1, m + 1));
        for (int d = 0; d < v.num_dofs(); ++d)
          if (v.free_index(d) >= 0) ufull[d] = x[off + v.free_index(d)];
        off += v.num_free();
        uvals[j].push_back(std::move(ufull));
        pvals[j].push_back(x.segment(off, q.num_dofs()));
        off += q.num_dofs();
      }
      state[j] = uvals[j].back();
    }
  }
  return {PiecewiseConstantTimeFn(tm, Partition::sub1, init[0], std::move(uvals[0])),
          PiecewiseConstantTimeFn(tm, Partition::sub2, init[1], std::move(uvals[1])),
          PiecewiseConstantTimeFn(tm, Partition::sub1,
                                  Eigen::VectorXd::Zero(pres1_.num_dofs()), std::move(pvals[0])),
          PiecewiseConstantTimeFn(tm, Partition::sub2,
                                  Eigen::VectorXd::Zero(pres2_.num_dofs()), std::move(pvals[1]))};
}

BlockSystem assemble_stokes_macro_step(const StokesProblem& p, const CoupledMesh& cm,
                                       const MultirateMesh& tm, int n,
                                       const Eigen::VectorXd& prev_u1,
                                       const Eigen::VectorXd& prev_u2) {
  return StokesAssembler(p, cm).assemble_macro_step(tm, n, prev_u1, prev_u2);
}

StokesTrajectory solve_stokes_transient(const StokesProblem& p, const CoupledMesh& cm,
                                        std::shared_ptr<const MultirateMesh> tm) {
  return StokesAssembler(p, cm).solve_transient(std::move(tm));
}

StokesProblem two_pipe_benchmark() {
  StokesProblem p;
  p.nu1 = 1.0;
  p.nu2 = 56.0;
  p.order = 2;
  p.inflow1 = [](double, double y, double t) {
    return Eigen::Vector2d(std::sin(M_PI * t) * y * (1.0 - y), 0.0);
  };
  p.inflow2 = [](double, double y, double t) {
    return Eigen::Vector2d(std::sin(M_PI * t) * y * (1.0 + y), 0.0);
  };
  return p;
}

}  // namespace multirate
