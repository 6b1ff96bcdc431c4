// Standalone single-rate Taylor-Hood Nitsche solver assembled directly from
// the symmetrized continuous-in-time weak form by facet quadrature; validates
// the multirate Stokes path in its single-rate reduction.
#pragma once

#include <memory>

#include "multirate/fespace.hpp"
#include "multirate/stokes.hpp"

namespace oracles {

struct StokesOracleResult {
  std::vector<Eigen::VectorXd> u1, u2, p1, p2;
};

// One joint matrix over [v1 v2 p1 p2] full dofs; backward Euler in time when
// steps > 0, the steady problem when steps == 0.
inline StokesOracleResult stokes_single_rate(const multirate::StokesProblem& problem,
                                             const multirate::CoupledMesh& cm, int n_steps,
                                             double horizon, bool steady = false,
                                             double steady_time = 1.0) {
  using namespace multirate;
  const int r = problem.order;
  FESpace v1(cm.sub(1), r, 2, {BoundaryTag::dirichlet, BoundaryTag::inflow});
  FESpace v2(cm.sub(2), r, 2, {BoundaryTag::dirichlet, BoundaryTag::inflow});
  FESpace q1(cm.sub(1), r - 1, 1, {});
  FESpace q2(cm.sub(2), r - 1, 1, {});
  const double k = steady ? 1.0 : horizon / n_steps;
  const double goh = stokes_gamma(problem, r) / cm.h();
  const double nu[2] = {problem.nu1, problem.nu2};

  const int ov2 = v1.num_dofs();
  const int op1 = ov2 + v2.num_dofs();
  const int op2 = op1 + q1.num_dofs();
  const int total = op2 + q2.num_dofs();

  std::vector<Triplet> trips;
  auto add_block = [&](const SparseMatrix& A, double c, int ro, int co) {
    A.for_each_entry([&](int i, int kk, double v) { trips.push_back({ro + i, co + kk, c * v}); });
  };
  if (!steady) {
    add_block(mass_matrix(v1), 1.0, 0, 0);
    add_block(mass_matrix(v2), 1.0, ov2, ov2);
  }
  add_block(symgrad_matrix(v1), 2.0 * k * nu[0], 0, 0);
  add_block(symgrad_matrix(v2), 2.0 * k * nu[1], ov2, ov2);
  auto B1 = div_matrix(q1, v1);
  auto B2 = div_matrix(q2, v2);
  add_block(B1.transpose(), -k, 0, op1);
  add_block(B2.transpose(), -k, ov2, op2);
  add_block(B1, -k, op1, 0);
  add_block(B2, -k, op2, ov2);

  // Interface terms by direct quadrature.
  const int np = r + 1;
  auto rule = gauss_on_unit(np);
  std::vector<int> n1, n2, pn1, pn2;
  Eigen::VectorXd f1v, f1x, f1e, f2v, f2x, f2e, g1v, g1x, g1e, g2v, g2x, g2e;
  for (const auto& pr : cm.interface()) {
    v1.cell_nodes(pr.cell1, n1);
    v2.cell_nodes(pr.cell2, n2);
    q1.cell_nodes(pr.cell1, pn1);
    q2.cell_nodes(pr.cell2, pn2);
    for (int q = 0; q < np; ++q) {
      const double s = rule.pts[q];
      const double w = k * rule.wts[q] * pr.measure;
      const double x = pr.p0[0] + s * (pr.p1[0] - pr.p0[0]);
      const double y = pr.p0[1] + s * (pr.p1[1] - pr.p0[1]);
      const auto o1 = cm.sub(1).cell_origin(pr.cell1);
      const auto o2 = cm.sub(2).cell_origin(pr.cell2);
      const double xi1 = (x - o1[0]) / cm.sub(1).hx(), et1 = (y - o1[1]) / cm.sub(1).hy();
      const double xi2 = (x - o2[0]) / cm.sub(2).hx(), et2 = (y - o2[1]) / cm.sub(2).hy();
      v1.basis_at(xi1, et1, f1v, f1x, f1e);
      v2.basis_at(xi2, et2, f2v, f2x, f2e);
      q1.basis_at(xi1, et1, g1v, g1x, g1e);
      q2.basis_at(xi2, et2, g2v, g2x, g2e);

      struct VEntry {
        int dof;
        int comp;
        double val;
        double flux[2];  // nu_j eps(phi e_c) n_j, with the side-2 sign flipped
        double sign;
      };
      std::vector<VEntry> ve;
      auto push_side = [&](const FESpace& vs, const std::vector<int>& nodes,
                           const Eigen::VectorXd& val, const Eigen::VectorXd& dx,
                           const Eigen::VectorXd& de, int side, int off) {
        const auto& sm = cm.sub(side);
        const double nrm[2] = {side == 1 ? pr.normal1[0] : -pr.normal1[0],
                               side == 1 ? pr.normal1[1] : -pr.normal1[1]};
        const double sgn = side == 1 ? -1.0 : 1.0;
        for (std::size_t l = 0; l < nodes.size(); ++l) {
          const double g[2] = {dx[l] / sm.hx(), de[l] / sm.hy()};
          const double gdotn = g[0] * nrm[0] + g[1] * nrm[1];
          for (int c = 0; c < 2; ++c) {
            VEntry e;
            e.dof = off + vs.dof(nodes[l], c);
            e.comp = c;
            e.val = val[l];
            // nu1 eps(.)n1 on side 1, minus nu2 eps(.)n2 on side 2.
            const double nuj = (side == 1 ? 1.0 : -1.0) * nu[side - 1];
            for (int d = 0; d < 2; ++d)
              e.flux[d] = nuj * 0.5 * (g[d] * nrm[c] + (c == d ? gdotn : 0.0));
            e.sign = sgn;
            ve.push_back(e);
          }
        }
      };
      push_side(v1, n1, f1v, f1x, f1e, 1, 0);
      push_side(v2, n2, f2v, f2x, f2e, 2, ov2);

      struct PEntry {
        int dof;
        double flux[2];  // psi n_j with the side-1 sign flipped: p2 n2 - p1 n1
      };
      std::vector<PEntry> pe;
      for (std::size_t l = 0; l < pn1.size(); ++l)
        pe.push_back({op1 + pn1[l],
                      {-g1v[l] * pr.normal1[0], -g1v[l] * pr.normal1[1]}});
      for (std::size_t l = 0; l < pn2.size(); ++l)
        pe.push_back({op2 + pn2[l],
                      {g2v[l] * -pr.normal1[0], g2v[l] * -pr.normal1[1]}});

      for (const auto& a : ve)
        for (const auto& b : ve) {
          // jump(test a) . jump(trial b) penalty (same component only),
          // consistency + skew symmetry terms.
          double val = 0.0;
          if (a.comp == b.comp) val += goh * a.sign * a.val * b.sign * b.val;
          val += b.flux[a.comp] * a.sign * a.val;   // <flux(u), jump(phi)>
          val -= a.flux[b.comp] * b.sign * b.val;   // -<jump(u), flux(phi)>
          if (val != 0.0) trips.push_back({a.dof, b.dof, w * val});
        }
      for (const auto& a : ve)
        for (const auto& b : pe) {
          const double val = 0.5 * b.flux[a.comp] * a.sign * a.val;
          if (val != 0.0) {
            trips.push_back({a.dof, b.dof, w * val});   // momentum rows
            trips.push_back({b.dof, a.dof, w * val});   // continuity rows
          }
        }
    }
  }
  auto A = SparseMatrix::from_triplets(total, total, trips);

  std::vector<int> reduce(total, -1);
  std::vector<int> free;
  auto mark = [&](const FESpace& s, int off, bool with_constraints) {
    for (int d = 0; d < s.num_dofs(); ++d)
      if (!with_constraints || !s.dof_constrained(d)) {
        reduce[off + d] = static_cast<int>(free.size());
        free.push_back(off + d);
      }
  };
  mark(v1, 0, true);
  mark(v2, ov2, true);
  mark(q1, op1, false);
  mark(q2, op2, false);
  std::vector<Triplet> red;
  A.for_each_entry([&](int i, int kk, double v) {
    if (reduce[i] >= 0 && reduce[kk] >= 0) red.push_back({reduce[i], reduce[kk], v});
  });
  DirectSolver solver(SparseMatrix::from_triplets(static_cast<int>(free.size()),
                                                  static_cast<int>(free.size()), red));

  auto bc_at = [&](double t) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(total);
    auto zero = [](double, double) { return Eigen::VectorXd::Zero(2); };
    auto in1 = [&](double x, double y) -> Eigen::VectorXd {
      return problem.inflow1 ? problem.inflow1(x, y, t) : Eigen::Vector2d::Zero();
    };
    auto in2 = [&](double x, double y) -> Eigen::VectorXd {
      return problem.inflow2 ? problem.inflow2(x, y, t) : Eigen::Vector2d::Zero();
    };
    g.head(ov2) = v1.boundary_values(zero, in1);
    g.segment(ov2, v2.num_dofs()) = v2.boundary_values(zero, in2);
    return g;
  };

  StokesOracleResult out;
  auto M1 = mass_matrix(v1);
  auto M2 = mass_matrix(v2);
  Eigen::VectorXd state = bc_at(0.0);
  const int steps = steady ? 1 : n_steps;
  for (int n = 1; n <= steps; ++n) {
    const double t = steady ? steady_time : horizon * n / n_steps;
    Eigen::VectorXd g = bc_at(t);
    Eigen::VectorXd rhs_full = -A.apply(g);
    if (!steady) {
      rhs_full.head(ov2) += M1.apply(state.head(ov2));
      rhs_full.segment(ov2, v2.num_dofs()) += M2.apply(state.segment(ov2, v2.num_dofs()));
    }
    Eigen::VectorXd rhs(free.size());
    for (std::size_t i = 0; i < free.size(); ++i) rhs[i] = rhs_full[free[i]];
    Eigen::VectorXd xs = solver.solve(rhs);
    Eigen::VectorXd full = g;
    for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = xs[i];
    state = full;
    out.u1.push_back(full.head(ov2));
    out.u2.push_back(full.segment(ov2, v2.num_dofs()));
    out.p1.push_back(full.segment(op1, q1.num_dofs()));
    out.p2.push_back(full.segment(op2, q2.num_dofs()));
  }
  return out;
}

}  // namespace oracles
