#include "multirate/projections.hpp"

#include <cmath>

namespace multirate {

MergedNodes::MergedNodes(const CoupledMesh& cm, const FESpace& s1, const FESpace& s2) {
  map1_.resize(s1.num_scalar_nodes());
  for (int n = 0; n < s1.num_scalar_nodes(); ++n) map1_[n] = n;
  map2_.assign(s2.num_scalar_nodes(), -1);
  std::vector<int> side1, side2;
  for (const auto& p : cm.interface()) {
    s1.side_nodes(p.cell1, p.side1, side1);
    s2.side_nodes(p.cell2, p.side2, side2);
    for (std::size_t i = 0; i < side1.size(); ++i) {
      const auto a = s1.node_coord(side1[i]);
      const auto b = s2.node_coord(side2[i]);
      if (std::abs(a[0] - b[0]) > 1e-12 || std::abs(a[1] - b[1]) > 1e-12)
        throw MeshMismatch("interface nodes do not coincide");
      map2_[side2[i]] = side1[i];
    }
  }
  count_ = s1.num_scalar_nodes();
  for (int n = 0; n < s2.num_scalar_nodes(); ++n)
    if (map2_[n] < 0) map2_[n] = count_++;
}

namespace {

// Assembles the merged-space stiffness and the (grad u, grad phi) load for
// one subdomain into triplets/rhs laid out per merged scalar node and
// component.
void accumulate_ritz(const FESpace& s, int j, const MergedNodes& merged, int vdim,
                     const CoupledGradFn& grad_exact, std::vector<Triplet>& trips,
                     Eigen::VectorXd& rhs) {
  const auto& m = s.mesh();
  const auto& ref = s.ref_data();
  const double vol = m.dim() == 1 ? m.hx() : m.hx() * m.hy();
  std::vector<int> nodes;
  for (int cell = 0; cell < m.num_cells(); ++cell) {
    s.cell_nodes(cell, nodes);
    const auto origin = m.cell_origin(cell);
    for (int q = 0; q < ref.nq; ++q) {
      const double x = origin[0] + ref.pts[q][0] * m.hx();
      const double y = m.dim() == 1 ? 0.0 : origin[1] + ref.pts[q][1] * m.hy();
      const Eigen::MatrixXd ge = grad_exact(j, x, y);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double gix = ref.dxi(q, i) / m.hx();
        const double giy = m.dim() == 2 ? ref.deta(q, i) / m.hy() : 0.0;
        for (int c = 0; c < vdim; ++c) {
          double load = gix * ge(c, 0);
          if (m.dim() == 2) load += giy * ge(c, 1);
          rhs[merged.merged(j, nodes[i]) * vdim + c] += ref.wts[q] * vol * load;
        }
        for (std::size_t k = 0; k < nodes.size(); ++k) {
          const double gkx = ref.dxi(q, k) / m.hx();
          const double gky = m.dim() == 2 ? ref.deta(q, k) / m.hy() : 0.0;
          const double v = ref.wts[q] * vol * (gix * gkx + giy * gky);
          for (int c = 0; c < vdim; ++c)
            trips.push_back({merged.merged(j, nodes[i]) * vdim + c,
                             merged.merged(j, nodes[k]) * vdim + c, v});
        }
      }
    }
  }
}

std::vector<BoundaryTag> outer_tags() {
  return {BoundaryTag::dirichlet, BoundaryTag::inflow, BoundaryTag::outflow};
}

}  // namespace

CoupledField ritz_projection(const CoupledMesh& cm, int order, int vdim,
                             const CoupledGradFn& grad_exact) {
  FESpace s1(cm.sub(1), order, vdim, outer_tags());
  FESpace s2(cm.sub(2), order, vdim, outer_tags());
  MergedNodes merged(cm, s1, s2);
  const int n_merged = merged.count() * vdim;

  std::vector<bool> constrained(merged.count(), false);
  for (int n = 0; n < s1.num_scalar_nodes(); ++n)
    if (s1.node_constrained(n)) constrained[merged.merged(1, n)] = true;
  for (int n = 0; n < s2.num_scalar_nodes(); ++n)
    if (s2.node_constrained(n)) constrained[merged.merged(2, n)] = true;

  std::vector<Triplet> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_merged);
  accumulate_ritz(s1, 1, merged, vdim, grad_exact, trips, rhs);
  accumulate_ritz(s2, 2, merged, vdim, grad_exact, trips, rhs);

  // Restrict to free merged dofs (homogeneous Dirichlet on the outer boundary).
  std::vector<int> reduce(n_merged, -1);
  std::vector<int> free;
  for (int n = 0; n < merged.count(); ++n)
    if (!constrained[n])
      for (int c = 0; c < vdim; ++c) {
        reduce[n * vdim + c] = static_cast<int>(free.size());
        free.push_back(n * vdim + c);
      }
  std::vector<Triplet> red;
  red.reserve(trips.size());
  for (const auto& t : trips)
    if (reduce[t.row] >= 0 && reduce[t.col] >= 0)
      red.push_back({reduce[t.row], reduce[t.col], t.value});
  Eigen::VectorXd rhs_red(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) rhs_red[i] = rhs[free[i]];

  auto A = SparseMatrix::from_triplets(static_cast<int>(free.size()),
                                       static_cast<int>(free.size()), std::move(red));
  Eigen::VectorXd x = solve_direct(A, rhs_red);

  Eigen::VectorXd full = Eigen::VectorXd::Zero(n_merged);
  for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = x[i];
  CoupledField out;
  out.u1.resize(s1.num_dofs());
  out.u2.resize(s2.num_dofs());
  for (int n = 0; n < s1.num_scalar_nodes(); ++n)
    for (int c = 0; c < vdim; ++c) out.u1[s1.dof(n, c)] = full[merged.merged(1, n) * vdim + c];
  for (int n = 0; n < s2.num_scalar_nodes(); ++n)
    for (int c = 0; c < vdim; ++c) out.u2[s2.dof(n, c)] = full[merged.merged(2, n) * vdim + c];
  return out;
}

CoupledField stokes_ritz_projection(const CoupledMesh& cm, int order,
                                    const CoupledGradFn& grad_exact) {
  const int vdim = 2;
  FESpace v1(cm.sub(1), order, vdim, outer_tags());
  FESpace v2(cm.sub(2), order, vdim, outer_tags());
  FESpace q1(cm.sub(1), order - 1, 1, {});
  FESpace q2(cm.sub(2), order - 1, 1, {});
  MergedNodes mv(cm, v1, v2);
  MergedNodes mq(cm, q1, q2);
  const int nv = mv.count() * vdim;
  const int nq = mq.count();

  std::vector<bool> constrained(mv.count(), false);
  for (int n = 0; n < v1.num_scalar_nodes(); ++n)
    if (v1.node_constrained(n)) constrained[mv.merged(1, n)] = true;
  for (int n = 0; n < v2.num_scalar_nodes(); ++n)
    if (v2.node_constrained(n)) constrained[mv.merged(2, n)] = true;

  std::vector<Triplet> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + nq);
  {
    Eigen::VectorXd rv = Eigen::VectorXd::Zero(nv);
    accumulate_ritz(v1, 1, mv, vdim, grad_exact, trips, rv);
    accumulate_ritz(v2, 2, mv, vdim, grad_exact, trips, rv);
    rhs.head(nv) = rv;
  }
  // Constraint blocks: -(q, div phi) in the velocity rows, (div Ru, psi) = 0.
  for (int j = 1; j <= 2; ++j) {
    const FESpace& v = (j == 1) ? v1 : v2;
    const FESpace& qs = (j == 1) ? q1 : q2;
    auto B = div_matrix(qs, v);
    B.for_each_entry([&](int qi, int vk, double val) {
      const int qrow = nv + mq.merged(j, qi);
      const int vcol = mv.merged(j, vk / vdim) * vdim + (vk % vdim);
      trips.push_back({qrow, vcol, val});
      trips.push_back({vcol, qrow, -val});
    });
  }

  // Unknowns: free velocity dofs plus multiplier dofs with the first pinned.
  std::vector<int> reduce(nv + nq, -1);
  std::vector<int> free;
  for (int n = 0; n < mv.count(); ++n)
    if (!constrained[n])
      for (int c = 0; c < vdim; ++c) {
        reduce[n * vdim + c] = static_cast<int>(free.size());
        free.push_back(n * vdim + c);
      }
  for (int i = 1; i < nq; ++i) {
    reduce[nv + i] = static_cast<int>(free.size());
    free.push_back(nv + i);
  }
  std::vector<Triplet> red;
  for (const auto& t : trips)
    if (reduce[t.row] >= 0 && reduce[t.col] >= 0)
      red.push_back({reduce[t.row], reduce[t.col], t.value});
  Eigen::VectorXd rhs_red(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) rhs_red[i] = rhs[free[i]];
  auto A = SparseMatrix::from_triplets(static_cast<int>(free.size()),
                                       static_cast<int>(free.size()), std::move(red));
  Eigen::VectorXd x = solve_direct(A, rhs_red);

  Eigen::VectorXd full = Eigen::VectorXd::Zero(nv);
  for (std::size_t i = 0; i < free.size(); ++i)
    if (free[i] < nv) full[free[i]] = x[i];
  CoupledField out;
  out.u1.resize(v1.num_dofs());
  out.u2.resize(v2.num_dofs());
  for (int n = 0; n < v1.num_scalar_nodes(); ++n)
    for (int c = 0; c < vdim; ++c) out.u1[v1.dof(n, c)] = full[mv.merged(1, n) * vdim + c];
  for (int n = 0; n < v2.num_scalar_nodes(); ++n)
    for (int c = 0; c < vdim; ++c) out.u2[v2.dof(n, c)] = full[mv.merged(2, n) * vdim + c];
  return out;
}

Eigen::VectorXd l2_projection(const FESpace& s, const SpaceFn& f) {
  auto M = mass_matrix(s);
  return solve_direct(M, source_vector(s, f));
}

}  // namespace multirate
