#include "multirate/fespace.hpp"

#include <algorithm>
#include <cmath>

#include "multirate/timegrid.hpp"  // gauss_legendre

namespace multirate {

double lagrange_value(int order, int i, double x) {
  double v = 1.0;
  const double xi = static_cast<double>(i) / order;
  for (int k = 0; k <= order; ++k) {
    if (k == i) continue;
    const double xk = static_cast<double>(k) / order;
    v *= (x - xk) / (xi - xk);
  }
  return v;
}

double lagrange_deriv(int order, int i, double x) {
  const double xi = static_cast<double>(i) / order;
  double d = 0.0;
  for (int m = 0; m <= order; ++m) {
    if (m == i) continue;
    const double xm = static_cast<double>(m) / order;
    double term = 1.0 / (xi - xm);
    for (int k = 0; k <= order; ++k) {
      if (k == i || k == m) continue;
      const double xk = static_cast<double>(k) / order;
      term *= (x - xk) / (xi - xk);
    }
    d += term;
  }
  return d;
}

QuadratureRule gauss_on_unit(int n) {
  std::vector<double> p, w;
  gauss_legendre(n, p, w);
  QuadratureRule rule;
  rule.pts.resize(n);
  rule.wts.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.pts[i] = 0.5 * (p[i] + 1.0);
    rule.wts[i] = 0.5 * w[i];
  }
  return rule;
}

FESpace::FESpace(SubdomainMesh mesh, int order, int vdim,
                 std::vector<BoundaryTag> constrained_tags)
    : mesh_(std::move(mesh)), order_(order), vdim_(vdim) {
  if (order_ < 1) throw std::invalid_argument("polynomial order must be at least 1");
  const int d = mesh_.dim();
  npc_ = (d == 1) ? order_ + 1 : (order_ + 1) * (order_ + 1);
  nodes_x_ = mesh_.nx() * order_ + 1;
  num_nodes_ = (d == 1) ? nodes_x_ : nodes_x_ * (mesh_.ny() * order_ + 1);
  node_tag_.assign(num_nodes_, std::nullopt);

  auto constrained = [&](BoundaryTag t) {
    return std::find(constrained_tags.begin(), constrained_tags.end(), t) !=
           constrained_tags.end();
  };
  std::vector<int> side;
  // Inflow first, no-slip last: a corner shared by both ends up Dirichlet.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& f : mesh_.boundary_facets()) {
      const bool is_dirichlet = f.tag == BoundaryTag::dirichlet;
      if (pass == 0 ? is_dirichlet : !is_dirichlet) continue;
      if (!constrained(f.tag)) continue;
      side_nodes(f.cell, f.side, side);
      for (int n : side) node_tag_[n] = f.tag;
    }
  }

  free_index_.assign(num_dofs(), -1);
  for (int n = 0; n < num_nodes_; ++n) {
    if (node_tag_[n]) continue;
    for (int c = 0; c < vdim_; ++c) {
      free_index_[dof(n, c)] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(dof(n, c));
    }
  }

  // Reference tables at the (order+1)-point tensor Gauss rule.
  const auto rule = gauss_on_unit(order_ + 1);
  const int nq1 = static_cast<int>(rule.pts.size());
  ref_.nq = (d == 1) ? nq1 : nq1 * nq1;
  ref_.wts.resize(ref_.nq);
  ref_.pts.resize(ref_.nq);
  ref_.phi.resize(ref_.nq, npc_);
  ref_.dxi.resize(ref_.nq, npc_);
  ref_.deta.resize(ref_.nq, npc_);
  Eigen::VectorXd phi(npc_), dxi(npc_), deta(npc_);
  int q = 0;
  for (int qy = 0; qy < (d == 1 ? 1 : nq1); ++qy) {
    for (int qx = 0; qx < nq1; ++qx, ++q) {
      const double xi = rule.pts[qx];
      const double eta = (d == 1) ? 0.0 : rule.pts[qy];
      ref_.wts[q] = rule.wts[qx] * (d == 1 ? 1.0 : rule.wts[qy]);
      ref_.pts[q] = {xi, eta};
      basis_at(xi, eta, phi, dxi, deta);
      ref_.phi.row(q) = phi;
      ref_.dxi.row(q) = dxi;
      ref_.deta.row(q) = deta;
    }
  }
}

void FESpace::basis_at(double xi, double eta, Eigen::VectorXd& phi, Eigen::VectorXd& dxi,
                       Eigen::VectorXd& deta) const {
  phi.resize(npc_);
  dxi.resize(npc_);
  deta.resize(npc_);
  if (mesh_.dim() == 1) {
    for (int a = 0; a <= order_; ++a) {
      phi[a] = lagrange_value(order_, a, xi);
      dxi[a] = lagrange_deriv(order_, a, xi);
      deta[a] = 0.0;
    }
    return;
  }
  for (int b = 0; b <= order_; ++b) {
    const double ly = lagrange_value(order_, b, eta);
    const double dy = lagrange_deriv(order_, b, eta);
    for (int a = 0; a <= order_; ++a) {
      const double lx = lagrange_value(order_, a, xi);
      const double dx = lagrange_deriv(order_, a, xi);
      const int l = b * (order_ + 1) + a;
      phi[l] = lx * ly;
      dxi[l] = dx * ly;
      deta[l] = lx * dy;
    }
  }
}

std::array<double, 2> FESpace::node_coord(int node) const {
  if (mesh_.dim() == 1) return {mesh_.x0() + node * mesh_.hx() / order_, 0.0};
  const int jx = node % nodes_x_;
  const int jy = node / nodes_x_;
  return {mesh_.x0() + jx * mesh_.hx() / order_, mesh_.y0() + jy * mesh_.hy() / order_};
}

void FESpace::cell_nodes(int cell, std::vector<int>& out) const {
  out.resize(npc_);
  if (mesh_.dim() == 1) {
    for (int a = 0; a <= order_; ++a) out[a] = cell * order_ + a;
    return;
  }
  const auto [ix, iy] = mesh_.cell_coords(cell);
  for (int b = 0; b <= order_; ++b)
    for (int a = 0; a <= order_; ++a)
      out[b * (order_ + 1) + a] = (iy * order_ + b) * nodes_x_ + ix * order_ + a;
}

void FESpace::side_nodes(int cell, int side, std::vector<int>& out) const {
  if (mesh_.dim() == 1) {
    out.assign(1, cell * order_ + (side == 0 ? 0 : order_));
    return;
  }
  out.resize(order_ + 1);
  const auto [ix, iy] = mesh_.cell_coords(cell);
  auto node = [&](int a, int b) { return (iy * order_ + b) * nodes_x_ + ix * order_ + a; };
  for (int i = 0; i <= order_; ++i) {
    switch (side) {
      case 0: out[i] = node(i, 0); break;
      case 2: out[i] = node(i, order_); break;
      case 3: out[i] = node(0, i); break;
      case 1: out[i] = node(order_, i); break;
      default: throw IndexError("invalid cell side");
    }
  }
}

Eigen::VectorXd FESpace::interpolate(const SpaceFn& fn) const {
  Eigen::VectorXd out(num_dofs());
  for (int n = 0; n < num_nodes_; ++n) {
    const auto [x, y] = node_coord(n);
    const Eigen::VectorXd v = fn(x, y);
    for (int c = 0; c < vdim_; ++c) out[dof(n, c)] = v[c];
  }
  return out;
}

Eigen::VectorXd FESpace::boundary_values(const SpaceFn& dirichlet_fn,
                                         const SpaceFn& inflow_fn) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_dofs());
  for (int n = 0; n < num_nodes_; ++n) {
    if (!node_tag_[n]) continue;
    const auto [x, y] = node_coord(n);
    const SpaceFn& fn = (*node_tag_[n] == BoundaryTag::inflow) ? inflow_fn : dirichlet_fn;
    const Eigen::VectorXd v = fn(x, y);
    for (int c = 0; c < vdim_; ++c) out[dof(n, c)] = v[c];
  }
  return out;
}

Eigen::VectorXd FESpace::eval(const Eigen::VectorXd& coeffs, double x, double y) const {
  const auto& m = mesh_;
  int ix = std::clamp(static_cast<int>((x - m.x0()) / m.hx()), 0, m.nx() - 1);
  int iy = m.dim() == 1 ? 0 : std::clamp(static_cast<int>((y - m.y0()) / m.hy()), 0, m.ny() - 1);
  const int cell = iy * m.nx() + ix;
  const auto origin = m.cell_origin(cell);
  Eigen::VectorXd phi, dxi, deta;
  basis_at((x - origin[0]) / m.hx(), m.dim() == 1 ? 0.0 : (y - origin[1]) / m.hy(), phi, dxi,
           deta);
  std::vector<int> nodes;
  cell_nodes(cell, nodes);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(vdim_);
  for (int l = 0; l < npc_; ++l)
    for (int c = 0; c < vdim_; ++c) v[c] += coeffs[dof(nodes[l], c)] * phi[l];
  return v;
}

Eigen::MatrixXd FESpace::eval_grad(const Eigen::VectorXd& coeffs, double x, double y) const {
  const auto& m = mesh_;
  int ix = std::clamp(static_cast<int>((x - m.x0()) / m.hx()), 0, m.nx() - 1);
  int iy = m.dim() == 1 ? 0 : std::clamp(static_cast<int>((y - m.y0()) / m.hy()), 0, m.ny() - 1);
  const int cell = iy * m.nx() + ix;
  const auto origin = m.cell_origin(cell);
  Eigen::VectorXd phi, dxi, deta;
  basis_at((x - origin[0]) / m.hx(), m.dim() == 1 ? 0.0 : (y - origin[1]) / m.hy(), phi, dxi,
           deta);
  std::vector<int> nodes;
  cell_nodes(cell, nodes);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(vdim_, m.dim());
  for (int l = 0; l < npc_; ++l)
    for (int c = 0; c < vdim_; ++c) {
      g(c, 0) += coeffs[dof(nodes[l], c)] * dxi[l] / m.hx();
      if (m.dim() == 2) g(c, 1) += coeffs[dof(nodes[l], c)] * deta[l] / m.hy();
    }
  return g;
}

namespace {

double cell_volume(const SubdomainMesh& m) {
  return m.dim() == 1 ? m.hx() : m.hx() * m.hy();
}

// Scatters one local matrix (identical on every congruent cell) into triplets.
SparseMatrix scatter_local(const FESpace& s, const Eigen::MatrixXd& loc, bool per_component,
                           ExecMode mode) {
  const int npc = s.nodes_per_cell();
  auto emit = [&](int cell, std::vector<Triplet>& sink) {
    std::vector<int> nodes;
    s.cell_nodes(cell, nodes);
    if (per_component) {
      for (int i = 0; i < npc; ++i)
        for (int j = 0; j < npc; ++j)
          for (int c = 0; c < s.vdim(); ++c)
            sink.push_back({s.dof(nodes[i], c), s.dof(nodes[j], c), loc(i, j)});
    } else {
      // loc is (npc*vdim) x (npc*vdim) in (node-major, component-minor) order
      for (int i = 0; i < npc; ++i)
        for (int ci = 0; ci < s.vdim(); ++ci)
          for (int j = 0; j < npc; ++j)
            for (int cj = 0; cj < s.vdim(); ++cj)
              sink.push_back({s.dof(nodes[i], ci), s.dof(nodes[j], cj),
                              loc(i * s.vdim() + ci, j * s.vdim() + cj)});
    }
  };
  return SparseMatrix::from_triplets(s.num_dofs(), s.num_dofs(),
                                     collect_triplets(s.mesh().num_cells(), emit, mode));
}

}  // namespace

SparseMatrix mass_matrix(const FESpace& s, ExecMode mode) {
  const auto& ref = s.ref_data();
  const double vol = cell_volume(s.mesh());
  Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(s.nodes_per_cell(), s.nodes_per_cell());
  for (int q = 0; q < ref.nq; ++q)
    loc += (ref.wts[q] * vol) * (ref.phi.row(q).transpose() * ref.phi.row(q));
  return scatter_local(s, loc, true, mode);
}

SparseMatrix stiffness_matrix(const FESpace& s, ExecMode mode) {
  const auto& ref = s.ref_data();
  const auto& m = s.mesh();
  const double vol = cell_volume(m);
  Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(s.nodes_per_cell(), s.nodes_per_cell());
  for (int q = 0; q < ref.nq; ++q) {
    loc += (ref.wts[q] * vol / (m.hx() * m.hx())) *
           (ref.dxi.row(q).transpose() * ref.dxi.row(q));
    if (m.dim() == 2)
      loc += (ref.wts[q] * vol / (m.hy() * m.hy())) *
             (ref.deta.row(q).transpose() * ref.deta.row(q));
  }
  return scatter_local(s, loc, true, mode);
}

SparseMatrix symgrad_matrix(const FESpace& s, ExecMode mode) {
  if (s.vdim() != 2 || s.dim() != 2)
    throw std::invalid_argument("symgrad_matrix needs a 2D vector space");
  const auto& ref = s.ref_data();
  const auto& m = s.mesh();
  const double vol = cell_volume(m);
  const int npc = s.nodes_per_cell();
  Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(2 * npc, 2 * npc);
  for (int q = 0; q < ref.nq; ++q) {
    for (int i = 0; i < npc; ++i) {
      const double gi[2] = {ref.dxi(q, i) / m.hx(), ref.deta(q, i) / m.hy()};
      for (int j = 0; j < npc; ++j) {
        const double gj[2] = {ref.dxi(q, j) / m.hx(), ref.deta(q, j) / m.hy()};
        const double dot = gi[0] * gj[0] + gi[1] * gj[1];
        for (int ci = 0; ci < 2; ++ci)
          for (int cj = 0; cj < 2; ++cj) {
            // (eps(phi_j e_cj), eps(phi_i e_ci))
            const double v = 0.5 * ((ci == cj ? dot : 0.0) + gj[ci] * gi[cj]);
            loc(i * 2 + ci, j * 2 + cj) += ref.wts[q] * vol * v;
          }
      }
    }
  }
  return scatter_local(s, loc, false, mode);
}

SparseMatrix div_matrix(const FESpace& pres, const FESpace& vel, ExecMode mode) {
  const auto& m = vel.mesh();
  const int d = m.dim();
  const double vol = cell_volume(m);
  const auto rule = gauss_on_unit(std::max(pres.order(), vel.order()) + 1);
  const int nq1 = static_cast<int>(rule.pts.size());
  const int npv = vel.nodes_per_cell();
  const int npp = pres.nodes_per_cell();
  // Local matrix: rows pressure nodes, cols (velocity node, component).
  Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(npp, npv * vel.vdim());
  Eigen::VectorXd pv(npp), pdx(npp), pde(npp), vv(npv), vdx(npv), vde(npv);
  for (int qy = 0; qy < (d == 1 ? 1 : nq1); ++qy)
    for (int qx = 0; qx < nq1; ++qx) {
      const double xi = rule.pts[qx], eta = d == 1 ? 0.0 : rule.pts[qy];
      const double w = rule.wts[qx] * (d == 1 ? 1.0 : rule.wts[qy]) * vol;
      pres.basis_at(xi, eta, pv, pdx, pde);
      vel.basis_at(xi, eta, vv, vdx, vde);
      for (int i = 0; i < npp; ++i)
        for (int j = 0; j < npv; ++j) {
          loc(i, j * vel.vdim() + 0) += w * pv[i] * vdx[j] / m.hx();
          if (d == 2 && vel.vdim() == 2) loc(i, j * vel.vdim() + 1) += w * pv[i] * vde[j] / m.hy();
        }
    }
  auto emit = [&](int cell, std::vector<Triplet>& sink) {
    std::vector<int> pn, vn;
    pres.cell_nodes(cell, pn);
    vel.cell_nodes(cell, vn);
    for (int i = 0; i < npp; ++i)
      for (int j = 0; j < npv; ++j)
        for (int c = 0; c < vel.vdim(); ++c)
          sink.push_back({pres.dof(pn[i], 0), vel.dof(vn[j], c), loc(i, j * vel.vdim() + c)});
  };
  return SparseMatrix::from_triplets(pres.num_dofs(), vel.num_dofs(),
                                     collect_triplets(m.num_cells(), emit, mode));
}

Eigen::VectorXd source_vector(const FESpace& s, const SpaceFn& f, ExecMode mode) {
  const auto& ref = s.ref_data();
  const auto& m = s.mesh();
  const double vol = cell_volume(m);
  const int npc = s.nodes_per_cell();
  const int ncells = m.num_cells();
  // Per-cell locals computed in parallel, accumulated serially in cell order.
  std::vector<Eigen::VectorXd> locals(ncells);
  auto work = [&](int cell) {
    const auto origin = m.cell_origin(cell);
    Eigen::VectorXd loc = Eigen::VectorXd::Zero(npc * s.vdim());
    for (int q = 0; q < ref.nq; ++q) {
      const double x = origin[0] + ref.pts[q][0] * m.hx();
      const double y = m.dim() == 1 ? 0.0 : origin[1] + ref.pts[q][1] * m.hy();
      const Eigen::VectorXd fv = f(x, y);
      for (int l = 0; l < npc; ++l)
        for (int c = 0; c < s.vdim(); ++c)
          loc[l * s.vdim() + c] += ref.wts[q] * vol * ref.phi(q, l) * fv[c];
    }
    locals[cell] = std::move(loc);
  };
  if (mode == ExecMode::openmp) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(max_threads())
#endif
    for (int cell = 0; cell < ncells; ++cell) work(cell);
  } else {
    for (int cell = 0; cell < ncells; ++cell) work(cell);
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.num_dofs());
  std::vector<int> nodes;
  for (int cell = 0; cell < ncells; ++cell) {
    s.cell_nodes(cell, nodes);
    for (int l = 0; l < npc; ++l)
      for (int c = 0; c < s.vdim(); ++c) out[s.dof(nodes[l], c)] += locals[cell][l * s.vdim() + c];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interface assembly
// ---------------------------------------------------------------------------

namespace {

struct TraceEval {
  std::vector<int> nodes;
  Eigen::MatrixXd val;  // nq x npc
  Eigen::MatrixXd gx, gy;
};

TraceEval trace_eval(const FESpace& s, int cell, const std::vector<std::array<double, 2>>& pts) {
  TraceEval t;
  s.cell_nodes(cell, t.nodes);
  const int nq = static_cast<int>(pts.size());
  const auto& m = s.mesh();
  const auto origin = m.cell_origin(cell);
  t.val.resize(nq, s.nodes_per_cell());
  t.gx.resize(nq, s.nodes_per_cell());
  t.gy.resize(nq, s.nodes_per_cell());
  Eigen::VectorXd phi, dxi, deta;
  for (int q = 0; q < nq; ++q) {
    const double xi = (pts[q][0] - origin[0]) / m.hx();
    const double eta = m.dim() == 1 ? 0.0 : (pts[q][1] - origin[1]) / m.hy();
    s.basis_at(xi, eta, phi, dxi, deta);
    t.val.row(q) = phi;
    t.gx.row(q) = dxi / m.hx();
    t.gy.row(q) = m.dim() == 1 ? Eigen::VectorXd::Zero(s.nodes_per_cell()).eval()
                               : (deta / m.hy()).eval();
  }
  return t;
}

struct FacetQuad {
  std::vector<std::array<double, 2>> pts;
  std::vector<double> wts;  // include the facet measure
};

FacetQuad facet_quad(const InterfacePair& p, int n_points, int dim) {
  FacetQuad fq;
  if (dim == 1) {
    fq.pts = {p.p0};
    fq.wts = {1.0};  // point interface, unit measure
    return fq;
  }
  const auto rule = gauss_on_unit(n_points);
  for (std::size_t q = 0; q < rule.pts.size(); ++q) {
    const double s = rule.pts[q];
    fq.pts.push_back({p.p0[0] + s * (p.p1[0] - p.p0[0]), p.p0[1] + s * (p.p1[1] - p.p0[1])});
    fq.wts.push_back(rule.wts[q] * p.measure);
  }
  return fq;
}

template <typename Emit>
void for_each_interface_pair(const CoupledMesh& cm, const FESpace& sa, int a, const FESpace& sb,
                             int b, int n_points, Emit&& emit) {
  for (const auto& p : cm.interface()) {
    const auto fq = facet_quad(p, n_points, sa.dim());
    const int cell_a = (a == 1) ? p.cell1 : p.cell2;
    const int cell_b = (b == 1) ? p.cell1 : p.cell2;
    const auto ta = trace_eval(sa, cell_a, fq.pts);
    const auto tb = trace_eval(sb, cell_b, fq.pts);
    const std::array<double, 2> nb = (b == 1) ? p.normal1
                                              : std::array<double, 2>{-p.normal1[0], -p.normal1[1]};
    const std::array<double, 2> na = (a == 1) ? p.normal1
                                              : std::array<double, 2>{-p.normal1[0], -p.normal1[1]};
    emit(fq, ta, tb, na, nb);
  }
}

}  // namespace

SparseMatrix interface_mass(const CoupledMesh& cm, const FESpace& sa, int a, const FESpace& sb,
                            int b) {
  std::vector<Triplet> trips;
  const int np = std::max(sa.order(), sb.order()) + 1;
  for_each_interface_pair(cm, sa, a, sb, b, np, [&](const FacetQuad& fq, const TraceEval& ta,
                                                    const TraceEval& tb, auto, auto) {
    for (std::size_t q = 0; q < fq.pts.size(); ++q)
      for (std::size_t i = 0; i < ta.nodes.size(); ++i)
        for (std::size_t k = 0; k < tb.nodes.size(); ++k) {
          const double v = fq.wts[q] * ta.val(q, i) * tb.val(q, k);
          if (v == 0.0) continue;
          for (int c = 0; c < sa.vdim(); ++c)
            trips.push_back({sa.dof(ta.nodes[i], c), sb.dof(tb.nodes[k], c), v});
        }
  });
  return SparseMatrix::from_triplets(sa.num_dofs(), sb.num_dofs(), std::move(trips));
}

SparseMatrix interface_flux_grad(const CoupledMesh& cm, const FESpace& sa, int a,
                                 const FESpace& sb, int b) {
  std::vector<Triplet> trips;
  const int np = std::max(sa.order(), sb.order()) + 1;
  for_each_interface_pair(
      cm, sa, a, sb, b, np,
      [&](const FacetQuad& fq, const TraceEval& ta, const TraceEval& tb, auto,
          const std::array<double, 2>& nb) {
        for (std::size_t q = 0; q < fq.pts.size(); ++q)
          for (std::size_t i = 0; i < ta.nodes.size(); ++i)
            for (std::size_t k = 0; k < tb.nodes.size(); ++k) {
              const double dn = tb.gx(q, k) * nb[0] + tb.gy(q, k) * nb[1];
              const double v = fq.wts[q] * ta.val(q, i) * dn;
              if (v != 0.0)
                trips.push_back({sa.dof(ta.nodes[i], 0), sb.dof(tb.nodes[k], 0), v});
            }
      });
  return SparseMatrix::from_triplets(sa.num_dofs(), sb.num_dofs(), std::move(trips));
}

SparseMatrix interface_flux_symgrad(const CoupledMesh& cm, const FESpace& sa, int a,
                                    const FESpace& sb, int b) {
  std::vector<Triplet> trips;
  const int np = std::max(sa.order(), sb.order()) + 1;
  for_each_interface_pair(
      cm, sa, a, sb, b, np,
      [&](const FacetQuad& fq, const TraceEval& ta, const TraceEval& tb, auto,
          const std::array<double, 2>& nb) {
        for (std::size_t q = 0; q < fq.pts.size(); ++q)
          for (std::size_t i = 0; i < ta.nodes.size(); ++i)
            for (std::size_t k = 0; k < tb.nodes.size(); ++k) {
              const double g[2] = {tb.gx(q, k), tb.gy(q, k)};
              const double gdotn = g[0] * nb[0] + g[1] * nb[1];
              for (int cj = 0; cj < 2; ++cj)
                for (int ci = 0; ci < 2; ++ci) {
                  // (eps(phi_k e_cj) n)_ci
                  const double comp = 0.5 * (g[ci] * nb[cj] + (ci == cj ? gdotn : 0.0));
                  const double v = fq.wts[q] * ta.val(q, i) * comp;
                  if (v != 0.0)
                    trips.push_back({sa.dof(ta.nodes[i], ci), sb.dof(tb.nodes[k], cj), v});
                }
            }
      });
  return SparseMatrix::from_triplets(sa.num_dofs(), sb.num_dofs(), std::move(trips));
}

SparseMatrix interface_pressure_normal(const CoupledMesh& cm, const FESpace& vel_a, int a,
                                       const FESpace& pres_b, int b) {
  std::vector<Triplet> trips;
  const int np = std::max(vel_a.order(), pres_b.order()) + 1;
  for_each_interface_pair(
      cm, vel_a, a, pres_b, b, np,
      [&](const FacetQuad& fq, const TraceEval& ta, const TraceEval& tb, auto,
          const std::array<double, 2>& nb) {
        for (std::size_t q = 0; q < fq.pts.size(); ++q)
          for (std::size_t i = 0; i < ta.nodes.size(); ++i)
            for (std::size_t k = 0; k < tb.nodes.size(); ++k)
              for (int d = 0; d < 2; ++d) {
                const double v = fq.wts[q] * ta.val(q, i) * nb[d] * tb.val(q, k);
                if (v != 0.0)
                  trips.push_back({vel_a.dof(ta.nodes[i], d), pres_b.dof(tb.nodes[k], 0), v});
              }
      });
  return SparseMatrix::from_triplets(vel_a.num_dofs(), pres_b.num_dofs(), std::move(trips));
}

// ---------------------------------------------------------------------------
// Norms and errors
// ---------------------------------------------------------------------------

namespace {

double domain_l2_sq(const FESpace& s, const Eigen::VectorXd& u) {
  const auto& ref = s.ref_data();
  const double vol = cell_volume(s.mesh());
  double acc = 0.0;
  std::vector<int> nodes;
  for (int cell = 0; cell < s.mesh().num_cells(); ++cell) {
    s.cell_nodes(cell, nodes);
    for (int q = 0; q < ref.nq; ++q) {
      for (int c = 0; c < s.vdim(); ++c) {
        double v = 0.0;
        for (int l = 0; l < s.nodes_per_cell(); ++l) v += u[s.dof(nodes[l], c)] * ref.phi(q, l);
        acc += ref.wts[q] * vol * v * v;
      }
    }
  }
  return acc;
}

double domain_h1_sq(const FESpace& s, const Eigen::VectorXd& u) {
  const auto& ref = s.ref_data();
  const auto& m = s.mesh();
  const double vol = cell_volume(m);
  double acc = 0.0;
  std::vector<int> nodes;
  for (int cell = 0; cell < m.num_cells(); ++cell) {
    s.cell_nodes(cell, nodes);
    for (int q = 0; q < ref.nq; ++q)
      for (int c = 0; c < s.vdim(); ++c) {
        double gx = 0.0, gy = 0.0;
        for (int l = 0; l < s.nodes_per_cell(); ++l) {
          gx += u[s.dof(nodes[l], c)] * ref.dxi(q, l) / m.hx();
          if (m.dim() == 2) gy += u[s.dof(nodes[l], c)] * ref.deta(q, l) / m.hy();
        }
        acc += ref.wts[q] * vol * (gx * gx + gy * gy);
      }
  }
  return acc;
}

double interface_jump_sq(const CoupledMesh& cm, const FESpace& s1, const Eigen::VectorXd& u1,
                         const FESpace& s2, const Eigen::VectorXd& u2) {
  double acc = 0.0;
  const int np = std::max(s1.order(), s2.order()) + 1;
  for (const auto& p : cm.interface()) {
    const auto fq = facet_quad(p, np, s1.dim());
    const auto t1 = trace_eval(s1, p.cell1, fq.pts);
    const auto t2 = trace_eval(s2, p.cell2, fq.pts);
    for (std::size_t q = 0; q < fq.pts.size(); ++q)
      for (int c = 0; c < s1.vdim(); ++c) {
        double v1 = 0.0, v2 = 0.0;
        for (std::size_t l = 0; l < t1.nodes.size(); ++l)
          v1 += u1[s1.dof(t1.nodes[l], c)] * t1.val(q, l);
        for (std::size_t l = 0; l < t2.nodes.size(); ++l)
          v2 += u2[s2.dof(t2.nodes[l], c)] * t2.val(q, l);
        acc += fq.wts[q] * (v2 - v1) * (v2 - v1);
      }
  }
  return acc;
}

}  // namespace

double coupled_norm(const CoupledMesh& cm, const FESpace& s1, const Eigen::VectorXd& u1,
                    const FESpace& s2, const Eigen::VectorXd& u2, NormKind kind,
                    TripleWeights w) {
  switch (kind) {
    case NormKind::l2_domain:
      return std::sqrt(domain_l2_sq(s1, u1) + domain_l2_sq(s2, u2));
    case NormKind::h1_seminorm:
      return std::sqrt(domain_h1_sq(s1, u1) + domain_h1_sq(s2, u2));
    case NormKind::interface_l2_jump:
      return std::sqrt(interface_jump_sq(cm, s1, u1, s2, u2));
    case NormKind::triple:
      return std::sqrt(w.nu1 * w.nu1 * domain_h1_sq(s1, u1) +
                       w.nu2 * w.nu2 * domain_h1_sq(s2, u2) +
                       w.gamma_over_h * interface_jump_sq(cm, s1, u1, s2, u2));
  }
  throw std::invalid_argument("unknown norm kind");
}

double l2_error(const FESpace& s, const Eigen::VectorXd& coeffs, const SpaceFn& exact) {
  const auto& m = s.mesh();
  const double vol = cell_volume(m);
  const auto rule = gauss_on_unit(s.order() + 2);
  const int nq1 = static_cast<int>(rule.pts.size());
  double acc = 0.0;
  std::vector<int> nodes;
  Eigen::VectorXd phi, dxi, deta;
  for (int cell = 0; cell < m.num_cells(); ++cell) {
    s.cell_nodes(cell, nodes);
    const auto origin = m.cell_origin(cell);
    for (int qy = 0; qy < (m.dim() == 1 ? 1 : nq1); ++qy)
      for (int qx = 0; qx < nq1; ++qx) {
        const double xi = rule.pts[qx], eta = m.dim() == 1 ? 0.0 : rule.pts[qy];
        const double w = rule.wts[qx] * (m.dim() == 1 ? 1.0 : rule.wts[qy]) * vol;
        s.basis_at(xi, eta, phi, dxi, deta);
        const double x = origin[0] + xi * m.hx();
        const double y = m.dim() == 1 ? 0.0 : origin[1] + eta * m.hy();
        const Eigen::VectorXd ex = exact(x, y);
        for (int c = 0; c < s.vdim(); ++c) {
          double v = 0.0;
          for (int l = 0; l < s.nodes_per_cell(); ++l) v += coeffs[s.dof(nodes[l], c)] * phi[l];
          acc += w * (v - ex[c]) * (v - ex[c]);
        }
      }
  }
  return std::sqrt(acc);
}

double h1_semi_error(const FESpace& s, const Eigen::VectorXd& coeffs, const SpaceGradFn& grad) {
  const auto& m = s.mesh();
  const double vol = cell_volume(m);
  const auto rule = gauss_on_unit(s.order() + 2);
  const int nq1 = static_cast<int>(rule.pts.size());
  double acc = 0.0;
  std::vector<int> nodes;
  Eigen::VectorXd phi, dxi, deta;
  for (int cell = 0; cell < m.num_cells(); ++cell) {
    s.cell_nodes(cell, nodes);
    const auto origin = m.cell_origin(cell);
    for (int qy = 0; qy < (m.dim() == 1 ? 1 : nq1); ++qy)
      for (int qx = 0; qx < nq1; ++qx) {
        const double xi = rule.pts[qx], eta = m.dim() == 1 ? 0.0 : rule.pts[qy];
        const double w = rule.wts[qx] * (m.dim() == 1 ? 1.0 : rule.wts[qy]) * vol;
        s.basis_at(xi, eta, phi, dxi, deta);
        const double x = origin[0] + xi * m.hx();
        const double y = m.dim() == 1 ? 0.0 : origin[1] + eta * m.hy();
        const Eigen::MatrixXd g = grad(x, y);
        for (int c = 0; c < s.vdim(); ++c) {
          double gx = 0.0, gy = 0.0;
          for (int l = 0; l < s.nodes_per_cell(); ++l) {
            gx += coeffs[s.dof(nodes[l], c)] * dxi[l] / m.hx();
            if (m.dim() == 2) gy += coeffs[s.dof(nodes[l], c)] * deta[l] / m.hy();
          }
          acc += w * (gx - g(c, 0)) * (gx - g(c, 0));
          if (m.dim() == 2) acc += w * (gy - g(c, 1)) * (gy - g(c, 1));
        }
      }
  }
  return std::sqrt(acc);
}

}  // namespace multirate
