#include "multirate/mesh.hpp"

#include <cmath>

namespace multirate {

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::dirichlet: return "dirichlet";
    case BoundaryTag::inflow: return "inflow";
    case BoundaryTag::outflow: return "outflow";
    case BoundaryTag::interface_: return "interface";
  }
  return "?";
}

SubdomainMesh SubdomainMesh::interval(double x0, double x1, int n_cells, BoundaryTag left,
                                      BoundaryTag right) {
  if (!(x1 > x0) || n_cells < 1) throw InvalidMesh("degenerate interval mesh");
  SubdomainMesh m;
  m.dim_ = 1;
  m.nx_ = n_cells;
  m.x0_ = x0;
  m.hx_ = (x1 - x0) / n_cells;
  m.facets_ = {{0, 0, left}, {n_cells - 1, 1, right}};
  return m;
}

SubdomainMesh SubdomainMesh::rectangle(
    double x0, double x1, double y0, double y1, int nx, int ny,
    const std::function<BoundaryTag(int, double, double)>& tagger) {
  if (!(x1 > x0) || !(y1 > y0) || nx < 1 || ny < 1) throw InvalidMesh("degenerate rectangle mesh");
  SubdomainMesh m;
  m.dim_ = 2;
  m.nx_ = nx;
  m.ny_ = ny;
  m.x0_ = x0;
  m.y0_ = y0;
  m.hx_ = (x1 - x0) / nx;
  m.hy_ = (y1 - y0) / ny;
  auto add = [&](int cell, int side, double mx, double my) {
    m.facets_.push_back({cell, side, tagger(side, mx, my)});
  };
  for (int ix = 0; ix < nx; ++ix) {
    const double mx = x0 + (ix + 0.5) * m.hx_;
    add(ix, 0, mx, y0);                        // bottom row
    add((ny - 1) * nx + ix, 2, mx, y1);        // top row
  }
  for (int iy = 0; iy < ny; ++iy) {
    const double my = y0 + (iy + 0.5) * m.hy_;
    add(iy * nx, 3, x0, my);                   // left column
    add(iy * nx + nx - 1, 1, x1, my);          // right column
  }
  return m;
}

std::array<int, 2> SubdomainMesh::cell_coords(int cell) const {
  if (dim_ == 1) return {cell, 0};
  return {cell % nx_, cell / nx_};
}

std::array<double, 2> SubdomainMesh::cell_origin(int cell) const {
  auto [ix, iy] = cell_coords(cell);
  return {x0_ + ix * hx_, y0_ + iy * hy_};
}

nlohmann::json SubdomainMesh::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  auto& cells = j["cells"] = nlohmann::json::array();
  if (dim_ == 1) {
    for (int i = 0; i <= nx_; ++i) nodes.push_back({x0_ + i * hx_});
    for (int c = 0; c < nx_; ++c) cells.push_back({c, c + 1});
  } else {
    for (int iy = 0; iy <= ny_; ++iy)
      for (int ix = 0; ix <= nx_; ++ix) nodes.push_back({x0_ + ix * hx_, y0_ + iy * hy_});
    auto id = [&](int ix, int iy) { return iy * (nx_ + 1) + ix; };
    for (int iy = 0; iy < ny_; ++iy)
      for (int ix = 0; ix < nx_; ++ix)
        cells.push_back({id(ix, iy), id(ix + 1, iy), id(ix + 1, iy + 1), id(ix, iy + 1)});
  }
  auto& tags = j["tags"] = nlohmann::json::array();
  for (const auto& f : facets_)
    tags.push_back({{"cell", f.cell}, {"side", f.side}, {"tag", to_string(f.tag)}});
  return j;
}

CoupledMesh::CoupledMesh(SubdomainMesh sub1, SubdomainMesh sub2, std::vector<InterfacePair> pairs)
    : sub1_(std::move(sub1)), sub2_(std::move(sub2)), pairs_(std::move(pairs)) {
  for (const auto& p : pairs_) {
    if (std::abs(p.normal1[0]) + std::abs(p.normal1[1]) == 0.0)
      throw InvalidMesh("interface pair with zero normal");
  }
}

nlohmann::json CoupledMesh::to_json() const {
  nlohmann::json j;
  j["subdomain1"] = sub1_.to_json();
  j["subdomain2"] = sub2_.to_json();
  auto& pairs = j["interface_pairs"] = nlohmann::json::array();
  for (const auto& p : pairs_)
    pairs.push_back({{"p0", {p.p0[0], p.p0[1]}},
                     {"p1", {p.p1[0], p.p1[1]}},
                     {"normal1", {p.normal1[0], p.normal1[1]}}});
  return j;
}

CoupledMesh build_coupled_mesh_1d(double split, double h, std::array<double, 2> domain) {
  const auto [x0, x1] = domain;
  if (!(split > x0) || !(split < x1)) throw MeshSizeError("split point must be strictly interior");
  const double n1 = (split - x0) / h;
  const double n2 = (x1 - split) / h;
  auto near_int = [](double x) { return std::abs(x - std::round(x)) < 1e-9 && std::round(x) >= 1; };
  if (!near_int(n1) || !near_int(n2))
    throw MeshSizeError("mesh size h must divide both subdomain lengths");
  auto m1 = SubdomainMesh::interval(x0, split, static_cast<int>(std::round(n1)),
                                    BoundaryTag::dirichlet, BoundaryTag::interface_);
  auto m2 = SubdomainMesh::interval(split, x1, static_cast<int>(std::round(n2)),
                                    BoundaryTag::interface_, BoundaryTag::dirichlet);
  InterfacePair p;
  p.cell1 = m1.num_cells() - 1;
  p.side1 = 1;
  p.cell2 = 0;
  p.side2 = 0;
  p.p0 = p.p1 = {split, 0.0};
  p.normal1 = {1.0, 0.0};
  p.measure = 1.0;
  return CoupledMesh(std::move(m1), std::move(m2), {p});
}

CoupledMesh build_two_pipe_mesh(int m) {
  if (m < 2) throw MeshSizeError("two-pipe mesh needs at least 2 cells per unit length");
  auto tag1 = [](int side, double mx, double) {
    if (side == 3) return BoundaryTag::inflow;
    if (side == 1) return BoundaryTag::outflow;
    if (side == 0 && mx > 1.0 && mx < 3.0) return BoundaryTag::interface_;
    return BoundaryTag::dirichlet;
  };
  auto tag2 = [](int side, double, double) {
    if (side == 3) return BoundaryTag::inflow;
    if (side == 1) return BoundaryTag::outflow;
    if (side == 2) return BoundaryTag::interface_;
    return BoundaryTag::dirichlet;
  };
  auto m1 = SubdomainMesh::rectangle(0.0, 4.0, 0.0, 1.0, 4 * m, m, tag1);
  auto m2 = SubdomainMesh::rectangle(1.0, 3.0, -1.0, 0.0, 2 * m, m, tag2);

  const double h = 1.0 / m;
  std::vector<InterfacePair> pairs;
  for (int i = 0; i < 2 * m; ++i) {
    // i-th interface facet, left to right along (1,3) x {0}.
    InterfacePair p;
    const int ix1 = m + i;  // cell column in mesh 1 covering x in (1 + i/m, 1 + (i+1)/m)
    p.cell1 = ix1;          // bottom row of mesh 1
    p.side1 = 0;
    p.cell2 = (m - 1) * (2 * m) + i;  // top row of mesh 2
    p.side2 = 2;
    p.p0 = {1.0 + i * h, 0.0};
    p.p1 = {1.0 + (i + 1) * h, 0.0};
    p.normal1 = {0.0, -1.0};
    p.measure = h;
    pairs.push_back(p);
  }
  return CoupledMesh(std::move(m1), std::move(m2), std::move(pairs));
}

}  // namespace multirate
