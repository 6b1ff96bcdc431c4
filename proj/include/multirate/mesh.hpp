#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "multirate/errors.hpp"

namespace multirate {

enum class BoundaryTag { dirichlet, inflow, outflow, interface_ };

std::string to_string(BoundaryTag tag);

/// One boundary facet of a structured mesh: the owning cell plus a local side
/// (1D: 0 = left endpoint, 1 = right; 2D: 0 = bottom, 1 = right, 2 = top,
/// 3 = left).
struct BoundaryFacet {
  int cell;
  int side;
  BoundaryTag tag;
};

/// Axis-aligned structured mesh: an interval partition in 1D, a uniform
/// quadrilateral grid over a rectangle in 2D.  Immutable.
class SubdomainMesh {
 public:
  static SubdomainMesh interval(double x0, double x1, int n_cells, BoundaryTag left,
                                BoundaryTag right);
  static SubdomainMesh rectangle(
      double x0, double x1, double y0, double y1, int nx, int ny,
      const std::function<BoundaryTag(int side, double mid_x, double mid_y)>& tagger);

  int dim() const { return dim_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int num_cells() const { return dim_ == 1 ? nx_ : nx_ * ny_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double h() const { return dim_ == 1 ? hx_ : std::max(hx_, hy_); }

  /// Lower-left corner of a cell; cells are numbered row by row.
  std::array<double, 2> cell_origin(int cell) const;
  std::array<int, 2> cell_coords(int cell) const;

  const std::vector<BoundaryFacet>& boundary_facets() const { return facets_; }

  nlohmann::json to_json() const;

 private:
  int dim_ = 1;
  int nx_ = 0, ny_ = 0;
  double x0_ = 0, y0_ = 0, hx_ = 0, hy_ = 0;
  std::vector<BoundaryFacet> facets_;
};

/// One matched facet pair on the interface.  The 1D interface is a single
/// point of unit measure; 2D facets carry their length and are parameterized
/// in ascending coordinate order on both sides, so quadrature points coincide.
struct InterfacePair {
  int cell1, side1;
  int cell2, side2;
  std::array<double, 2> p0, p1;      // physical endpoints (equal in 1D)
  std::array<double, 2> normal1;     // outward from subdomain 1; normal2 = -normal1
  double measure;                    // facet length; 1 for the 1D point
};

/// Two matching subdomain meshes with interface facet pairing.
class CoupledMesh {
 public:
  CoupledMesh(SubdomainMesh sub1, SubdomainMesh sub2, std::vector<InterfacePair> pairs);

  const SubdomainMesh& sub(int j) const { return j == 1 ? sub1_ : sub2_; }
  const std::vector<InterfacePair>& interface() const { return pairs_; }
  double h() const { return std::max(sub1_.h(), sub2_.h()); }

  nlohmann::json to_json() const;

 private:
  SubdomainMesh sub1_, sub2_;
  std::vector<InterfacePair> pairs_;
};

/// Two interval meshes sharing the split node; the interface is that node
/// with normals +1 / -1.  h must divide both pieces.
CoupledMesh build_coupled_mesh_1d(double split, double h,
                                  std::array<double, 2> domain = {0.0, 1.0});

/// The two-pipe geometry: Omega1 = (0,4) x (0,1), Omega2 = (1,3) x (-1,0),
/// interface (1,3) x {0}, square cells of size 1/m, inflow on the left edges,
/// outflow on the right edges, no-slip elsewhere.
CoupledMesh build_two_pipe_mesh(int m);

}  // namespace multirate
