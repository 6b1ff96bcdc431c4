#include "multirate/timegrid.hpp"

#include <algorithm>
#include <cmath>

namespace multirate {

MultirateMesh MultirateMesh::build(std::vector<double> macro_nodes,
                                   std::vector<std::array<int, 2>> micro_counts) {
  if (macro_nodes.size() < 2)
    throw InvalidMesh("mesh needs at least two macro nodes");
  if (macro_nodes.front() != 0.0)
    throw InvalidMesh("macro partition must start at t = 0");
  for (std::size_t i = 1; i < macro_nodes.size(); ++i)
    if (!(macro_nodes[i] > macro_nodes[i - 1]))
      throw InvalidMesh("macro nodes must be strictly increasing");
  if (micro_counts.size() != macro_nodes.size() - 1)
    throw InvalidMesh("need one micro count pair per macro step");
  for (const auto& c : micro_counts) {
    if (c[0] < 1 || c[1] < 1)
      throw InvalidMesh("micro counts must be positive");
    if (std::min(c[0], c[1]) != 1)
      throw ConstraintViolation("macro step refined in both subproblems");
  }
  MultirateMesh m;
  m.macro_nodes_ = std::move(macro_nodes);
  m.micro_counts_ = std::move(micro_counts);
  m.offsets_.resize(m.micro_counts_.size());
  std::array<int, 2> acc{0, 0};
  for (std::size_t n = 0; n < m.micro_counts_.size(); ++n) {
    m.offsets_[n] = acc;
    acc[0] += m.micro_counts_[n][0];
    acc[1] += m.micro_counts_[n][1];
  }
  return m;
}

int MultirateMesh::num_intervals(Partition p) const {
  if (p == Partition::macro) return num_macro_steps();
  int j = (p == Partition::sub1) ? 1 : 2;
  int total = 0;
  for (const auto& c : micro_counts_) total += c[j - 1];
  return total;
}

double MultirateMesh::max_micro_length(int j) const {
  double k = 0.0;
  for (int n = 0; n < num_macro_steps(); ++n) k = std::max(k, micro_length(n, j));
  return k;
}

double MultirateMesh::max_macro_length() const {
  double k = 0.0;
  for (int n = 0; n < num_macro_steps(); ++n) k = std::max(k, macro_length(n));
  return k;
}

MultirateMesh MultirateMesh::refine_micro(int j, int n) const {
  if (n < 0 || n >= num_macro_steps()) throw IndexError("macro step index out of range");
  const int jo = other_sub(j);
  auto nodes = macro_nodes_;
  auto counts = micro_counts_;
  if (micro_count(n, jo) == 1) {
    counts[n][j - 1] *= 2;
  } else {
    // The other side is refined, so this side has a single micro step and the
    // refinement introduces a new macro node at the step midpoint.
    const int no = micro_count(n, jo);
    if (no % 2 != 0)
      throw CannotPromote("cannot split macro step: odd micro count on the other side");
    const double mid = macro_node(n) + 0.5 * macro_length(n);
    nodes.insert(nodes.begin() + n + 1, mid);
    std::array<int, 2> half = counts[n];
    half[jo - 1] = no / 2;
    half[j - 1] = 1;
    counts[n] = half;
    counts.insert(counts.begin() + n + 1, half);
  }
  return build(std::move(nodes), std::move(counts));
}

MultirateMesh MultirateMesh::refine_micro_all(int j) const {
  MultirateMesh out = *this;
  for (int n = out.num_macro_steps() - 1; n >= 0; --n) out = out.refine_micro(j, n);
  return out;
}

nlohmann::json MultirateMesh::to_json() const {
  nlohmann::json j;
  j["macro_nodes"] = macro_nodes_;
  auto& counts = j["micro_counts"] = nlohmann::json::array();
  for (const auto& c : micro_counts_) counts.push_back({c[0], c[1]});
  return j;
}

MultirateMesh MultirateMesh::from_json(const nlohmann::json& j) {
  std::vector<double> nodes = j.at("macro_nodes").get<std::vector<double>>();
  std::vector<std::array<int, 2>> counts;
  for (const auto& c : j.at("micro_counts")) counts.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
  return build(std::move(nodes), std::move(counts));
}

MultirateMesh uniform_mesh(int n_steps, double horizon) {
  std::vector<double> nodes(n_steps + 1);
  for (int i = 0; i <= n_steps; ++i) nodes[i] = horizon * i / n_steps;
  nodes[0] = 0.0;
  return MultirateMesh::build(std::move(nodes),
                              std::vector<std::array<int, 2>>(n_steps, {1, 1}));
}

PiecewiseConstantTimeFn::PiecewiseConstantTimeFn(std::shared_ptr<const MultirateMesh> mesh,
                                                 Partition part, Eigen::VectorXd initial_value,
                                                 std::vector<Eigen::VectorXd> values)
    : mesh_(std::move(mesh)), part_(part), initial_(std::move(initial_value)),
      values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != mesh_->num_intervals(part_))
    throw InvalidMesh("payload count does not match partition interval count");
  for (const auto& v : values_)
    if (v.size() != initial_.size())
      throw InvalidMesh("payload dimensions differ across intervals");
}

const Eigen::VectorXd& PiecewiseConstantTimeFn::value(int n, int m) const {
  if (part_ == Partition::macro) return values_.at(n);
  int j = (part_ == Partition::sub1) ? 1 : 2;
  return values_.at(mesh_->flat_index(n, j, m));
}

const Eigen::VectorXd& PiecewiseConstantTimeFn::eval(double t) const {
  if (t <= 0.0) return initial_;
  const auto& nodes = mesh_->macro_nodes();
  // First macro step whose right endpoint covers t.
  auto it = std::lower_bound(nodes.begin() + 1, nodes.end(), t);
  int n = std::min<int>(static_cast<int>(it - nodes.begin()) - 1,
                        mesh_->num_macro_steps() - 1);
  if (part_ == Partition::macro) return values_[n];
  int j = (part_ == Partition::sub1) ? 1 : 2;
  const int count = mesh_->micro_count(n, j);
  for (int m = 1; m <= count; ++m)
    if (t <= mesh_->micro_node(n, j, m)) return values_[mesh_->flat_index(n, j, m - 1)];
  return values_[mesh_->flat_index(n, j, count - 1)];
}

double PiecewiseConstantTimeFn::interval_end(int flat) const {
  if (part_ == Partition::macro) return mesh_->macro_node(flat + 1);
  int j = (part_ == Partition::sub1) ? 1 : 2;
  for (int n = 0; n < mesh_->num_macro_steps(); ++n) {
    int off = mesh_->flat_offset(n, j);
    if (flat < off + mesh_->micro_count(n, j)) return mesh_->micro_node(n, j, flat - off + 1);
  }
  throw IndexError("interval index out of range");
}

double PiecewiseConstantTimeFn::interval_start(int flat) const {
  if (part_ == Partition::macro) return mesh_->macro_node(flat);
  int j = (part_ == Partition::sub1) ? 1 : 2;
  for (int n = 0; n < mesh_->num_macro_steps(); ++n) {
    int off = mesh_->flat_offset(n, j);
    if (flat < off + mesh_->micro_count(n, j)) return mesh_->micro_node(n, j, flat - off);
  }
  throw IndexError("interval index out of range");
}

PiecewiseConstantTimeFn endpoint_projection(const TimeFn& f,
                                            std::shared_ptr<const MultirateMesh> mesh, int j) {
  std::vector<Eigen::VectorXd> values;
  values.reserve(mesh->num_intervals(partition_of(j)));
  for (int n = 0; n < mesh->num_macro_steps(); ++n)
    for (int m = 1; m <= mesh->micro_count(n, j); ++m)
      values.push_back(f(mesh->micro_node(n, j, m)));
  return PiecewiseConstantTimeFn(mesh, partition_of(j), f(0.0), std::move(values));
}

PiecewiseConstantTimeFn endpoint_projection(const PiecewiseConstantTimeFn& g,
                                            std::shared_ptr<const MultirateMesh> mesh, int j) {
  if (!(g.mesh() == *mesh)) throw MeshMismatch("function lives on a different time mesh");
  std::vector<Eigen::VectorXd> values;
  values.reserve(mesh->num_intervals(partition_of(j)));
  for (int n = 0; n < mesh->num_macro_steps(); ++n)
    for (int m = 1; m <= mesh->micro_count(n, j); ++m)
      values.push_back(g.eval(mesh->micro_node(n, j, m)));
  return PiecewiseConstantTimeFn(mesh, partition_of(j), g.initial_value(), std::move(values));
}

namespace {

int partition_count(const MultirateMesh& mesh, int n, Partition p) {
  if (p == Partition::macro) return 1;
  return mesh.micro_count(n, p == Partition::sub1 ? 1 : 2);
}

double partition_node(const MultirateMesh& mesh, int n, Partition p, int m) {
  if (p == Partition::macro) return m == 0 ? mesh.macro_node(n) : mesh.macro_node(n + 1);
  return mesh.micro_node(n, p == Partition::sub1 ? 1 : 2, m);
}

}  // namespace

std::vector<std::vector<double>> transfer_weights(const MultirateMesh& mesh, int n, int j,
                                                  Partition source) {
  const int nt = mesh.micro_count(n, j);
  const int ns = partition_count(mesh, n, source);
  std::vector<std::vector<double>> w(nt, std::vector<double>(ns, 0.0));
  for (int m = 0; m < nt; ++m) {
    const double a = mesh.micro_node(n, j, m);
    const double b = mesh.micro_node(n, j, m + 1);
    for (int s = 0; s < ns; ++s) {
      const double c = partition_node(mesh, n, source, s);
      const double d = partition_node(mesh, n, source, s + 1);
      const double overlap = std::min(b, d) - std::max(a, c);
      if (overlap > 0.0) w[m][s] = overlap / (b - a);
    }
  }
  return w;
}

PiecewiseConstantTimeFn transfer_average(const PiecewiseConstantTimeFn& g,
                                         std::shared_ptr<const MultirateMesh> mesh, int j) {
  if (!(g.mesh() == *mesh)) throw MeshMismatch("function lives on a different time mesh");
  std::vector<Eigen::VectorXd> values;
  values.reserve(mesh->num_intervals(partition_of(j)));
  int src_off = 0;
  for (int n = 0; n < mesh->num_macro_steps(); ++n) {
    const auto w = transfer_weights(*mesh, n, j, g.partition());
    const int ns = partition_count(*mesh, n, g.partition());
    for (int m = 0; m < mesh->micro_count(n, j); ++m) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(g.dim());
      for (int s = 0; s < ns; ++s)
        if (w[m][s] != 0.0) v += w[m][s] * g.value(src_off + s);
      values.push_back(std::move(v));
    }
    src_off += ns;
  }
  return PiecewiseConstantTimeFn(mesh, partition_of(j), g.initial_value(), std::move(values));
}

PiecewiseConstantTimeFn macro_average(const PiecewiseConstantTimeFn& g,
                                      std::shared_ptr<const MultirateMesh> mesh) {
  if (!(g.mesh() == *mesh)) throw MeshMismatch("function lives on a different time mesh");
  std::vector<Eigen::VectorXd> values;
  values.reserve(mesh->num_macro_steps());
  int src_off = 0;
  for (int n = 0; n < mesh->num_macro_steps(); ++n) {
    const int ns = partition_count(*mesh, n, g.partition());
    const double kn = mesh->macro_length(n);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.dim());
    for (int s = 0; s < ns; ++s) {
      const double len = partition_node(*mesh, n, g.partition(), s + 1) -
                         partition_node(*mesh, n, g.partition(), s);
      v += (len / kn) * g.value(src_off + s);
    }
    values.push_back(std::move(v));
    src_off += ns;
  }
  return PiecewiseConstantTimeFn(mesh, Partition::macro, g.initial_value(), std::move(values));
}

PiecewiseConstantTimeFn macro_average(const TimeFn& f,
                                      std::shared_ptr<const MultirateMesh> mesh,
                                      int quad_points) {
  std::vector<double> qp, qw;
  gauss_legendre(quad_points, qp, qw);
  std::vector<Eigen::VectorXd> values;
  values.reserve(mesh->num_macro_steps());
  for (int n = 0; n < mesh->num_macro_steps(); ++n) {
    const double a = mesh->macro_node(n), b = mesh->macro_node(n + 1);
    Eigen::VectorXd v = 0.5 * qw[0] * f(0.5 * (a + b) + 0.5 * (b - a) * qp[0]);
    for (int q = 1; q < quad_points; ++q)
      v += 0.5 * qw[q] * f(0.5 * (a + b) + 0.5 * (b - a) * qp[q]);
    values.push_back(std::move(v));
  }
  return PiecewiseConstantTimeFn(mesh, Partition::macro, f(0.0), std::move(values));
}

PiecewiseConstantTimeFn discrete_time_derivative(const PiecewiseConstantTimeFn& u) {
  std::vector<Eigen::VectorXd> values;
  values.reserve(u.num_intervals());
  const Eigen::VectorXd* prev = &u.initial_value();
  for (int i = 0; i < u.num_intervals(); ++i) {
    const double k = u.interval_length(i);
    values.push_back((u.value(i) - *prev) / k);
    prev = &u.value(i);
  }
  return PiecewiseConstantTimeFn(u.mesh_ptr(), u.partition(),
                                 Eigen::VectorXd::Zero(u.dim()), std::move(values));
}

void gauss_legendre(int n, std::vector<double>& points, std::vector<double>& weights) {
  points.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration from the Chebyshev estimate of the i-th root.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    points[i] = -x;
    points[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n % 2 == 1) points[n / 2] = 0.0;
}

}  // namespace multirate
