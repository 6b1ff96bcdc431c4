#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "multirate/errors.hpp"

namespace multirate {

/// Which time partition a piecewise-constant function lives on.
enum class Partition { sub1, sub2, macro };

inline Partition partition_of(int j) { return j == 1 ? Partition::sub1 : Partition::sub2; }
inline int other_sub(int j) { return 3 - j; }

/// Two-rate hierarchical time mesh: a shared macro partition of [0,T] where,
/// on every macro step, at most one of the two subproblems is subdivided into
/// uniform micro steps.  Immutable after construction.
class MultirateMesh {
 public:
  /// Validating constructor.  Throws InvalidMesh for non-monotone nodes and
  /// ConstraintViolation when some step has micro steps on both sides.
  static MultirateMesh build(std::vector<double> macro_nodes,
                             std::vector<std::array<int, 2>> micro_counts);

  int num_macro_steps() const { return static_cast<int>(micro_counts_.size()); }
  double horizon() const { return macro_nodes_.back(); }
  const std::vector<double>& macro_nodes() const { return macro_nodes_; }
  const std::vector<std::array<int, 2>>& micro_counts() const { return micro_counts_; }

  /// Macro step n = (macro_node(n), macro_node(n+1)], n in [0, num_macro_steps).
  double macro_node(int n) const { return macro_nodes_.at(n); }
  double macro_length(int n) const { return macro_nodes_.at(n + 1) - macro_nodes_.at(n); }

  int micro_count(int n, int j) const { return micro_counts_.at(n)[j - 1]; }
  double micro_length(int n, int j) const { return macro_length(n) / micro_count(n, j); }
  /// Micro node t_j^{n,m}, m in [0, micro_count(n,j)].
  double micro_node(int n, int j, int m) const {
    return macro_node(n) + m * micro_length(n, j);
  }

  /// Total number of micro intervals of one subproblem (or macro steps).
  int num_intervals(Partition p) const;
  /// Flat interval index of micro interval m (0-based) of macro step n.
  int flat_index(int n, int j, int m) const { return offsets_[n][j - 1] + m; }
  int flat_offset(int n, int j) const { return offsets_[n][j - 1]; }

  /// Largest micro step of subproblem j over all macro steps (k_j); the
  /// global k is max over both subproblems.
  double max_micro_length(int j) const;
  double max_macro_length() const;

  /// One adaptive refinement of subproblem j on macro step n.  If the other
  /// side is unrefined, bisects every micro step of j.  Otherwise j must be
  /// unrefined there and the step is split into two macro steps, which
  /// requires an even micro count on the other side (else CannotPromote).
  MultirateMesh refine_micro(int j, int n) const;
  /// refine_micro applied to every macro step (descending, so promotions do
  /// not disturb not-yet-visited indices).
  MultirateMesh refine_micro_all(int j) const;

  nlohmann::json to_json() const;
  static MultirateMesh from_json(const nlohmann::json& j);

  bool operator==(const MultirateMesh& o) const {
    return macro_nodes_ == o.macro_nodes_ && micro_counts_ == o.micro_counts_;
  }

 private:
  MultirateMesh() = default;
  std::vector<double> macro_nodes_;
  std::vector<std::array<int, 2>> micro_counts_;
  std::vector<std::array<int, 2>> offsets_;
};

/// Uniform single-rate mesh: n_steps macro steps on [0, horizon], no micro
/// subdivision on either side.
MultirateMesh uniform_mesh(int n_steps, double horizon);

/// A dG(0) function in time: one payload vector per micro interval of one
/// partition, plus the value at t = 0.  Payloads are opaque fixed-length
/// vectors (scalars, ODE states, or FE coefficient vectors).
class PiecewiseConstantTimeFn {
 public:
  PiecewiseConstantTimeFn(std::shared_ptr<const MultirateMesh> mesh, Partition part,
                          Eigen::VectorXd initial_value,
                          std::vector<Eigen::VectorXd> values);

  Partition partition() const { return part_; }
  const MultirateMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const MultirateMesh>& mesh_ptr() const { return mesh_; }

  int num_intervals() const { return static_cast<int>(values_.size()); }
  Eigen::Index dim() const { return initial_.size(); }

  const Eigen::VectorXd& initial_value() const { return initial_; }
  const Eigen::VectorXd& value(int flat) const { return values_.at(flat); }
  /// Value on micro interval m (0-based) of macro step n.
  const Eigen::VectorXd& value(int n, int m) const;
  const std::vector<Eigen::VectorXd>& values() const { return values_; }

  /// Left-open right-closed convention: eval(t) for t in (t^{m-1}, t^m] is the
  /// interval value; eval(0) is the initial value.
  const Eigen::VectorXd& eval(double t) const;

  /// Right endpoint of the interval the flat index refers to.
  double interval_end(int flat) const;
  double interval_start(int flat) const;
  double interval_length(int flat) const { return interval_end(flat) - interval_start(flat); }

 private:
  std::shared_ptr<const MultirateMesh> mesh_;
  Partition part_;
  Eigen::VectorXd initial_;
  std::vector<Eigen::VectorXd> values_;
};

using TimeFn = std::function<Eigen::VectorXd(double)>;

/// Right-endpoint evaluation of a continuous-in-time function onto the micro
/// partition of subproblem j (the projection behind implicit Euler).
PiecewiseConstantTimeFn endpoint_projection(const TimeFn& f,
                                            std::shared_ptr<const MultirateMesh> mesh, int j);
/// Endpoint projection of a function that is already piecewise constant; the
/// identity when g lives on the target partition.
PiecewiseConstantTimeFn endpoint_projection(const PiecewiseConstantTimeFn& g,
                                            std::shared_ptr<const MultirateMesh> mesh, int j);

/// Per-macro-step transfer weights: for target micro interval m of subproblem
/// j, the fractions of each source interval overlapping it.  Source intervals
/// are those of `source` within macro step n.
std::vector<std::vector<double>> transfer_weights(const MultirateMesh& mesh, int n, int j,
                                                  Partition source);

/// Inter-mesh averaging: value on each micro interval of subproblem j is the
/// exact mean of g over that interval.  g must live on the same mesh.
PiecewiseConstantTimeFn transfer_average(const PiecewiseConstantTimeFn& g,
                                         std::shared_ptr<const MultirateMesh> mesh, int j);

/// Averaging onto the macro partition, exact for piecewise constants.
PiecewiseConstantTimeFn macro_average(const PiecewiseConstantTimeFn& g,
                                      std::shared_ptr<const MultirateMesh> mesh);
/// Averaging of a continuous handle onto the macro partition via Gauss
/// quadrature (default 5 points per macro step).
PiecewiseConstantTimeFn macro_average(const TimeFn& f,
                                      std::shared_ptr<const MultirateMesh> mesh,
                                      int quad_points = 5);

/// Backward difference quotient on the function's own partition; the
/// predecessor of the first micro value of a macro step is the last value of
/// the previous one, and the initial value before that.
PiecewiseConstantTimeFn discrete_time_derivative(const PiecewiseConstantTimeFn& u);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& points, std::vector<double>& weights);

}  // namespace multirate
