#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "multirate/errors.hpp"

namespace multirate {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix, immutable after assembly.  Duplicate
/// triplets are summed; assembly is deterministic for identical triplet
/// multisets regardless of their order.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  const std::vector<int>& row_offsets() const { return offsets_; }
  const std::vector<int>& col_indices() const { return cols_idx_; }
  const std::vector<double>& values() const { return values_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  SparseMatrix transpose() const;
  double inf_norm() const;

  template <typename Fn>
  void for_each_entry(Fn&& fn) const {
    for (int i = 0; i < rows_; ++i)
      for (int p = offsets_[i]; p < offsets_[i + 1]; ++p) fn(i, cols_idx_[p], values_[p]);
  }

  Eigen::SparseMatrix<double> to_eigen() const;

  bool operator==(const SparseMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && offsets_ == o.offsets_ &&
           cols_idx_ == o.cols_idx_ && values_ == o.values_;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> cols_idx_;
  std::vector<double> values_;
};

/// Sparse LU with partial pivoting.  Throws SingularMatrix when the
/// factorization fails or the residual exceeds
/// 1e-10 * (|A|_inf |x|_inf + |b|_inf).
Eigen::VectorXd solve_direct(const SparseMatrix& A, const Eigen::VectorXd& b);

/// Reusable factorization for repeated solves against the same matrix.
class DirectSolver {
 public:
  explicit DirectSolver(const SparseMatrix& A);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  Eigen::SparseMatrix<double> A_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  double inf_norm_;
};

/// True iff (A + A^T)/2 admits an LDL^T factorization whose pivots all exceed
/// 1e-14 times the largest diagonal entry.
bool symmetric_part_cholesky_ok(const SparseMatrix& A);

SparseMatrix extract_submatrix(const SparseMatrix& A, const std::vector<int>& rows,
                               const std::vector<int>& cols);

/// Matrix Market exchange format, for debugging.
void write_matrix_market(const SparseMatrix& A, std::ostream& out);

struct UnknownLabel {
  int subproblem;    // 1 or 2
  int micro_index;   // 0-based micro step within the macro step
  std::string field; // "u", "ux", "uy", "p", ...
  int spatial_index; // index within the field's free dofs
};

/// One monolithic per-macro-step linear system: all micro steps of both
/// subdomains, with a named block layout and a label for every unknown.
class BlockSystem {
 public:
  struct Block {
    std::string name;
    int size;
  };

  BlockSystem(std::vector<Block> blocks, SparseMatrix matrix, Eigen::VectorXd rhs,
              std::vector<UnknownLabel> labels);

  const std::vector<Block>& blocks() const { return blocks_; }
  const SparseMatrix& matrix() const { return matrix_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  const std::vector<UnknownLabel>& labels() const { return labels_; }

  int size() const { return matrix_.rows(); }
  int block_offset(const std::string& name) const;

  /// Unknown indices whose label satisfies the predicate.
  std::vector<int> select(const std::function<bool(const UnknownLabel&)>& pred) const;

 private:
  std::vector<Block> blocks_;
  SparseMatrix matrix_;
  Eigen::VectorXd rhs_;
  std::vector<UnknownLabel> labels_;
};

/// Element-loop execution mode for assembly kernels.  Both modes produce the
/// same triplet multiset; from_triplets canonicalizes the order, so assembled
/// matrices are bit-identical.
enum class ExecMode { serial, openmp };

/// Runs emit(item, sink) for every item, either sequentially or with OpenMP
/// worker threads writing to per-chunk buffers.
std::vector<Triplet> collect_triplets(int n_items,
                                      const std::function<void(int, std::vector<Triplet>&)>& emit,
                                      ExecMode mode);

/// Thread cap honoured by the OpenMP paths (MULTIRATE_THREADS, else OpenMP
/// defaults).
int max_threads();

}  // namespace multirate
