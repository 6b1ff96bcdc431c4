#include "multirate/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace multirate {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw IndexError("triplet index out of range");
    if (!std::isfinite(t.value)) throw std::invalid_argument("non-finite value in assembly");
  }
  // Canonical order: duplicates are summed smallest value first, so the
  // result depends only on the triplet multiset.
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.value < b.value;
  });
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  std::vector<int> row_count(rows, 0);
  std::size_t i = 0;
  while (i < triplets.size()) {
    double sum = 0.0;
    std::size_t k = i;
    while (k < triplets.size() && triplets[k].row == triplets[i].row &&
           triplets[k].col == triplets[i].col)
      sum += triplets[k++].value;
    m.cols_idx_.push_back(triplets[i].col);
    m.values_.push_back(sum);
    ++row_count[triplets[i].row];
    i = k;
  }
  m.offsets_.assign(rows + 1, 0);
  for (int r = 0; r < rows; ++r) m.offsets_[r + 1] = m.offsets_[r] + row_count[r];
  return m;
}

Eigen::VectorXd SparseMatrix::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows_);
  for (int i = 0; i < rows_; ++i)
    for (int p = offsets_[i]; p < offsets_[i + 1]; ++p) y[i] += values_[p] * x[cols_idx_[p]];
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for_each_entry([&](int i, int j, double v) { t.push_back({j, i, v}); });
  return from_triplets(cols_, rows_, std::move(t));
}

double SparseMatrix::inf_norm() const {
  double norm = 0.0;
  for (int i = 0; i < rows_; ++i) {
    double row = 0.0;
    for (int p = offsets_[i]; p < offsets_[i + 1]; ++p) row += std::abs(values_[p]);
    norm = std::max(norm, row);
  }
  return norm;
}

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const {
  Eigen::SparseMatrix<double> m(rows_, cols_);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(values_.size());
  for_each_entry([&](int i, int j, double v) { t.emplace_back(i, j, v); });
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

DirectSolver::DirectSolver(const SparseMatrix& A) : A_(A.to_eigen()), inf_norm_(A.inf_norm()) {
  if (A.rows() != A.cols()) throw SingularMatrix("matrix is not square");
  lu_.compute(A_);
  if (lu_.info() != Eigen::Success) throw SingularMatrix("sparse LU factorization failed");
}

Eigen::VectorXd DirectSolver::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = lu_.solve(b);
  const double res = (A_ * x - b).lpNorm<Eigen::Infinity>();
  const double bound =
      1e-10 * (inf_norm_ * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
  if (!std::isfinite(res) || res > std::max(bound, 1e-300))
    throw SingularMatrix("matrix singular to working precision (residual " +
                         std::to_string(res) + ")");
  return x;
}

Eigen::VectorXd solve_direct(const SparseMatrix& A, const Eigen::VectorXd& b) {
  return DirectSolver(A).solve(b);
}

bool symmetric_part_cholesky_ok(const SparseMatrix& A) {
  if (A.rows() != A.cols()) return false;
  Eigen::SparseMatrix<double> E = A.to_eigen();
  Eigen::SparseMatrix<double> S = 0.5 * (E + Eigen::SparseMatrix<double>(E.transpose()));
  double max_diag = 0.0;
  for (int i = 0; i < S.rows(); ++i) max_diag = std::max(max_diag, S.coeff(i, i));
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(S);
  if (ldlt.info() != Eigen::Success) return false;
  const auto& d = ldlt.vectorD();
  for (int i = 0; i < d.size(); ++i)
    if (!(d[i] > 1e-14 * max_diag)) return false;
  return true;
}

SparseMatrix extract_submatrix(const SparseMatrix& A, const std::vector<int>& rows,
                               const std::vector<int>& cols) {
  std::vector<int> row_map(A.rows(), -1), col_map(A.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_map.at(rows[i]) = static_cast<int>(i);
  for (std::size_t i = 0; i < cols.size(); ++i) col_map.at(cols[i]) = static_cast<int>(i);
  std::vector<Triplet> t;
  A.for_each_entry([&](int i, int j, double v) {
    if (row_map[i] >= 0 && col_map[j] >= 0) t.push_back({row_map[i], col_map[j], v});
  });
  return SparseMatrix::from_triplets(static_cast<int>(rows.size()),
                                     static_cast<int>(cols.size()), std::move(t));
}

void write_matrix_market(const SparseMatrix& A, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << " " << A.cols() << " " << A.nnz() << "\n";
  A.for_each_entry([&](int i, int j, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i + 1, j + 1, v);
    out << buf;
  });
}

BlockSystem::BlockSystem(std::vector<Block> blocks, SparseMatrix matrix, Eigen::VectorXd rhs,
                         std::vector<UnknownLabel> labels)
    : blocks_(std::move(blocks)), matrix_(std::move(matrix)), rhs_(std::move(rhs)),
      labels_(std::move(labels)) {
  int total = 0;
  for (const auto& b : blocks_) total += b.size;
  if (total != matrix_.rows() || matrix_.rows() != matrix_.cols())
    throw std::invalid_argument("block sizes do not sum to the system dimension");
  if (rhs_.size() != matrix_.rows() || static_cast<int>(labels_.size()) != matrix_.rows())
    throw std::invalid_argument("rhs/label length does not match the system dimension");
}

int BlockSystem::block_offset(const std::string& name) const {
  int off = 0;
  for (const auto& b : blocks_) {
    if (b.name == name) return off;
    off += b.size;
  }
  throw IndexError("unknown block: " + name);
}

std::vector<int> BlockSystem::select(
    const std::function<bool(const UnknownLabel&)>& pred) const {
  std::vector<int> idx;
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (pred(labels_[i])) idx.push_back(static_cast<int>(i));
  return idx;
}

int max_threads() {
#ifdef _OPENMP
  if (const char* env = std::getenv("MULTIRATE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, omp_get_max_threads());
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<Triplet> collect_triplets(int n_items,
                                      const std::function<void(int, std::vector<Triplet>&)>& emit,
                                      ExecMode mode) {
  std::vector<Triplet> all;
  if (mode == ExecMode::serial || n_items < 2) {
    for (int i = 0; i < n_items; ++i) emit(i, all);
    return all;
  }
#ifdef _OPENMP
  const int nthreads = std::min(max_threads(), n_items);
  std::vector<std::vector<Triplet>> buffers(nthreads);
#pragma omp parallel num_threads(nthreads)
  {
    const int tid = omp_get_thread_num();
    auto& buf = buffers[tid];
#pragma omp for schedule(static)
    for (int i = 0; i < n_items; ++i) emit(i, buf);
  }
  std::size_t total = 0;
  for (const auto& b : buffers) total += b.size();
  all.reserve(total);
  for (const auto& b : buffers) all.insert(all.end(), b.begin(), b.end());
#else
  for (int i = 0; i < n_items; ++i) emit(i, all);
#endif
  return all;
}

}  // namespace multirate
