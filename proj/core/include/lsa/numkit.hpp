#pragma once

// Dense linear algebra and small statistics kernel shared by every other
// module. Everything here is a pure function of its inputs.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace lsa {

/// Column-major real matrix. Construction rejects non-finite entries; mutable
/// element access is provided for kernels and does not re-check.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> column_major);

  /// Row-wise literal, e.g. `DenseMatrix::from_rows({{2, 1}, {1, 2}})`.
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> values);
  /// Single column.
  static DenseMatrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }

  std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }
  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::vector<double> row(std::size_t r) const;

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  DenseMatrix transpose() const;
  /// Columns [first, first + count).
  DenseMatrix col_block(std::size_t first, std::size_t count) const;

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);
std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x);

/// a^T b without materializing the transpose.
DenseMatrix transpose_times(const DenseMatrix& a, const DenseMatrix& b);
/// a a^T.
DenseMatrix gram_rows(const DenseMatrix& a);

double frobenius_norm(const DenseMatrix& m);
double max_abs(const DenseMatrix& m);
double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b);
bool is_symmetric(const DenseMatrix& m, double tol);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
std::vector<double> normalized(std::span<const double> v);

/// Thin SVD: u is rows x r, sigma has length r, vt is r x cols, r = min(rows, cols).
struct SvdFactors {
  DenseMatrix u;
  std::vector<double> sigma;
  DenseMatrix vt;

  std::size_t rank(double rel_tol) const;
  DenseMatrix reconstruct() const;
};

struct SymEig {
  DenseMatrix vectors;
  std::vector<double> values;
};

struct JacobiOptions {
  /// Sweep cap; 0 means 10 * max dimension.
  std::size_t max_sweeps = 0;
  /// Relative off-diagonal tolerance.
  double tolerance = 1e-12;
};

/// One-sided Jacobi SVD. Singular values are nonincreasing; each left singular
/// vector has its largest-magnitude entry nonnegative (lowest row index wins
/// ties) and the matching row of vt is flipped with it. Throws ContractError
/// on empty input and ConvergenceError when the sweep cap is hit.
SvdFactors svd(const DenseMatrix& m, const JacobiOptions& options = {});

/// Cyclic Jacobi eigendecomposition of a symmetric matrix, values
/// nonincreasing, same sign convention as svd(). Symmetry is checked to
/// 1e-10 max-abs (scaled by max(1, max|s|)).
SymEig sym_eig(const DenseMatrix& s, const JacobiOptions& options = {});

/// Extends the orthonormal columns of `basis` to a full orthonormal basis of
/// R^rows. Columns flagged in `replace` are discarded and regenerated.
DenseMatrix complete_orthonormal_basis(const DenseMatrix& basis, const std::vector<bool>& replace);

/// Flips `v` so its largest-magnitude entry is nonnegative (ties: lowest index).
/// Returns true if a flip happened.
bool apply_sign_convention(std::span<double> v);

/// sum_i coeffs[i] * s^i evaluated by Horner's rule; the result is symmetrized.
DenseMatrix matrix_polynomial(const DenseMatrix& s, std::span<const double> coeffs);

struct PowerIterationResult {
  double value = 0.0;
  std::vector<double> vector;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Dominant eigenpair of a symmetric PSD matrix. Stops once
/// ||s v - lambda v||_2 <= tol * lambda. A spectrum without a gap (e.g. the
/// identity) converges immediately to whatever unit vector the seed produced.
PowerIterationResult power_iteration(const DenseMatrix& s, double tol, std::size_t max_iter,
                                     std::uint64_t seed);

double cosine(std::span<const double> u, std::span<const double> v);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Average (fractional) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> xs);

/// Torgerson classical MDS. `points` holds one point per column; the result
/// holds one point per row (points.cols() x out_dim), columns ordered by
/// decreasing eigenvalue of the double-centered Gram matrix.
DenseMatrix classical_mds(const DenseMatrix& points, std::size_t out_dim);

/// Pairwise Euclidean distances between columns.
DenseMatrix pairwise_distances(const DenseMatrix& points);

}  // namespace lsa
