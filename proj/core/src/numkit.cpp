#include "lsa/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "lsa/errors.hpp"

namespace lsa {
namespace {

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ContractError("DenseMatrix: non-finite entry rejected");
  }
}

std::string shape(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

// Stable permutation that sorts `keys` in nonincreasing order.
std::vector<std::size_t> descending_order(const std::vector<double>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  return order;
}

std::size_t default_sweeps(const JacobiOptions& options, std::size_t rows, std::size_t cols) {
  return options.max_sweeps != 0 ? options.max_sweeps : 10 * std::max(rows, cols);
}

struct OneSidedResult {
  DenseMatrix left;   // rows x cols, orthonormal columns (sorted)
  std::vector<double> sigma;
  DenseMatrix right;  // cols x cols orthogonal (sorted)
};

// Hestenes one-sided Jacobi on a tall (rows >= cols) matrix.
OneSidedResult one_sided_jacobi(const DenseMatrix& m, const JacobiOptions& options) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  DenseMatrix w = m;
  DenseMatrix v = DenseMatrix::identity(cols);

  const double scale = frobenius_norm(m);
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = (eps * scale) * (eps * scale);
  const std::size_t max_sweeps = default_sweeps(options, rows, cols);

  bool converged = cols < 2 || scale == 0.0;
  std::size_t sweep = 0;
  double worst = 0.0;
  while (!converged) {
    if (sweep == max_sweeps) {
      std::ostringstream msg;
      msg << "svd: no convergence after " << max_sweeps << " Jacobi sweeps (cap), last off-diagonal ratio "
          << worst;
      throw ConvergenceError(msg.str(), worst);
    }
    ++sweep;
    converged = true;
    worst = 0.0;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        auto wp = w.col(p);
        auto wq = w.col(q);
        const double alpha = dot(wp, wp);
        const double beta = dot(wq, wq);
        if (alpha <= tiny || beta <= tiny) continue;
        const double gamma = dot(wp, wq);
        const double ratio = std::abs(gamma) / std::sqrt(alpha * beta);
        if (ratio <= options.tolerance) continue;
        worst = std::max(worst, ratio);
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double a = wp[i];
          const double b = wq[i];
          wp[i] = c * a - s * b;
          wq[i] = s * a + c * b;
        }
        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t i = 0; i < cols; ++i) {
          const double a = vp[i];
          const double b = vq[i];
          vp[i] = c * a - s * b;
          vq[i] = s * a + c * b;
        }
      }
    }
  }

  std::vector<double> sigma(cols);
  std::vector<bool> degenerate(cols, false);
  for (std::size_t j = 0; j < cols; ++j) {
    const double n2 = dot(w.col(j), w.col(j));
    if (n2 <= tiny) {
      sigma[j] = 0.0;
      degenerate[j] = true;
    } else {
      sigma[j] = std::sqrt(n2);
    }
  }

  const auto order = descending_order(sigma);
  OneSidedResult out{DenseMatrix(rows, cols), std::vector<double>(cols), DenseMatrix(cols, cols)};
  std::vector<bool> replace(cols, false);
  for (std::size_t k = 0; k < cols; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = sigma[j];
    replace[k] = degenerate[j];
    if (!degenerate[j]) {
      auto src = w.col(j);
      auto dst = out.left.col(k);
      for (std::size_t i = 0; i < rows; ++i) dst[i] = src[i] / sigma[j];
    }
    std::copy(v.col(j).begin(), v.col(j).end(), out.right.col(k).begin());
  }
  if (std::any_of(replace.begin(), replace.end(), [](bool b) { return b; })) {
    out.left = complete_orthonormal_basis(out.left, replace).col_block(0, cols);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> column_major)
    : rows_(rows), cols_(cols), data_(std::move(column_major)) {
  if (data_.size() != rows * cols) {
    throw ContractError("DenseMatrix: data length " + std::to_string(data_.size()) + " != " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  }
  require_finite(data_);
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data(r * c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ContractError("DenseMatrix::from_rows: ragged rows");
    std::size_t j = 0;
    for (double value : row) data[j++ * r + i] = value;
    ++i;
  }
  return DenseMatrix(r, c, std::move(data));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
  require_finite(values);
  DenseMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

DenseMatrix DenseMatrix::column(std::span<const double> values) {
  return DenseMatrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

std::vector<double> DenseMatrix::row(std::size_t r) const {
  std::vector<double> out(cols_);
  for (std::size_t c = 0; c < cols_; ++c) out[c] = (*this)(r, c);
  return out;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t r = 0; r < rows_; ++r) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::col_block(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw ContractError("DenseMatrix::col_block: range out of bounds");
  DenseMatrix out(rows_, count);
  std::copy(data_.begin() + static_cast<std::ptrdiff_t>(first * rows_),
            data_.begin() + static_cast<std::ptrdiff_t>((first + count) * rows_), out.data_.begin());
  return out;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ContractError("matrix product: inner dimension mismatch " + shape(a) + " * " + shape(b));
  }
  DenseMatrix out(a.rows(), b.cols());
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto oc = out.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      auto ac = a.col(k);
      for (std::size_t i = 0; i < n; ++i) oc[i] += ac[i] * bkj;
    }
  }
  return out;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw ContractError("matrix-vector product: " + shape(a) + " times length " + std::to_string(x.size()));
  }
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    auto ac = a.col(k);
    for (std::size_t i = 0; i < a.rows(); ++i) out[i] += ac[i] * x[k];
  }
  return out;
}

DenseMatrix transpose_times(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ContractError("transpose_times: row mismatch " + shape(a) + " vs " + shape(b));
  }
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < a.cols(); ++i) out(i, j) = dot(a.col(i), b.col(j));
  return out;
}

DenseMatrix gram_rows(const DenseMatrix& a) {
  const std::size_t d = a.rows();
  DenseMatrix out(d, d);
  for (std::size_t c = 0; c < a.cols(); ++c) {
    auto col = a.col(c);
    for (std::size_t j = 0; j < d; ++j) {
      const double cj = col[j];
      if (cj == 0.0) continue;
      for (std::size_t i = j; i < d; ++i) out(i, j) += col[i] * cj;
    }
  }
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = j + 1; i < d; ++i) out(j, i) = out(i, j);
  return out;
}

double frobenius_norm(const DenseMatrix& m) { return norm2(m.data()); }

double max_abs(const DenseMatrix& m) {
  double best = 0.0;
  for (double v : m.data()) best = std::max(best, std::abs(v));
  return best;
}

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "max_abs_difference");
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::abs(a.data()[i] - b.data()[i]));
  return best;
}

bool is_symmetric(const DenseMatrix& m, double tol) {
  if (!m.is_square()) return false;
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = j + 1; i < m.rows(); ++i)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) {
  // Scaled accumulation so huge or tiny entries neither overflow nor underflow.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : v) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

std::vector<double> normalized(std::span<const double> v) {
  const double n = norm2(v);
  if (n == 0.0) throw ContractError("normalized: zero vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

// ---------------------------------------------------------------------------
// Factorizations

std::size_t SvdFactors::rank(double rel_tol) const {
  if (sigma.empty() || sigma.front() == 0.0) return 0;
  const double cut = rel_tol * sigma.front();
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [cut](double s) { return s > cut; }));
}

DenseMatrix SvdFactors::reconstruct() const {
  DenseMatrix us = u;
  for (std::size_t k = 0; k < sigma.size(); ++k)
    for (double& x : us.col(k)) x *= sigma[k];
  return us * vt;
}

bool apply_sign_convention(std::span<double> v) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best_abs) {
      best_abs = std::abs(v[i]);
      best = i;
    }
  }
  if (v.empty() || v[best] >= 0.0) return false;
  for (double& x : v) x = -x;
  return true;
}

DenseMatrix complete_orthonormal_basis(const DenseMatrix& basis, const std::vector<bool>& replace) {
  const std::size_t n = basis.rows();
  const std::size_t k = basis.cols();
  if (k > n) throw ContractError("complete_orthonormal_basis: more columns than rows");
  if (replace.size() != k) throw ContractError("complete_orthonormal_basis: flag count mismatch");

  DenseMatrix out(n, n);
  std::vector<std::size_t> accepted;
  std::vector<std::size_t> open;
  for (std::size_t j = 0; j < n; ++j) {
    if (j < k && !replace[j]) {
      std::copy(basis.col(j).begin(), basis.col(j).end(), out.col(j).begin());
      accepted.push_back(j);
    } else {
      open.push_back(j);
    }
  }

  std::vector<double> candidate(n);
  std::vector<double> best(n);
  for (std::size_t slot : open) {
    double best_norm = -1.0;
    for (std::size_t e = 0; e < n; ++e) {
      std::fill(candidate.begin(), candidate.end(), 0.0);
      candidate[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t a : accepted) {
          const double proj = dot(out.col(a), candidate);
          auto col = out.col(a);
          for (std::size_t i = 0; i < n; ++i) candidate[i] -= proj * col[i];
        }
      }
      const double nrm = norm2(candidate);
      if (nrm > best_norm + 1e-12) {
        best_norm = nrm;
        best = candidate;
      }
    }
    auto col = out.col(slot);
    for (std::size_t i = 0; i < n; ++i) col[i] = best[i] / best_norm;
    accepted.push_back(slot);
  }
  return out;
}

SvdFactors svd(const DenseMatrix& m, const JacobiOptions& options) {
  if (m.empty()) throw ContractError("svd: empty matrix");

  SvdFactors f;
  if (m.rows() >= m.cols()) {
    auto r = one_sided_jacobi(m, options);
    f.u = std::move(r.left);
    f.sigma = std::move(r.sigma);
    f.vt = r.right.transpose();
  } else {
    auto r = one_sided_jacobi(m.transpose(), options);
    f.u = std::move(r.right);
    f.sigma = std::move(r.sigma);
    f.vt = r.left.transpose();
  }
  for (std::size_t k = 0; k < f.sigma.size(); ++k) {
    if (apply_sign_convention(f.u.col(k))) {
      for (std::size_t c = 0; c < f.vt.cols(); ++c) f.vt(k, c) = -f.vt(k, c);
    }
  }
  return f;
}

SymEig sym_eig(const DenseMatrix& s, const JacobiOptions& options) {
  if (!s.is_square() || s.empty()) throw ContractError("sym_eig: matrix must be square and nonempty");
  const double sym_tol = 1e-10 * std::max(1.0, max_abs(s));
  if (!is_symmetric(s, sym_tol)) throw ContractError("sym_eig: matrix is not symmetric within 1e-10");

  const std::size_t n = s.rows();
  DenseMatrix a = s;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) a(i, j) = a(j, i) = 0.5 * (s(i, j) + s(j, i));
  DenseMatrix v = DenseMatrix::identity(n);

  const double total = frobenius_norm(a);
  const std::size_t max_sweeps = default_sweeps(options, n, n);
  auto off_norm = [&] {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = j + 1; i < n; ++i) acc += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  std::size_t sweep = 0;
  double off = off_norm();
  while (off > options.tolerance * total) {
    if (sweep == max_sweeps) {
      std::ostringstream msg;
      msg << "sym_eig: no convergence after " << max_sweeps << " Jacobi sweeps (cap), off-diagonal norm "
          << off;
      throw ConvergenceError(msg.str(), off);
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= std::numeric_limits<double>::min()) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
    off = off_norm();
  }

  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  const auto order = descending_order(diag);
  SymEig out{DenseMatrix(n, n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = diag[order[k]];
    std::copy(v.col(order[k]).begin(), v.col(order[k]).end(), out.vectors.col(k).begin());
    apply_sign_convention(out.vectors.col(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Polynomials and power iteration

DenseMatrix matrix_polynomial(const DenseMatrix& s, std::span<const double> coeffs) {
  if (coeffs.empty()) throw ContractError("matrix_polynomial: empty coefficient list");
  if (!s.is_square()) throw ContractError("matrix_polynomial: matrix must be square");
  if (!is_symmetric(s, 1e-10 * std::max(1.0, max_abs(s)))) {
    throw ContractError("matrix_polynomial: matrix is not symmetric");
  }
  const std::size_t n = s.rows();
  const DenseMatrix eye = DenseMatrix::identity(n);
  DenseMatrix p = coeffs.back() * eye;
  for (std::size_t i = coeffs.size() - 1; i-- > 0;) {
    p = p * s;
    for (std::size_t d = 0; d < n; ++d) p(d, d) += coeffs[i];
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) p(i, j) = p(j, i) = 0.5 * (p(i, j) + p(j, i));
  require_finite(p.data());
  return p;
}

PowerIterationResult power_iteration(const DenseMatrix& s, double tol, std::size_t max_iter,
                                     std::uint64_t seed) {
  if (!s.is_square() || s.empty()) throw ContractError("power_iteration: matrix must be square and nonempty");
  if (!is_symmetric(s, 1e-10 * std::max(1.0, max_abs(s)))) {
    throw ContractError("power_iteration: matrix is not symmetric");
  }
  if (!(tol > 0.0)) throw ContractError("power_iteration: tolerance must be positive");

  const std::size_t n = s.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  double start_norm = 0.0;
  while (start_norm == 0.0) {
    for (double& x : v) x = normal(rng);
    start_norm = norm2(v);
  }
  for (double& x : v) x /= start_norm;

  PowerIterationResult out;
  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it <= max_iter; ++it) {
    std::vector<double> w = s * std::span<const double>(v);
    const double lambda = dot(v, w);
    std::vector<double> r = w;
    for (std::size_t i = 0; i < n; ++i) r[i] -= lambda * v[i];
    residual = norm2(r);
    const double wn = norm2(w);
    if (residual <= tol * lambda || wn == 0.0) {
      out.value = wn == 0.0 ? 0.0 : lambda;
      out.vector = std::move(v);
      out.iterations = it;
      out.residual = wn == 0.0 ? 0.0 : residual;
      apply_sign_convention(out.vector);
      return out;
    }
    if (it == max_iter) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
  }
  std::ostringstream msg;
  msg << "power_iteration: not converged after " << max_iter << " iterations, last residual " << residual;
  throw ConvergenceError(msg.str(), residual);
}

// ---------------------------------------------------------------------------
// Statistics

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ContractError("cosine: length mismatch");
  const double nu = norm2(u);
  const double nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) throw ContractError("cosine: zero vector");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] / nu) * (v[i] / nv);
  return std::clamp(s, -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ContractError("spearman: length mismatch");
  if (xs.size() < 2) throw ContractError("spearman: need at least 2 observations");
  for (double v : xs)
    if (!std::isfinite(v)) throw ContractError("spearman: non-finite input");
  for (double v : ys)
    if (!std::isfinite(v)) throw ContractError("spearman: non-finite input");

  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ContractError("spearman: constant input has no ranking");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// MDS

DenseMatrix pairwise_distances(const DenseMatrix& points) {
  const std::size_t n = points.cols();
  DenseMatrix d(n, n);
  std::vector<double> diff(points.rows());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = j + 1; i < n; ++i) {
      for (std::size_t r = 0; r < points.rows(); ++r) diff[r] = points(r, i) - points(r, j);
      d(i, j) = d(j, i) = norm2(diff);
    }
  }
  return d;
}

DenseMatrix classical_mds(const DenseMatrix& points, std::size_t out_dim) {
  const std::size_t dim = points.rows();
  const std::size_t n = points.cols();
  if (n == 0 || dim == 0) throw ContractError("classical_mds: no points");
  if (out_dim == 0 || out_dim > std::min(dim, n)) {
    throw ContractError("classical_mds: out_dim " + std::to_string(out_dim) + " must be in [1, min(rows, cols)]");
  }

  // Centering the points and taking their Gram matrix equals the Torgerson
  // double-centering of squared distances, without the cancellation.
  DenseMatrix centered = points;
  for (std::size_t r = 0; r < dim; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < n; ++c) mean += points(r, c);
    mean /= static_cast<double>(n);
    for (std::size_t c = 0; c < n; ++c) centered(r, c) -= mean;
  }
  const DenseMatrix gram = transpose_times(centered, centered);
  const SymEig eig = sym_eig(gram);

  const double top = std::max(0.0, eig.values.front());
  DenseMatrix out(n, out_dim);
  for (std::size_t k = 0; k < out_dim; ++k) {
    double lambda = eig.values[k];
    if (lambda < 0.0) {
      if (lambda < -1e-9 * std::max(1.0, top)) {
        warn("classical_mds: eigenvalue " + std::to_string(lambda) +
             " is negative beyond tolerance (non-Euclidean input); clamped to zero");
      }
      lambda = 0.0;
    }
    const double root = std::sqrt(lambda);
    for (std::size_t i = 0; i < n; ++i) out(i, k) = eig.vectors(i, k) * root;
  }
  return out;
}

}  // namespace lsa
