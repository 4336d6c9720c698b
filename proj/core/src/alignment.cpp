#include "lsa/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "lsa/errors.hpp"
#include "lsa/format.hpp"

namespace lsa {
namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kNullSpaceTolerance = 1e-12;

std::vector<double> as_unit(std::span<const double> q, const char* name) {
  const double n = norm2(q);
  if (n == 0.0) throw ContractError(std::string("embedded_cosine: ") + name + " is the zero vector");
  if (std::abs(n - 1.0) > kUnitTolerance) {
    warn(std::string("embedded_cosine: ") + name + " has norm " + format_number(n) + "; normalizing");
  }
  std::vector<double> out(q.begin(), q.end());
  for (double& x : out) x /= n;
  return out;
}

}  // namespace

DirectionPair make_direction_pair(std::span<const double> v1, std::span<const double> v2, std::string label) {
  if (v1.size() != v2.size()) throw ContractError("direction pair '" + label + "': length mismatch");
  if (norm2(v1) == 0.0 || norm2(v2) == 0.0) {
    throw ContractError("direction pair '" + label + "': zero direction");
  }
  return {normalized(v1), normalized(v2), std::move(label)};
}

bool AlignmentEntry::valid() const { return !std::isnan(cos_after); }

double embedded_cosine(const SvdFactors& b_factors, std::span<const double> q1, std::span<const double> q2) {
  const std::size_t dim = b_factors.vt.cols();
  if (q1.size() != dim || q2.size() != dim) {
    throw ContractError("embedded_cosine: direction length does not match B's column count " + std::to_string(dim));
  }
  const auto u1 = as_unit(q1, "q1");
  const auto u2 = as_unit(q2, "q2");

  double cross = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  for (std::size_t i = 0; i < b_factors.sigma.size(); ++i) {
    const double s2 = b_factors.sigma[i] * b_factors.sigma[i];
    double c1 = 0.0;
    double c2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      c1 += b_factors.vt(i, j) * u1[j];
      c2 += b_factors.vt(i, j) * u2[j];
    }
    cross += s2 * c1 * c2;
    e1 += s2 * c1 * c1;
    e2 += s2 * c2 * c2;
  }

  const double sigma_max = b_factors.sigma.empty() ? 0.0 : b_factors.sigma.front();
  const double floor = kNullSpaceTolerance * sigma_max;
  if (std::sqrt(e1) <= floor || sigma_max == 0.0) {
    throw ContractError("embedded_cosine: q1 lies in the null space of B (B q1 = 0)");
  }
  if (std::sqrt(e2) <= floor) {
    throw ContractError("embedded_cosine: q2 lies in the null space of B (B q2 = 0)");
  }
  return std::clamp(cross / std::sqrt(e1 * e2), -1.0, 1.0);
}

double direct_embedded_cosine(const DenseMatrix& b, std::span<const double> q1, std::span<const double> q2) {
  return cosine(b * q1, b * q2);
}

AlignmentReport alignment_report(const DenseMatrix& b, std::span<const DirectionPair> pairs) {
  for (const auto& p : pairs) {
    if (p.q1.size() != b.cols() || p.q2.size() != b.cols()) {
      throw ContractError("alignment_report: pair '" + p.label + "' has dimension " +
                          std::to_string(p.q1.size()) + ", B has " + std::to_string(b.cols()) + " columns");
    }
  }

  AlignmentReport report;
  report.entries.reserve(pairs.size());
  if (pairs.empty()) return report;

  const SvdFactors factors = svd(b);
  const double floor = kNullSpaceTolerance * (factors.sigma.empty() ? 0.0 : factors.sigma.front());

  std::size_t improved = 0;
  double gain = 0.0;
  for (const auto& p : pairs) {
    AlignmentEntry e{p.label, cosine(p.q1, p.q2), std::numeric_limits<double>::quiet_NaN()};
    const auto b1 = b * std::span<const double>(p.q1);
    const auto b2 = b * std::span<const double>(p.q2);
    const double n1 = norm2(b1) / norm2(p.q1);
    const double n2 = norm2(b2) / norm2(p.q2);
    if (n1 > floor && n2 > floor) {
      e.cos_after = cosine(b1, b2);
      ++report.valid;
      if (e.cos_after > e.cos_before) ++improved;
      gain += e.cos_after - e.cos_before;
    }
    report.entries.push_back(std::move(e));
  }
  if (report.valid > 0) {
    report.fraction_improved = static_cast<double>(improved) / static_cast<double>(report.valid);
    report.mean_gain = gain / static_cast<double>(report.valid);
  }
  return report;
}

void write_alignment_csv(std::ostream& out, const AlignmentReport& report) {
  out << "label,cos_before,cos_after\n";
  for (const auto& e : report.entries) {
    out << csv_field(e.label) << ',' << format_number(e.cos_before) << ',' << format_number(e.cos_after) << '\n';
  }
  out << "# fraction_improved=" << format_number(report.fraction_improved)
      << " mean_gain=" << format_number(report.mean_gain) << '\n';
}

}  // namespace lsa
