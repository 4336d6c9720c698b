#pragma once

// Cosine similarity of two directions after a linear embedding, computed from
// the singular value decomposition of the embedding, plus before/after
// reports over batches of direction pairs.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lsa/numkit.hpp"

namespace lsa {

/// Two unit directions and a label. Use make_direction_pair() to build one
/// from arbitrary nonzero vectors.
struct DirectionPair {
  std::vector<double> q1;
  std::vector<double> q2;
  std::string label;
};

/// Normalizes both vectors. Throws ContractError on zero vectors or a length
/// mismatch.
DirectionPair make_direction_pair(std::span<const double> v1, std::span<const double> v2, std::string label);

struct AlignmentEntry {
  std::string label;
  double cos_before = 0.0;
  /// NaN when either embedded direction falls in the null space of B.
  double cos_after = 0.0;

  bool valid() const;
};

struct AlignmentReport {
  std::vector<AlignmentEntry> entries;
  /// Entries with a defined cos_after; summary statistics use these only.
  std::size_t valid = 0;
  double fraction_improved = 0.0;
  double mean_gain = 0.0;
};

/// cos(B q1, B q2) evaluated as
///   sum_i s_i^2 c1_i c2_i / sqrt(sum_i s_i^2 c1_i^2 * sum_i s_i^2 c2_i^2)
/// with s_i the singular values of B and c*_i = cos(q*, v_i) against its right
/// singular vectors. Non-unit inputs are normalized with a warning. A
/// direction annihilated by B (relative to 1e-12 of sigma_max) throws
/// ContractError naming it.
double embedded_cosine(const SvdFactors& b_factors, std::span<const double> q1, std::span<const double> q2);

/// Same quantity by direct multiplication; the oracle for embedded_cosine.
double direct_embedded_cosine(const DenseMatrix& b, std::span<const double> q1, std::span<const double> q2);

/// Entries keep input order. Throws ContractError (with the pair's label) on a
/// dimension mismatch.
AlignmentReport alignment_report(const DenseMatrix& b, std::span<const DirectionPair> pairs);

/// CSV `label,cos_before,cos_after` followed by
/// `# fraction_improved=<v> mean_gain=<v>`. Numbers use 9 significant digits.
void write_alignment_csv(std::ostream& out, const AlignmentReport& report);

}  // namespace lsa
