#pragma once

// Word-embedding and perturbation-signature evaluation: loaders for the usual
// text formats, analogy and word-similarity metrics (optionally after a
// linear encoder), reference-point correction, signature alignment and MDS
// export.
//
// All word matching is exact after ASCII lowercasing.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lsa/alignment.hpp"
#include "lsa/numkit.hpp"

namespace lsa {

std::string to_lower_ascii(std::string_view text);

/// Words in frequency order (most frequent first) and a d x vocab matrix whose
/// column i embeds words()[i].
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  /// Throws ContractError on duplicate words or a column-count mismatch.
  EmbeddingTable(std::vector<std::string> words, DenseMatrix vectors);

  const std::vector<std::string>& words() const noexcept { return words_; }
  const DenseMatrix& vectors() const noexcept { return vectors_; }
  std::size_t dim() const noexcept { return vectors_.rows(); }
  std::size_t size() const noexcept { return words_.size(); }

  std::optional<std::size_t> find(std::string_view word) const;
  std::span<const double> vector(std::size_t column) const { return vectors_.col(column); }

  /// Same vocabulary, vectors replaced by encoder * vectors.
  EmbeddingTable encoded(const DenseMatrix& encoder) const;

 private:
  std::vector<std::string> words_;
  DenseMatrix vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LoadedTable {
  EmbeddingTable table;
  /// Lines with the wrong number of fields or unparseable numbers.
  std::size_t skipped_lines = 0;
  /// Words that collide with an earlier word after lowercasing.
  std::size_t duplicate_words = 0;
};

/// `word v1 ... vd` per line; d is taken from the first parseable line.
/// `limit` caps the number of loaded words (0 = no cap). Throws IoError if the
/// file cannot be read and FormatError if nothing parses.
LoadedTable load_vectors(const std::filesystem::path& path, std::size_t limit = 0);
LoadedTable parse_vectors(std::istream& in, std::size_t limit = 0);

struct AnalogyTuple {
  std::string a1;
  std::string b1;
  std::string a2;
  std::string b2;
};

struct AnalogyGroup {
  std::string relationship;
  std::vector<AnalogyTuple> tuples;
};

/// `: name` lines open a relationship; other nonblank lines hold 4 words.
std::vector<AnalogyGroup> load_analogy_dataset(const std::filesystem::path& path);
std::vector<AnalogyGroup> parse_analogy_dataset(std::istream& in);

struct WordPair {
  std::string a;
  std::string b;

  friend bool operator==(const WordPair&, const WordPair&) = default;
};

/// Distinct (a, b) word pairs of a relationship in first-appearance order.
std::vector<WordPair> relationship_word_pairs(const AnalogyGroup& group);

/// Every unordered pair of distinct word pairs of each relationship as a
/// 4-tuple (a1, b1, a2, b2). A word pair is never combined with itself.
std::vector<AnalogyTuple> combine_relationship_pairs(std::span<const AnalogyGroup> groups);

struct RelationshipDirections {
  std::string relationship;
  std::vector<DirectionPair> pairs;
};

struct RelationshipPairs {
  std::vector<RelationshipDirections> relationships;
  /// Word pairs dropped because a word is missing from the table.
  std::size_t skipped_oov = 0;
  /// Word pairs dropped because both words embed to the same point.
  std::size_t skipped_degenerate = 0;
};

/// For each relationship, DirectionPair(b1 - a1, b2 - a2) (normalized) for
/// every unordered pair of usable word pairs.
RelationshipPairs relationship_pairs(std::span<const AnalogyGroup> groups, const EmbeddingTable& table);

struct MetricResult {
  std::string metric;
  double value = 0.0;
  std::size_t resolvable = 0;
  std::size_t skipped = 0;
};

/// `{"metric":..., "value":..., "resolvable":..., "skipped":...}`
std::string metric_json(const MetricResult& result);

/// Mean over resolvable tuples of cos(e(a2) - e(a1), e(b2) - e(b1)), e the
/// encoder (identity when null). Tuples with an unknown word or a zero
/// difference are skipped. Throws ContractError if nothing resolves.
MetricResult analogy_score(const EmbeddingTable& table, std::span<const AnalogyTuple> tuples,
                           const DenseMatrix* encoder = nullptr);

struct ReferencePoint {
  std::vector<double> origin;
};

/// Fraction of resolvable tuples whose b2 is the argmax over the (encoded)
/// vocabulary of cos(w - o, e(a2) - e(a1) + e(b1) - o). The query words a1,
/// b1, a2 are excluded as candidates and ties go to the lower column. The
/// reference point, if any, must live in the evaluated (encoded) space.
MetricResult analogy_accuracy(const EmbeddingTable& table, std::span<const AnalogyTuple> tuples,
                              const DenseMatrix* encoder = nullptr, const ReferencePoint* reference = nullptr);

/// sigma_1 u_1 of the (uncentered) vector matrix, u_1 signed so that the
/// words' coordinates along it sum to a nonnegative value.
ReferencePoint reference_point(const EmbeddingTable& table);

/// The zero origin of the table's space.
ReferencePoint zero_reference(const EmbeddingTable& table);

struct SimilarityPair {
  std::string w1;
  std::string w2;
  double score = 0.0;
};

/// `word1,word2,score` (comma or tab separated) or whitespace separated
/// `word1 word2 score`; a non-numeric score on the first line marks a header.
std::vector<SimilarityPair> load_word_similarity(const std::filesystem::path& path);
std::vector<SimilarityPair> parse_word_similarity(std::istream& in);

/// Spearman correlation between cos(v1 - o, v2 - o) and the human scores over
/// resolvable pairs. Throws ContractError with fewer than 2.
MetricResult wsim(const EmbeddingTable& table, std::span<const SimilarityPair> pairs, const ReferencePoint& reference);

struct SignatureRecord {
  std::string perturbation_id;
  std::vector<double> control;
  std::vector<double> treated;
};

struct SignatureGroup {
  std::string label;
  std::vector<SignatureRecord> records;
};

struct SignatureSet {
  std::array<SignatureGroup, 2> groups;
  std::size_t dim = 0;
  /// (group, id) entries missing either the control or the treated profile.
  std::size_t incomplete = 0;
};

/// CSV rows `group,perturbation_id,condition,v1,...,vd` with condition
/// `control` or `treated`; an optional header line starting with `group`.
/// Exactly two groups are required. Errors carry line numbers.
SignatureSet load_signatures(const std::filesystem::path& path);
SignatureSet parse_signatures(std::istream& in);

struct SignatureCosine {
  std::string perturbation_id;
  double cos = 0.0;
};

struct SignatureAlignment {
  std::vector<SignatureCosine> cosines;
  /// Shared ids whose signature is zero in either group.
  std::size_t degenerate = 0;
};

/// For every perturbation id present in both groups (first group's order),
/// cos(e(treated_1 - control_1), e(treated_2 - control_2)).
SignatureAlignment signature_alignment(const SignatureSet& sigs, const DenseMatrix* encoder = nullptr);

/// classical_mds of the selected words; row i belongs to words[i].
DenseMatrix mds_export(const EmbeddingTable& table, std::span<const std::string> words, std::size_t out_dim);

}  // namespace lsa
