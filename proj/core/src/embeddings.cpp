#include "lsa/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lsa/errors.hpp"

namespace lsa {
namespace {

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

std::vector<double> apply(const DenseMatrix* encoder, std::vector<double> v) {
  if (encoder == nullptr) return v;
  if (encoder->cols() != v.size()) {
    throw ContractError("encoder has " + std::to_string(encoder->cols()) + " columns, vectors have dimension " +
                        std::to_string(v.size()));
  }
  return *encoder * std::span<const double>(v);
}

void check_origin(const ReferencePoint& ref, std::size_t dim) {
  if (ref.origin.size() != dim) {
    throw ContractError("reference point has dimension " + std::to_string(ref.origin.size()) + ", expected " +
                        std::to_string(dim));
  }
}

}  // namespace

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, DenseMatrix vectors)
    : words_(std::move(words)), vectors_(std::move(vectors)) {
  if (words_.size() != vectors_.cols()) {
    throw ContractError("EmbeddingTable: " + std::to_string(words_.size()) + " words but " +
                        std::to_string(vectors_.cols()) + " vectors");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) throw ContractError("EmbeddingTable: duplicate word '" + words_[i] + "'");
  }
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable EmbeddingTable::encoded(const DenseMatrix& encoder) const {
  if (encoder.cols() != dim()) {
    throw ContractError("encoder has " + std::to_string(encoder.cols()) + " columns, table dimension is " +
                        std::to_string(dim()));
  }
  return EmbeddingTable(words_, encoder * vectors_);
}

LoadedTable parse_vectors(std::istream& in, std::size_t limit) {
  LoadedTable out;
  std::vector<std::string> words;
  std::vector<double> values;
  std::set<std::string> seen;
  std::size_t dim = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (limit != 0 && words.size() >= limit) break;
    const auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (tokens.size() < 2 || (dim != 0 && tokens.size() != dim + 1)) {
      ++out.skipped_lines;
      continue;
    }
    std::vector<double> row;
    row.reserve(tokens.size() - 1);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto v = parse_double(tokens[i]);
      if (!v) break;
      row.push_back(*v);
    }
    if (row.size() != tokens.size() - 1) {
      ++out.skipped_lines;
      continue;
    }
    std::string word = to_lower_ascii(tokens[0]);
    if (!seen.insert(word).second) {
      ++out.duplicate_words;
      continue;
    }
    dim = row.size();
    words.push_back(std::move(word));
    values.insert(values.end(), row.begin(), row.end());
  }
  if (in.bad()) throw IoError("read error while loading vectors");
  if (words.empty()) throw FormatError("no parseable `word v1 ... vd` lines");
  const std::size_t n = words.size();
  out.table = EmbeddingTable(std::move(words), DenseMatrix(dim, n, std::move(values)));
  return out;
}

LoadedTable load_vectors(const std::filesystem::path& path, std::size_t limit) {
  auto in = open_input(path);
  try {
    return parse_vectors(in, limit);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<AnalogyGroup> parse_analogy_dataset(std::istream& in) {
  std::vector<AnalogyGroup> groups;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (text.front() == ':') {
      groups.push_back({std::string(trim(text.substr(1))), {}});
      continue;
    }
    const auto tokens = split_whitespace(text);
    if (tokens.size() != 4) throw FormatError("expected 4 words, got " + std::to_string(tokens.size()), line_no);
    if (groups.empty()) throw FormatError("analogy tuple before any ': relationship' header", line_no);
    groups.back().tuples.push_back({to_lower_ascii(tokens[0]), to_lower_ascii(tokens[1]), to_lower_ascii(tokens[2]),
                                    to_lower_ascii(tokens[3])});
  }
  if (in.bad()) throw IoError("read error while loading analogy dataset");
  return groups;
}

std::vector<AnalogyGroup> load_analogy_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_analogy_dataset(in);
}

std::vector<WordPair> relationship_word_pairs(const AnalogyGroup& group) {
  std::vector<WordPair> out;
  std::set<std::pair<std::string, std::string>> seen;
  const auto add = [&](const std::string& a, const std::string& b) {
    if (seen.emplace(a, b).second) out.push_back({a, b});
  };
  for (const auto& t : group.tuples) {
    add(t.a1, t.b1);
    add(t.a2, t.b2);
  }
  return out;
}

std::vector<AnalogyTuple> combine_relationship_pairs(std::span<const AnalogyGroup> groups) {
  std::vector<AnalogyTuple> out;
  for (const auto& group : groups) {
    const auto pairs = relationship_word_pairs(group);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      for (std::size_t j = i + 1; j < pairs.size(); ++j)
        out.push_back({pairs[i].a, pairs[i].b, pairs[j].a, pairs[j].b});
  }
  return out;
}

RelationshipPairs relationship_pairs(std::span<const AnalogyGroup> groups, const EmbeddingTable& table) {
  RelationshipPairs out;
  for (const auto& group : groups) {
    RelationshipDirections rel{group.relationship, {}};
    std::vector<std::pair<std::string, std::vector<double>>> diffs;
    for (const auto& p : relationship_word_pairs(group)) {
      const auto ia = table.find(p.a);
      const auto ib = table.find(p.b);
      if (!ia || !ib) {
        ++out.skipped_oov;
        continue;
      }
      auto d = difference(table.vector(*ib), table.vector(*ia));
      if (is_zero(d)) {
        ++out.skipped_degenerate;
        continue;
      }
      diffs.emplace_back(p.a + ":" + p.b, std::move(d));
    }
    for (std::size_t i = 0; i < diffs.size(); ++i)
      for (std::size_t j = i + 1; j < diffs.size(); ++j)
        rel.pairs.push_back(make_direction_pair(diffs[i].second, diffs[j].second,
                                                group.relationship + "|" + diffs[i].first + "|" + diffs[j].first));
    out.relationships.push_back(std::move(rel));
  }
  return out;
}

std::string metric_json(const MetricResult& result) {
  nlohmann::ordered_json j;
  j["metric"] = result.metric;
  if (std::isfinite(result.value)) {
    j["value"] = result.value;
  } else {
    j["value"] = nullptr;
  }
  j["resolvable"] = result.resolvable;
  j["skipped"] = result.skipped;
  return j.dump();
}

MetricResult analogy_score(const EmbeddingTable& table, std::span<const AnalogyTuple> tuples,
                           const DenseMatrix* encoder) {
  MetricResult out{"analogy_score", 0.0, 0, 0};
  double sum = 0.0;
  for (const auto& t : tuples) {
    const auto a1 = table.find(t.a1), b1 = table.find(t.b1), a2 = table.find(t.a2), b2 = table.find(t.b2);
    if (!a1 || !b1 || !a2 || !b2) {
      ++out.skipped;
      continue;
    }
    const auto u = apply(encoder, difference(table.vector(*a2), table.vector(*a1)));
    const auto v = apply(encoder, difference(table.vector(*b2), table.vector(*b1)));
    if (is_zero(u) || is_zero(v)) {
      ++out.skipped;
      continue;
    }
    sum += cosine(u, v);
    ++out.resolvable;
  }
  if (out.resolvable == 0) throw ContractError("analogy_score: no resolvable tuples");
  out.value = sum / static_cast<double>(out.resolvable);
  return out;
}

MetricResult analogy_accuracy(const EmbeddingTable& table, std::span<const AnalogyTuple> tuples,
                              const DenseMatrix* encoder, const ReferencePoint* reference) {
  MetricResult out{"analogy_accuracy", 0.0, 0, 0};
  DenseMatrix space = encoder != nullptr ? table.encoded(*encoder).vectors() : table.vectors();
  const std::size_t d = space.rows();
  if (reference != nullptr) {
    check_origin(*reference, d);
    for (std::size_t c = 0; c < space.cols(); ++c) {
      auto col = space.col(c);
      for (std::size_t r = 0; r < d; ++r) col[r] -= reference->origin[r];
    }
  }
  // Unit candidates; a word sitting on the origin has no direction and never wins.
  DenseMatrix unit = space;
  std::vector<bool> usable(space.cols(), true);
  for (std::size_t c = 0; c < unit.cols(); ++c) {
    auto col = unit.col(c);
    const double n = norm2(col);
    if (n == 0.0) {
      usable[c] = false;
      continue;
    }
    for (double& v : col) v /= n;
  }

  std::size_t correct = 0;
  std::vector<double> query(d);
  for (const auto& t : tuples) {
    const auto a1 = table.find(t.a1), b1 = table.find(t.b1), a2 = table.find(t.a2), b2 = table.find(t.b2);
    if (!a1 || !b1 || !a2 || !b2) {
      ++out.skipped;
      continue;
    }
    for (std::size_t r = 0; r < d; ++r) query[r] = space(r, *a2) - space(r, *a1) + space(r, *b1);
    if (is_zero(query)) {
      ++out.skipped;
      continue;
    }
    ++out.resolvable;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = unit.cols();
    for (std::size_t c = 0; c < unit.cols(); ++c) {
      if (!usable[c] || c == *a1 || c == *b1 || c == *a2) continue;
      const double s = dot(unit.col(c), query);
      if (s > best) {
        best = s;
        best_idx = c;
      }
    }
    if (best_idx == *b2) ++correct;
  }
  if (out.resolvable == 0) throw ContractError("analogy_accuracy: no resolvable tuples");
  out.value = static_cast<double>(correct) / static_cast<double>(out.resolvable);
  return out;
}

ReferencePoint reference_point(const EmbeddingTable& table) {
  if (table.size() == 0) throw ContractError("reference_point: empty table");
  const SvdFactors f = svd(table.vectors());
  ReferencePoint out{std::vector<double>(table.dim(), 0.0)};
  if (f.sigma.empty()) return out;
  // Orient u_1 toward the data so the origin moves with it.
  double along = 0.0;
  for (std::size_t c = 0; c < f.vt.cols(); ++c) along += f.vt(0, c);
  const double sign = along < 0.0 ? -1.0 : 1.0;
  for (std::size_t r = 0; r < table.dim(); ++r) out.origin[r] = sign * f.sigma[0] * f.u(r, 0);
  return out;
}

ReferencePoint zero_reference(const EmbeddingTable& table) { return {std::vector<double>(table.dim(), 0.0)}; }

std::vector<SimilarityPair> parse_word_similarity(std::istream& in) {
  std::vector<SimilarityPair> out;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    std::vector<std::string_view> fields;
    if (text.find('\t') != std::string_view::npos) {
      fields = split_on(text, '\t');
    } else if (text.find(',') != std::string_view::npos) {
      fields = split_on(text, ',');
    } else {
      fields = split_whitespace(text);
    }
    for (auto& f : fields) f = trim(f);
    const bool was_first = first;
    first = false;
    if (fields.size() < 3) throw FormatError("expected word1, word2, score", line_no);
    const auto score = parse_double(fields[2]);
    if (!score) {
      if (was_first) continue;
      throw FormatError("score is not a number", line_no);
    }
    out.push_back({to_lower_ascii(fields[0]), to_lower_ascii(fields[1]), *score});
  }
  if (in.bad()) throw IoError("read error while loading word-similarity pairs");
  return out;
}

std::vector<SimilarityPair> load_word_similarity(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_word_similarity(in);
}

MetricResult wsim(const EmbeddingTable& table, std::span<const SimilarityPair> pairs, const ReferencePoint& reference) {
  check_origin(reference, table.dim());
  MetricResult out{"wsim", 0.0, 0, 0};
  std::vector<double> model, human;
  for (const auto& p : pairs) {
    const auto i = table.find(p.w1), j = table.find(p.w2);
    if (!i || !j) {
      ++out.skipped;
      continue;
    }
    const auto u = difference(table.vector(*i), reference.origin);
    const auto v = difference(table.vector(*j), reference.origin);
    if (is_zero(u) || is_zero(v)) {
      ++out.skipped;
      continue;
    }
    model.push_back(cosine(u, v));
    human.push_back(p.score);
  }
  out.resolvable = model.size();
  if (out.resolvable < 2) throw ContractError("wsim: fewer than 2 resolvable pairs");
  out.value = spearman(model, human);
  return out;
}

SignatureSet parse_signatures(std::istream& in) {
  struct Partial {
    std::optional<std::vector<double>> control;
    std::optional<std::vector<double>> treated;
  };
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> order(2);
  std::vector<std::map<std::string, Partial>> partial(2);

  SignatureSet out;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    auto fields = split_on(text, ',');
    for (auto& f : fields) f = trim(f);
    if (first && !fields.empty() && to_lower_ascii(fields[0]) == "group") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 4) throw FormatError("expected group,perturbation_id,condition,v1,...", line_no);
    const std::size_t d = fields.size() - 3;
    if (out.dim == 0) out.dim = d;
    if (d != out.dim) {
      throw FormatError("expected " + std::to_string(out.dim) + " values, got " + std::to_string(d), line_no);
    }
    std::vector<double> values(d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto v = parse_double(fields[3 + i]);
      if (!v) throw FormatError("value " + std::to_string(i + 1) + " is not a number", line_no);
      values[i] = *v;
    }
    const std::string label(fields[0]);
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      if (labels.size() == 2) throw FormatError("more than two groups ('" + label + "')", line_no);
      labels.push_back(label);
      it = labels.end() - 1;
    }
    const auto g = static_cast<std::size_t>(it - labels.begin());
    const std::string id(fields[1]);
    const std::string cond = to_lower_ascii(fields[2]);
    auto [entry, inserted] = partial[g].try_emplace(id);
    if (inserted) order[g].push_back(id);
    std::optional<std::vector<double>>* slot = nullptr;
    if (cond == "control") {
      slot = &entry->second.control;
    } else if (cond == "treated") {
      slot = &entry->second.treated;
    } else {
      throw FormatError("condition must be 'control' or 'treated', got '" + std::string(fields[2]) + "'", line_no);
    }
    if (slot->has_value()) throw FormatError("duplicate " + cond + " row for " + label + "/" + id, line_no);
    *slot = std::move(values);
  }
  if (in.bad()) throw IoError("read error while loading signatures");
  if (labels.size() != 2) throw FormatError("expected exactly two groups, found " + std::to_string(labels.size()));

  for (std::size_t g = 0; g < 2; ++g) {
    out.groups[g].label = labels[g];
    for (const auto& id : order[g]) {
      auto& p = partial[g][id];
      if (!p.control || !p.treated) {
        ++out.incomplete;
        continue;
      }
      out.groups[g].records.push_back({id, std::move(*p.control), std::move(*p.treated)});
    }
  }
  return out;
}

SignatureSet load_signatures(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_signatures(in);
}

SignatureAlignment signature_alignment(const SignatureSet& sigs, const DenseMatrix* encoder) {
  std::map<std::string, const SignatureRecord*> second;
  for (const auto& r : sigs.groups[1].records) second.emplace(r.perturbation_id, &r);

  SignatureAlignment out;
  bool shared = false;
  for (const auto& r1 : sigs.groups[0].records) {
    const auto it = second.find(r1.perturbation_id);
    if (it == second.end()) continue;
    shared = true;
    const auto u = apply(encoder, difference(r1.treated, r1.control));
    const auto v = apply(encoder, difference(it->second->treated, it->second->control));
    if (is_zero(u) || is_zero(v)) {
      ++out.degenerate;
      continue;
    }
    out.cosines.push_back({r1.perturbation_id, cosine(u, v)});
  }
  if (!shared) throw ContractError("signature_alignment: the two groups share no perturbation id");
  return out;
}

DenseMatrix mds_export(const EmbeddingTable& table, std::span<const std::string> words, std::size_t out_dim) {
  if (out_dim != 2 && out_dim != 3) throw ContractError("mds_export: output dimension must be 2 or 3");
  DenseMatrix points(table.dim(), words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto idx = table.find(to_lower_ascii(words[i]));
    if (!idx) throw ContractError("mds_export: word '" + words[i] + "' is not in the vocabulary");
    std::copy_n(table.vector(*idx).begin(), table.dim(), points.col(i).begin());
  }
  return classical_mds(points, out_dim);
}

}  // namespace lsa
