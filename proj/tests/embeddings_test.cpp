#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lsa/embeddings.hpp"
#include "lsa/errors.hpp"
#include "test_support.hpp"

using namespace lsa;

namespace {

EmbeddingTable table_of(std::vector<std::string> words, std::vector<std::vector<double>> vecs) {
  const std::size_t d = vecs.front().size();
  DenseMatrix m(d, vecs.size());
  for (std::size_t c = 0; c < vecs.size(); ++c)
    for (std::size_t r = 0; r < d; ++r) m(r, c) = vecs[c][r];
  return EmbeddingTable(std::move(words), std::move(m));
}

LoadedTable parse(const std::string& text, std::size_t limit = 0) {
  std::istringstream in(text);
  return parse_vectors(in, limit);
}

std::vector<AnalogyGroup> analogies(const std::string& text) {
  std::istringstream in(text);
  return parse_analogy_dataset(in);
}

}  // namespace

TEST_CASE("vector loading") {
  const auto t = parse("the 0.1 0.2\nof 0.3 0.4\nAnd 0.5 0.6\n");
  CHECK(t.table.size() == 3);
  CHECK(t.table.dim() == 2);
  CHECK(t.table.find("and") == 2);
  CHECK(t.table.vector(1)[1] == 0.4);

  std::string ten;
  for (int i = 0; i < 10; ++i) ten += "w" + std::to_string(i) + " 1 2 3\n";
  CHECK(parse(ten, 1).table.size() == 1);

  const auto skipped = parse("a 1 2 3\nb 1 2\nc 4 5 6\nd 1 x 3\n");
  CHECK(skipped.table.size() == 2);
  CHECK(skipped.skipped_lines == 2);
  CHECK(skipped.table.find("c") == 1);

  const auto dup = parse("Apple 1 2\napple 3 4\n");
  CHECK(dup.table.size() == 1);
  CHECK(dup.duplicate_words == 1);

  CHECK_THROWS_AS(parse("\n\n"), FormatError);
  CHECK_THROWS_AS(parse("only words here\n"), FormatError);
  CHECK_THROWS_AS(load_vectors("/nonexistent/vectors.txt"), IoError);

  const auto path = std::filesystem::path(LSA_TEST_TMPDIR) / "vectors.txt";
  std::ofstream(path) << "x 1 0\ny 0 1\n";
  CHECK(load_vectors(path).table.size() == 2);
}

TEST_CASE("EmbeddingTable invariants") {
  CHECK_THROWS_AS(EmbeddingTable({"a", "a"}, DenseMatrix(2, 2)), ContractError);
  CHECK_THROWS_AS(EmbeddingTable({"a"}, DenseMatrix(2, 2)), ContractError);
  const auto t = table_of({"a", "b"}, {{1, 2}, {3, 4}});
  CHECK_FALSE(t.find("c").has_value());
  const auto e = t.encoded(DenseMatrix::from_rows({{2, 0}, {0, 1}, {1, 1}}));
  CHECK(e.dim() == 3);
  CHECK(e.vector(1)[0] == 6.0);
  CHECK(e.vector(1)[2] == 7.0);
}

TEST_CASE("analogy dataset loading") {
  const auto g = analogies(": capitals\nAthens Greece Oslo Norway\nBern Switzerland Oslo Norway\n\n"
                           ": family\nboy girl man woman\nson daughter man woman\nking queen man woman\n");
  REQUIRE(g.size() == 2);
  CHECK(g[0].relationship == "capitals");
  CHECK(g[0].tuples.size() == 2);
  CHECK(g[1].tuples.size() == 3);
  CHECK(g[0].tuples[0].a1 == "athens");
  CHECK(analogies("").empty());
  try {
    analogies("\na b c d\n");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(analogies(": x\na b c\n"), FormatError);
}

TEST_CASE("word pairs and tuple combinations") {
  const auto g = analogies(": r\na A2 b B2\nb B2 c C2\na A2 c C2\n");
  const auto pairs = relationship_word_pairs(g[0]);
  CHECK(pairs.size() == 3);
  CHECK(pairs[0] == WordPair{"a", "a2"});
  const auto tuples = combine_relationship_pairs(g);
  CHECK(tuples.size() == 3);  // 3 choose 2, no self pairs
  for (const auto& t : tuples) CHECK_FALSE((t.a1 == t.a2 && t.b1 == t.b2));
}

TEST_CASE("relationship_pairs") {
  const auto g = analogies(": r\na a2 b b2\nb b2 c c2\n");
  const auto table = table_of({"a", "a2", "b", "b2", "c", "c2"},
                              {{0, 0}, {1, 0}, {0, 1}, {1, 2}, {5, 5}, {5, 6}});
  const auto rp = relationship_pairs(g, table);
  REQUIRE(rp.relationships.size() == 1);
  CHECK(rp.relationships[0].pairs.size() == 3);
  CHECK(rp.skipped_oov == 0);
  // first combination (a:a2, b:b2): q1 = a2 - a, q2 = b2 - b, normalized
  CHECK(rp.relationships[0].pairs[0].q1 == std::vector<double>{1.0, 0.0});
  CHECK(rp.relationships[0].pairs[0].q2[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(rp.relationships[0].pairs[0].q2[1] == doctest::Approx(1.0 / std::sqrt(2.0)));

  const auto oov = table_of({"a", "a2", "b", "b2", "c"}, {{0, 0}, {1, 0}, {0, 1}, {1, 2}, {5, 5}});
  const auto r2 = relationship_pairs(g, oov);
  CHECK(r2.relationships[0].pairs.size() == 1);
  CHECK(r2.skipped_oov == 1);

  const auto degenerate = table_of({"a", "a2", "b", "b2", "c", "c2"},
                                   {{0, 0}, {0, 0}, {0, 1}, {1, 2}, {5, 5}, {5, 6}});
  const auto r3 = relationship_pairs(g, degenerate);
  CHECK(r3.relationships[0].pairs.size() == 1);
  CHECK(r3.skipped_degenerate == 1);
  CHECK(r3.skipped_oov == 0);
}

TEST_CASE("analogy_score") {
  const std::vector<double> r{1.0, -1.0, 0.5};
  std::vector<std::string> words;
  std::vector<std::vector<double>> vecs;
  for (int i = 0; i < 4; ++i) {
    const auto base = lsa::test::random_vector(3, 10 + i);
    std::vector<double> shifted = base;
    for (std::size_t j = 0; j < 3; ++j) shifted[j] += r[j];
    words.push_back("a" + std::to_string(i));
    vecs.push_back(base);
    words.push_back("b" + std::to_string(i));
    vecs.push_back(shifted);
  }
  const auto table = table_of(words, vecs);
  // cos(a2 - a1, b2 - b1): with b = a + r the two differences coincide
  const std::vector<AnalogyTuple> tuples{{"a0", "b0", "a1", "b1"}, {"a2", "b2", "a3", "b3"}, {"a0", "b0", "zz", "b1"}};
  const MetricResult m = analogy_score(table, tuples);
  CHECK(m.value == doctest::Approx(1.0));
  CHECK(m.resolvable == 2);
  CHECK(m.skipped == 1);
  const DenseMatrix id = DenseMatrix::identity(3);
  CHECK(analogy_score(table, tuples, &id).value == m.value);
  const std::vector<AnalogyTuple> none{{"x", "y", "z", "w"}};
  CHECK_THROWS_AS(analogy_score(table, none), ContractError);
}

TEST_CASE("analogy_accuracy") {
  // king - man + woman = queen exactly; distractors sit elsewhere
  const auto table = table_of({"man", "woman", "king", "queen", "apple", "car"},
                              {{1, 0, 0}, {1, 1, 0}, {1, 0, 2}, {1, 1, 2}, {-3, 0, 0.5}, {0, -2, 1}});
  const std::vector<AnalogyTuple> good{{"man", "woman", "king", "queen"}, {"man", "king", "woman", "queen"}};
  const MetricResult acc = analogy_accuracy(table, good);
  CHECK(acc.value == 1.0);
  CHECK(acc.resolvable == 2);
  const DenseMatrix id = DenseMatrix::identity(3);
  CHECK(analogy_accuracy(table, good, &id).value == 1.0);

  // the answer is a query word: excluded, so wrong
  const std::vector<AnalogyTuple> self{{"man", "woman", "man", "woman"}};
  CHECK(analogy_accuracy(table, self).value == 0.0);

  const std::vector<AnalogyTuple> mixed{{"man", "woman", "king", "queen"}, {"man", "woman", "king", "car"},
                                        {"nope", "woman", "king", "car"}};
  const MetricResult half = analogy_accuracy(table, mixed);
  CHECK(half.value == 0.5);
  CHECK(half.resolvable + half.skipped == mixed.size());
}

TEST_CASE("analogy_accuracy breaks ties toward the lower column") {
  // two identical candidates; the first one listed wins
  const auto table = table_of({"a", "b", "c", "d1", "d2"}, {{1, 0}, {1, 1}, {2, 0}, {2, 1}, {2, 1}});
  const std::vector<AnalogyTuple> t1{{"a", "b", "c", "d1"}};
  const std::vector<AnalogyTuple> t2{{"a", "b", "c", "d2"}};
  CHECK(analogy_accuracy(table, t1).value == 1.0);
  CHECK(analogy_accuracy(table, t2).value == 0.0);
}

TEST_CASE("reference point") {
  const auto same = table_of({"a", "b", "c", "d"}, {{1, 2}, {1, 2}, {1, 2}, {1, 2}});
  const auto o = reference_point(same).origin;
  // sqrt(vocab) * ||v|| along v
  CHECK(o[0] == doctest::Approx(2.0 * 1.0));
  CHECK(o[1] == doctest::Approx(2.0 * 2.0));

  const auto single = table_of({"w"}, {{3, 4}});
  CHECK(reference_point(single).origin[0] == doctest::Approx(3.0));
  CHECK(reference_point(single).origin[1] == doctest::Approx(4.0));
  // orientation follows the data even when every entry is negative
  const auto neg = table_of({"w"}, {{-3, -4}});
  CHECK(reference_point(neg).origin[0] == doctest::Approx(-3.0));

  // recomputed in the encoded space
  const auto t = table_of({"a", "b", "c"}, {{1, 0}, {0, 2}, {1, 1}});
  const DenseMatrix b = DenseMatrix::from_rows({{3, 0}, {0, 1}});
  const auto enc = t.encoded(b);
  const auto o_enc = reference_point(enc).origin;
  const SvdFactors f = svd(enc.vectors());
  CHECK(std::abs(o_enc[0]) == doctest::Approx(f.sigma[0] * std::abs(f.u(0, 0))));
  CHECK(zero_reference(t).origin == std::vector<double>{0.0, 0.0});
}

TEST_CASE("word-similarity parsing") {
  std::istringstream csv("word1,word2,score\nTiger,cat,7.35\nbook,paper,5.0\n");
  const auto p = parse_word_similarity(csv);
  REQUIRE(p.size() == 2);
  CHECK(p[0].w1 == "tiger");
  CHECK(p[0].score == 7.35);
  std::istringstream tsv("a\tb\t1\nc\td\t2\n");
  CHECK(parse_word_similarity(tsv).size() == 2);
  std::istringstream men("sun sunlight 50.000000\nbikini swimsuit 48\n");
  const auto m = parse_word_similarity(men);
  CHECK(m.size() == 2);
  CHECK(m[1].w2 == "swimsuit");
  std::istringstream bad("a,b,1\nc,d,x\n");
  try {
    parse_word_similarity(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("wsim") {
  // cos with the first axis decreases along the list, as do the scores
  const auto table = table_of({"x", "p", "q", "r", "s"}, {{1, 0}, {1, 0.1}, {1, 1}, {0, 1}, {-1, 1}});
  const std::vector<SimilarityPair> pairs{{"x", "p", 9}, {"x", "q", 6}, {"x", "r", 3}, {"x", "s", 1}, {"x", "zz", 5}};
  const MetricResult m = wsim(table, pairs, zero_reference(table));
  CHECK(m.value == doctest::Approx(1.0));
  CHECK(m.resolvable == 4);
  CHECK(m.skipped == 1);

  // translation consistency, exact with dyadic data
  const std::vector<double> t{0.5, -2.25};
  DenseMatrix moved = table.vectors();
  for (std::size_t c = 0; c < moved.cols(); ++c)
    for (std::size_t r = 0; r < 2; ++r) moved(r, c) += t[r];
  const EmbeddingTable shifted(table.words(), moved);
  const ReferencePoint o{{0.25, 0.75}};
  const ReferencePoint o_t{{0.25 + t[0], 0.75 + t[1]}};
  CHECK(wsim(shifted, pairs, o_t).value == wsim(table, pairs, o).value);

  const std::vector<SimilarityPair> one{{"x", "p", 1}};
  CHECK_THROWS_AS(wsim(table, one, zero_reference(table)), ContractError);
  CHECK_THROWS_AS(wsim(table, pairs, ReferencePoint{{0.0}}), ContractError);
}

TEST_CASE("signature parsing") {
  std::istringstream in(
      "group,perturbation_id,condition,v1,v2\n"
      "MCF7,d1,control,0,0\nMCF7,d1,treated,1,0\n"
      "A549,d1,control,1,1\nA549,d1,treated,2,1\n"
      "MCF7,d2,control,0,0\n");
  const SignatureSet s = parse_signatures(in);
  CHECK(s.dim == 2);
  CHECK(s.groups[0].label == "MCF7");
  CHECK(s.groups[0].records.size() == 1);
  CHECK(s.incomplete == 1);

  std::istringstream three("a,x,control,1\nb,x,control,1\nc,x,control,1\n");
  try {
    parse_signatures(three);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream cond("a,x,control,1\nb,x,sham,1\n");
  CHECK_THROWS_AS(parse_signatures(cond), FormatError);
  std::istringstream dupe("a,x,control,1\na,x,control,2\nb,x,control,1\n");
  CHECK_THROWS_AS(parse_signatures(dupe), FormatError);
  std::istringstream arity("a,x,control,1,2\nb,x,control,1\n");
  CHECK_THROWS_AS(parse_signatures(arity), FormatError);
  std::istringstream one_group("a,x,control,1\na,x,treated,2\n");
  CHECK_THROWS_AS(parse_signatures(one_group), FormatError);
}

TEST_CASE("signature alignment") {
  SignatureSet s;
  s.dim = 3;
  s.groups[0] = {"g1", {{"d1", {0, 0, 0}, {1, 2, 3}}, {"d2", {1, 1, 1}, {1, 1, 2}}, {"only1", {0, 0, 0}, {1, 0, 0}}}};
  s.groups[1] = {"g2", {{"d2", {0, 0, 0}, {0, 0, 5}}, {"d1", {1, 1, 1}, {2, 3, 4}}}};
  const auto a = signature_alignment(s);
  REQUIRE(a.cosines.size() == 2);
  CHECK(a.cosines[0].perturbation_id == "d1");
  CHECK(a.cosines[0].cos == doctest::Approx(1.0));
  CHECK(a.cosines[1].cos == doctest::Approx(1.0));

  s.groups[1].records[1].treated = {1, 1, 1};  // zero signature
  CHECK(signature_alignment(s).degenerate == 1);

  SignatureSet ortho;
  ortho.dim = 2;
  ortho.groups[0] = {"g1", {{"d", {0, 0}, {1, 0}}}};
  ortho.groups[1] = {"g2", {{"d", {0, 0}, {0, 3}}}};
  CHECK(signature_alignment(ortho).cosines[0].cos == doctest::Approx(0.0));
  const DenseMatrix id = DenseMatrix::identity(2);
  CHECK(signature_alignment(ortho, &id).cosines[0].cos == signature_alignment(ortho).cosines[0].cos);

  ortho.groups[1].records[0].perturbation_id = "other";
  CHECK_THROWS_AS(signature_alignment(ortho), ContractError);
}

TEST_CASE("mds export") {
  // collinear words
  const auto line = table_of({"a", "b", "c"}, {{0, 0, 0}, {1, 1, 1}, {3, 3, 3}});
  const std::vector<std::string> abc{"a", "b", "c"};
  const DenseMatrix coords = mds_export(line, abc, 2);
  CHECK(coords.rows() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(coords(i, 1)) < 1e-8);

  const std::vector<std::string> ab{"a", "c"};
  const DenseMatrix two = mds_export(line, ab, 2);
  const double dist = std::hypot(two(0, 0) - two(1, 0), two(0, 1) - two(1, 1));
  CHECK(dist == doctest::Approx(3.0 * std::sqrt(3.0)));

  // 10 planted words on a plane inside R^50
  const DenseMatrix q = lsa::test::random_orthogonal(50, 4);
  std::vector<std::string> words;
  DenseMatrix pts(50, 10);
  const auto coeff = lsa::test::random_matrix(2, 10, 5);
  for (std::size_t c = 0; c < 10; ++c) {
    words.push_back("w" + std::to_string(c));
    for (std::size_t r = 0; r < 50; ++r) pts(r, c) = 1.0 + q(r, 0) * coeff(0, c) + q(r, 1) * coeff(1, c);
  }
  const EmbeddingTable plane(words, pts);
  const DenseMatrix out = mds_export(plane, words, 2);
  CHECK(max_abs_difference(pairwise_distances(out.transpose()), pairwise_distances(pts)) < 1e-6);

  const std::vector<std::string> missing{"a", "ghost"};
  try {
    mds_export(line, missing, 2);
    FAIL("expected ContractError");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
  CHECK_THROWS_AS(mds_export(line, abc, 4), ContractError);
}

TEST_CASE("metric JSON") {
  CHECK(metric_json({"wsim", 0.5, 3, 1}) == R"({"metric":"wsim","value":0.5,"resolvable":3,"skipped":1})");
}
