#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "lsa/model_io.hpp"

using namespace lsa;
using namespace lsa::cli;
using Json = nlohmann::json;

namespace {

std::filesystem::path tmp(const std::string& name) { return std::filesystem::path(LSA_TEST_TMPDIR) / name; }

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto path = tmp(name);
  std::ofstream(path) << text;
  return path;
}

struct Captured {
  int code = -1;
  std::string out;
  std::string err;
};

template <class F>
Captured capture(F command, const RunConfig& cfg) {
  std::ostringstream out, err;
  Captured c;
  c.code = command(cfg, out, err);
  c.out = out.str();
  c.err = err.str();
  return c;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

RunConfig small_gmm() {
  RunConfig cfg;
  cfg.c_values = {0.01, 1.0};
  cfg.k_min = 1;
  cfg.k_max = 3;
  cfg.samples = 20'000;
  cfg.tolerance = 0.05;
  cfg.seed = 9;
  return cfg;
}

}  // namespace

TEST_CASE("gmm-demo table") {
  const Captured a = capture(cmd_gmm_demo, small_gmm());
  CHECK(a.code == kExitOk);
  CHECK(a.err.empty());
  const auto rows = csv_rows(a.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == std::vector<std::string>{"c", "k", "before", "after_cor3", "after_cor5", "after_monte_carlo",
                                            "abs_gap"});
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].size() == 7);
  // c -> 0: the two axes coincide
  CHECK(std::stod(rows[1][2]) == doctest::Approx(1.0).epsilon(1e-4));
  // closed form increases with k
  CHECK(std::stod(rows[5][3]) > std::stod(rows[4][3]));
  CHECK(std::stod(rows[6][3]) > std::stod(rows[5][3]));
  CHECK(std::stod(rows[4][3]) == doctest::Approx(0.9725188233707109).epsilon(1e-8));

  CHECK(capture(cmd_gmm_demo, small_gmm()).out == a.out);
  RunConfig other = small_gmm();
  other.seed = 10;
  CHECK(capture(cmd_gmm_demo, other).out != a.out);
}

TEST_CASE("gmm-demo reports failing rows and usage errors") {
  RunConfig cfg = small_gmm();
  cfg.samples = 50;
  cfg.tolerance = 1e-9;
  const Captured c = capture(cmd_gmm_demo, cfg);
  CHECK(c.code == kExitCheckFailed);
  CHECK(c.err.find("exceed tolerance") != std::string::npos);
  CHECK(csv_rows(c.out).size() == 7);

  cfg = small_gmm();
  cfg.k_min = 0;
  CHECK(capture(cmd_gmm_demo, cfg).code == kExitUsage);
  cfg = small_gmm();
  cfg.c_values.clear();
  CHECK(capture(cmd_gmm_demo, cfg).code == kExitUsage);
}

TEST_CASE("fit on rank-3 data") {
  // 6-dimensional samples spanning three directions
  std::ostringstream text;
  text.precision(17);
  for (int i = 0; i < 20; ++i) {
    const double a = std::sin(i * 1.3), b = std::cos(i * 0.7), c = (i % 5) - 2.0;
    text << a + c << ' ' << a << ' ' << b << ' ' << b - c << ' ' << 0.0 << ' ' << c << '\n';
  }
  RunConfig cfg;
  cfg.input = write_file("rank3.txt", text.str());
  cfg.input_format = "matrix";
  cfg.model = tmp("rank3.lsae");
  const Captured k1 = capture(cmd_fit, cfg);
  REQUIRE(k1.code == kExitOk);
  const Json r1 = Json::parse(k1.out);
  CHECK(r1["active_directions"] == 3);
  CHECK(r1["dim"] == 6);
  CHECK(r1["samples"] == 20);
  CHECK_FALSE(r1.contains("growth_check"));
  const LinearAutoencoder ae = load_autoencoder(cfg.model);
  CHECK(ae.input_dim() == 6);

  cfg.k = 2;
  cfg.model.clear();
  const Json r2 = Json::parse(capture(cmd_fit, cfg).out);
  CHECK(r2["sigma_b_inf"][0].get<double>() > r1["sigma_b_inf"][0].get<double>());
  CHECK_FALSE(r2.contains("model"));
}

TEST_CASE("fit with plus_identity on zero data keeps the identity") {
  RunConfig cfg;
  cfg.input = write_file("zeros.txt", "a 0 0 0\nb 0 0 0\nc 0 0 0\n");
  cfg.plus_identity = true;
  cfg.k = 3;
  cfg.model = tmp("zeros.lsae");
  const Captured c = capture(cmd_fit, cfg);
  REQUIRE(c.code == kExitOk);
  const Json r = Json::parse(c.out);
  CHECK(r["active_directions"] == 0);
  CHECK(r["growth_check"]["checked"] == true);
  CHECK(r["growth_check"]["holds"] == true);
  CHECK(load_autoencoder(cfg.model).b == DenseMatrix::identity(3));
}

TEST_CASE("fit errors") {
  RunConfig cfg;
  CHECK(capture(cmd_fit, cfg).code == kExitUsage);
  cfg.input = tmp("does-not-exist.txt");
  const Captured missing = capture(cmd_fit, cfg);
  CHECK(missing.code == kExitError);
  CHECK(missing.err.find("does-not-exist") != std::string::npos);
  cfg.input = write_file("ragged.txt", "1 2\n3\n");
  cfg.input_format = "matrix";
  const Captured ragged = capture(cmd_fit, cfg);
  CHECK(ragged.code == kExitError);
  CHECK(ragged.err.find("line 2") != std::string::npos);
  cfg.input_format = "parquet";
  CHECK(capture(cmd_fit, cfg).code == kExitUsage);
}

TEST_CASE("verify on a small grid") {
  RunConfig cfg;
  cfg.linear_runs = 2;
  cfg.linear_dim = 3;
  cfg.linear_samples = 16;
  cfg.etas = {1.0};
  cfg.relu_dim = 3;
  cfg.relu_step = 1e-5;
  cfg.drift_tol = 1e-5;
  const Captured c = capture(cmd_verify, cfg);
  INFO(c.out);
  CHECK(c.code == kExitOk);
  const Json r = Json::parse(c.out);
  CHECK(r["pass"] == true);
  CHECK(r["relu"][0]["beta_sq_closed_form"].get<double>() == doctest::Approx(1.6180339887).epsilon(1e-9));
  CHECK(r["alpha_beta_matches"] == "1/eta^2");

  cfg.verify_tol = 0.0;
  cfg.etas.clear();
  CHECK(capture(cmd_verify, cfg).code == kExitCheckFailed);
  cfg.linear_runs = 0;
  CHECK(capture(cmd_verify, cfg).code == kExitUsage);
}

TEST_CASE("eval with and without an encoder") {
  RunConfig cfg;
  cfg.input = write_file("eval_vectors.txt",
                         "man 1 0 0\nwoman 1 1 0\nking 1 0 2\nqueen 1 1 2\napple -3 0 0.5\ncar 0 -2 1\n");
  cfg.analogy = write_file("eval_analogy.txt", ": gender\nman woman king queen\n");
  cfg.similarity = write_file("eval_sim.txt", "man,woman,8\nking,queen,7\nman,car,1\napple,car,3\nking,ghost,5\n");
  const Captured plain = capture(cmd_eval, cfg);
  REQUIRE(plain.code == kExitOk);
  const Json r = Json::parse(plain.out);
  CHECK(r["vocab"] == 6);
  CHECK(r["analogy_tuples"] == 1);
  CHECK(r["similarity_pairs"] == 5);
  CHECK(r["original"]["analogy"]["value"].get<double>() == doctest::Approx(1.0));
  CHECK(r["original"]["analogy_accuracy"]["value"] == 1.0);
  CHECK(r["original"]["wsim"]["resolvable"] == 4);
  CHECK(r["original"]["wsim"]["skipped"] == 1);
  CHECK_FALSE(r.contains("encoded"));

  cfg.model = tmp("eval_identity.lsae");
  save_autoencoder(cfg.model, {DenseMatrix::identity(3), DenseMatrix::identity(3)});
  const Json e = Json::parse(capture(cmd_eval, cfg).out);
  CHECK(e["encoded"] == e["original"]);

  cfg.accuracy = false;
  CHECK_FALSE(Json::parse(capture(cmd_eval, cfg).out)["original"].contains("analogy_accuracy"));

  cfg.model = tmp("eval_wrong_dim.lsae");
  save_autoencoder(cfg.model, {DenseMatrix::identity(2), DenseMatrix::identity(2)});
  const Captured wrong = capture(cmd_eval, cfg);
  CHECK(wrong.code == kExitError);
  CHECK(wrong.err.find("dimension") != std::string::npos);

  RunConfig none;
  none.input = cfg.input;
  CHECK(capture(cmd_eval, none).code == kExitUsage);
}

TEST_CASE("signatures CSV and summary") {
  RunConfig cfg;
  cfg.input = write_file("sigs.csv",
                         "group,perturbation_id,condition,v1,v2\n"
                         "A,d1,control,0,0\nA,d1,treated,1,0\nB,d1,control,0,0\nB,d1,treated,2,0\n"
                         "A,d2,control,0,0\nA,d2,treated,1,0\nB,d2,control,0,0\nB,d2,treated,0,1\n");
  const Captured c = capture(cmd_signatures, cfg);
  REQUIRE(c.code == kExitOk);
  const auto rows = csv_rows(c.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"perturbation_id", "cos_before"});
  CHECK(rows[1] == std::vector<std::string>{"d1", "1"});
  CHECK(rows[2] == std::vector<std::string>{"d2", "0"});
  CHECK(c.out.find("# before min=0 q25=0.25 median=0.5 q75=0.75 max=1 frac_above_0.5=0.5") != std::string::npos);

  cfg.model = tmp("sigs.lsae");
  save_autoencoder(cfg.model, {DenseMatrix::identity(2), DenseMatrix::from_rows({{1, 1}, {1, 1}})});
  const Captured e = capture(cmd_signatures, cfg);
  REQUIRE(e.code == kExitOk);
  const auto erows = csv_rows(e.out);
  CHECK(erows[0].size() == 3);
  CHECK(std::stod(erows[2][2]) == doctest::Approx(1.0));
  CHECK(e.out.find("# after") != std::string::npos);
}

TEST_CASE("mds output") {
  RunConfig cfg;
  cfg.input = write_file("mds.txt", "a 0 0 0\nb 1 1 1\nc 3 3 3\nd 0 1 0\n");
  cfg.words = {"a", "b", "c"};
  const Captured c = capture(cmd_mds, cfg);
  REQUIRE(c.code == kExitOk);
  const auto rows = csv_rows(c.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"space", "word", "x1", "x2"});
  CHECK(rows[1][0] == "original");

  cfg.mds_dim = 3;
  cfg.model = tmp("mds.lsae");
  save_autoencoder(cfg.model, {DenseMatrix::identity(3), 2.0 * DenseMatrix::identity(3)});
  const auto rows3 = csv_rows(capture(cmd_mds, cfg).out);
  CHECK(rows3.size() == 7);
  CHECK(rows3[0].size() == 5);
  CHECK(rows3[4][0] == "encoded");

  cfg.words = {"a", "ghost"};
  const Captured oov = capture(cmd_mds, cfg);
  CHECK(oov.code == kExitError);
  CHECK(oov.err.find("ghost") != std::string::npos);
  cfg.mds_dim = 5;
  CHECK(capture(cmd_mds, cfg).code == kExitUsage);
}

TEST_CASE("output file") {
  RunConfig cfg = small_gmm();
  cfg.c_values = {1.0};
  cfg.k_max = 1;
  cfg.out = tmp("gmm.csv");
  const Captured c = capture(cmd_gmm_demo, cfg);
  CHECK(c.code == kExitOk);
  CHECK(c.out.empty());
  std::ifstream in(cfg.out);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("c,k,before", 0) == 0);

  cfg.out = "/nonexistent/dir/out.csv";
  CHECK(capture(cmd_gmm_demo, cfg).code == kExitError);
}
