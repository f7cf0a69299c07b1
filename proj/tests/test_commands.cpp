#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fellap/commands.hpp"

using namespace fellap;

namespace {

std::string sample(const std::string& name) { return std::string(FELLAP_SAMPLES_DIR) + "/" + name; }

CommonOptions with_config(const std::string& name) {
  CommonOptions o;
  o.config_path = sample(name);
  return o;
}

std::vector<std::vector<std::string>> rows_of(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(cur);
    rows.push_back(cells);
  }
  return rows;
}

int column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  ADD_FAILURE() << "no column " << name;
  return 0;
}

}  // namespace

TEST(Config, LoadsSamples) {
  const Config c = Config::load_file(sample("semidirect.json"));
  EXPECT_EQ(c.kind_of("s3"), "group");
  EXPECT_EQ(c.kind_of("z3_corner"), "action");
  EXPECT_EQ(c.kind_of("s3_perturbed"), "twist");
  EXPECT_EQ(c.kind_of("f2_bundle"), "bundle");
  EXPECT_EQ(c.kind_of("s3_uniform"), "witness");
  EXPECT_EQ(c.kind_of("nothing"), "");
  EXPECT_EQ(c.hash().size(), 16u);
  EXPECT_EQ(c.action("z3_corner").algebra().block_count(), 2);
  EXPECT_THROW(Config::load_file(sample("missing_ref.json")), ConfigError);
  EXPECT_THROW(Config::load_file(sample("no_such_file.json")), ConfigError);
}

TEST(Config, ValueGrammar) {
  const std::string doc = R"({
    "groups": {"p": {"kind": "product", "factors": ["z2", "z3"]}, "z2": {"kind": "cyclic", "order": 2},
               "z3": {"kind": "cyclic", "order": 3}},
    "algebras": {"m2": {"blocks": [2]}},
    "actions": {"phase": {"kind": "table", "group": "z2", "algebra": "m2",
                          "entries": [{"t": "1", "source": [0], "image": [0],
                                       "unitaries": [[[[0, 1], "0"], ["0", ["0", "-1"]]]]}]}}
  })";
  const Config c = Config::parse(doc);
  EXPECT_EQ(c.group("p").order(), 6);
  const Matrix u = c.action("phase").iso(c.group("z2").element(1)).unitaries[0];
  EXPECT_EQ(u(0, 0), Complex(0, 1));
  EXPECT_EQ(u(1, 1), Complex(0, -1));
  EXPECT_TRUE(validate_partial_action(c.action("phase"), 0).ok());
}

TEST(Config, Rejections) {
  EXPECT_THROW(Config::parse("[1]"), ConfigError);
  EXPECT_THROW(Config::parse("{"), ConfigError);
  EXPECT_THROW(Config::parse(R"({"extras": {}})"), ConfigError);
  EXPECT_THROW(Config::parse(R"({"groups": {"g": {"kind": "torus"}}})"), ConfigError);
  EXPECT_THROW(Config::parse(R"({"groups": {"g": {"kind": "cyclic", "order": "2.5"}}})"), ConfigError);
  EXPECT_THROW(Config::parse(R"({"actions": {"x": {"kind": "restrict", "action": "x", "ideal": []}}})"),
               ConfigError);
  // Non-unitary generator data is a config error, not a crash.
  EXPECT_THROW(Config::parse(R"({"groups": {"z2": {"kind": "cyclic", "order": 2}},
      "algebras": {"c": {"blocks": [1]}},
      "actions": {"a": {"kind": "table", "group": "z2", "algebra": "c",
                        "entries": [{"t": "1", "source": [0], "image": [0], "unitaries": [[["2"]]]}]}}})"),
               ConfigError);
  // Same text, same hash; different text, different hash.
  EXPECT_EQ(Config::parse("{}").hash(), Config::parse("{}").hash());
  EXPECT_NE(Config::parse("{}").hash(), Config::parse("{ }").hash());
}

TEST(Commands, ValidateExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate(with_config("semidirect.json"), "z3_corner_bundle", 2, 4, out, err), exit_pass);
  EXPECT_EQ(cmd_validate(with_config("semidirect.json"), "s3_perturbed", 2, 4, out, err), exit_pass);

  std::ostringstream bad, bad_err;
  EXPECT_EQ(cmd_validate(with_config("corrupted_cocycle.json"), "z3_sign", 2, 4, bad, bad_err), exit_validation);
  EXPECT_NE(bad_err.str().find("condition (5)"), std::string::npos);
  const auto rows = rows_of(bad.str());
  const int check = column(rows[0], "check");
  const int status = column(rows[0], "status");
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_EQ(rows[i][status], rows[i][check] == "condition (5)" ? "fail" : "pass") << rows[i][check];

  EXPECT_THROW(cmd_validate(with_config("semidirect.json"), "nothing", 2, 4, out, err), ConfigError);
  EXPECT_THROW(cmd_validate(with_config("semidirect.json"), "s3", 2, 4, out, err), ConfigError);
  EXPECT_THROW(cmd_validate(with_config("missing_ref.json"), "orphan", 2, 4, out, err), ConfigError);
}

TEST(Commands, GlobalizeTrivialZ3) {
  std::ostringstream out, err;
  const std::string written = testing::TempDir() + "globalized.json";
  ASSERT_EQ(cmd_globalize(with_config("semidirect.json"), "z3_trivial", written, out, err), exit_pass);
  const auto rows = rows_of(out.str());
  const int row = column(rows[0], "row");
  const int t = column(rows[0], "t");
  const int image = column(rows[0], "image");
  const int value = column(rows[0], "value");
  int blocks = 0;
  std::map<std::string, std::string> sigma;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][row] == "N-block") {
      ++blocks;
      EXPECT_EQ(rows[i][value], "1");
    }
    if (rows[i][row] == "sigma") sigma[rows[i][t]] = rows[i][image];
    if (rows[i][row] == "round-trip") EXPECT_EQ(rows[i][value], "0");
    if (rows[i][row] == "orbit-span") EXPECT_EQ(rows[i][value], "equal");
  }
  // N = C^3 with the cyclic shift.
  EXPECT_EQ(blocks, 3);
  EXPECT_EQ(sigma["0"], "0 1 2");
  EXPECT_EQ(sigma["1"], "1 2 0");
  EXPECT_EQ(sigma["2"], "2 0 1");

  // The written config carries a global action that validates.
  const Config back = Config::load_file(written);
  const CPartialAction& glob = back.action("z3_trivial_global");
  EXPECT_TRUE(validate_partial_action(glob, 0).ok());
  for (const auto& s : glob.group().elements()) EXPECT_EQ(glob.domain(s).size(), 3u);
  std::remove(written.c_str());
}

TEST(Commands, GlobalizeErrors) {
  std::ostringstream out, err;
  EXPECT_THROW(cmd_globalize(with_config("broken_partial.json"), "z3_shift", "", out, err), ValidationError);
  EXPECT_THROW(cmd_globalize(with_config("semidirect.json"), "f2_generators", "", out, err), Unsupported);
  EXPECT_EQ(cmd_globalize(with_config("semidirect.json"), "s3_random", "", out, err), exit_pass);
}

TEST(Commands, APCheckUniformOnS3IsAllZero) {
  std::ostringstream out, err;
  APCheckOptions ap;
  ap.bundle = "s3_m2";
  ap.witness = "builtin:uniform";
  CommonOptions o = with_config("semidirect.json");
  o.tol = 1e-12;
  ASSERT_EQ(cmd_ap_check(o, ap, out, err), exit_pass);
  const auto rows = rows_of(out.str());
  const int defect = column(rows[0], "defect");
  EXPECT_EQ(rows.size(), 1u + 6u * 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::stod(rows[i][defect]), 1e-12);
}

TEST(Commands, APCheckFolnerTrace) {
  std::ostringstream out, err;
  APCheckOptions ap;
  ap.bundle = "z_group";
  ap.witness = "builtin:folner:5";
  ap.targets = "1;-3";
  EXPECT_EQ(cmd_ap_check(with_config("lattice.json"), ap, out, err), exit_validation);
  const auto rows = rows_of(out.str());
  const int index = column(rows[0], "index");
  const int t = column(rows[0], "t");
  const int defect = column(rows[0], "defect");
  ASSERT_EQ(rows.size(), 1u + 10u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double n = std::stod(rows[i][index]);
    const double len = std::abs(std::stod(rows[i][t]));
    EXPECT_NEAR(std::stod(rows[i][defect]), std::min(1.0, len / n), 1e-12);
  }

  ap.witness = "builtin:uniform";
  EXPECT_THROW(cmd_ap_check(with_config("lattice.json"), ap, out, err), Unsupported);
  ap.witness = "s3_uniform";
  ap.bundle = "z3_corner_bundle";
  EXPECT_THROW(cmd_ap_check(with_config("semidirect.json"), ap, out, err), ConfigError);
  ap.witness = "builtin:nope";
  EXPECT_THROW(cmd_ap_check(with_config("semidirect.json"), ap, out, err), ConfigError);
}

TEST(Commands, CuntzDefectColumnIsOneOverI) {
  std::ostringstream out, err;
  ASSERT_EQ(cmd_cuntz_ap(CommonOptions{}, 2, 8, "a", false, out, err), exit_pass);
  const auto rows = rows_of(out.str());
  const int i = column(rows[0], "i");
  const int defect = column(rows[0], "defect");
  ASSERT_EQ(rows.size(), 9u);
  for (std::size_t k = 1; k < rows.size(); ++k)
    EXPECT_NEAR(std::stod(rows[k][defect]), 1.0 / std::stod(rows[k][i]), 1e-12);
  EXPECT_THROW(cmd_cuntz_ap(CommonOptions{}, 2, 3, "z", false, out, err), ConfigError);
}

TEST(Commands, KernelsOnZGroupBundle) {
  std::ostringstream out, err;
  ASSERT_EQ(cmd_kernels(with_config("lattice.json"), "z_group", 3, 2, out, err), exit_pass);
  const auto rows = rows_of(out.str());
  const int size = column(rows[0], "window_size");
  const int dim = column(rows[0], "dim_MF");
  const int n2 = column(rows[0], "norm2");
  const int mf = column(rows[0], "mf_norm");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const long f = std::stol(rows[k][size]);
    EXPECT_EQ(std::stol(rows[k][dim]), f * f);
    EXPECT_LE(std::stod(rows[k][mf]), std::stod(rows[k][n2]) + 1e-12);
  }
  EXPECT_EQ(rows.size(), 1u + 4u * 2u);
}

TEST(Commands, GroupoidTable) {
  std::ostringstream out, err;
  ASSERT_EQ(cmd_groupoid(CommonOptions{}, 2, 2, 1, out, err), exit_pass);
  EXPECT_EQ(rows_of(out.str()).size(), 17u);
}

TEST(Commands, SameInputsSameBytes) {
  std::string first;
  for (int k = 0; k < 2; ++k) {
    std::ostringstream out, err;
    CommonOptions o = with_config("semidirect.json");
    o.seed = 5;
    cmd_kernels(o, "s3_twisted", 1, 3, out, err);
    if (k == 0)
      first = out.str();
    else
      EXPECT_EQ(out.str(), first);
  }
}

TEST(Csv, Quoting) {
  EXPECT_EQ(csv_cell("plain"), "plain");
  EXPECT_EQ(csv_cell("(1,0)#0"), "\"(1,0)#0\"");
  EXPECT_EQ(csv_cell("say \"x\""), "\"say \"\"x\"\"\"");
  EXPECT_EQ(fmt_num(0.1), "0.1");
  EXPECT_EQ(fmt_num(1.0 / 3.0), "0.333333333333333");
}
