#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "radonlab/radonlab.hpp"

using namespace radonlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("radonlab_harness_" + name);
  fs::remove_all(p);
  return p;
}

Report run(const std::string& name, json params, const fs::path& out = {}, int64_t seed = 1) {
  ExperimentSpec s;
  s.name = name;
  s.params = std::move(params);
  s.seed = seed;
  s.out_dir = out.string();
  return run_experiment(s);
}

// all regular files under dir, name -> bytes
std::map<std::string, std::string> files_of(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST(FitPowerLaw, Examples) {
  std::vector<double> x{1, 2, 4, 8, 16}, y, c(5, 5.0);
  for (double v : x) y.push_back(1 / (v * v));
  auto f = fit_power_law(x, y);
  EXPECT_NEAR(f.slope, -2, 1e-12);
  EXPECT_NEAR(f.r2, 1, 1e-12);
  EXPECT_NEAR(fit_power_law(x, c).slope, 0, 1e-15);
  EXPECT_THROW(fit_power_law({1, 2}, {1, 1}), InvalidArgument);
  EXPECT_THROW(fit_power_law({1, 2, 3}, {1, 0, 1}), InvalidArgument);
  EXPECT_THROW(fit_power_law({1, -2, 3}, {1, 1, 1}), InvalidArgument);
}

TEST(FitLogGrowth, Examples) {
  std::vector<double> N{4, 8, 16, 32}, y, c(4, 2.5);
  for (double v : N) y.push_back(3 * std::log(v));
  auto f = fit_log_growth(N, y);
  EXPECT_NEAR(f.slope, 3, 1e-12);
  EXPECT_NEAR(f.r2, 1, 1e-12);
  EXPECT_NEAR(fit_log_growth(N, c).slope, 0, 1e-15);
  EXPECT_THROW(fit_log_growth({1, 4, 8}, {1, 2, 3}), InvalidArgument);
  EXPECT_THROW(fit_log_growth({4, 8}, {1, 2}), InvalidArgument);
}

TEST(Fit, RefitReproducesSlopeAndR2InRange) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 10);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x, y;
    for (int i = 0; i < 8; ++i) x.push_back(2 + i * u(rng)), y.push_back(u(rng));
    for (auto f : {fit_power_law(x, y), fit_log_growth(x, y)}) {
      EXPECT_GE(f.r2, 0);
      EXPECT_LE(f.r2, 1);
      std::vector<double> own;
      for (double v : x) own.push_back(f.predict(v));
      auto g = f.model == FitModel::PowerLaw ? fit_power_law(x, own) : fit_log_growth(x, own);
      EXPECT_NEAR(g.slope, f.slope, 1e-12);
    }
  }
}

TEST(Fit, GaussMaximaToPrime199) {
  std::vector<double> x, y;
  for (auto& r : gauss_decay_scan(gamma_1d({1, 2}), 199, true)) x.push_back(static_cast<double>(r.q)), y.push_back(r.max_abs);
  EXPECT_LE(fit_power_law(x, y).slope, -0.45);
}

TEST(Io, NumbersRoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = u(rng) * std::exp2(static_cast<int>(rng() % 80) - 40);
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(INFINITY), "inf");
  EXPECT_EQ(format_number(NAN), "nan");
}

TEST(Io, CsvLayout) {
  CsvTable T{"t", {"a", "b", "c"}, {}};
  T.add({int64_t(3), 0.1, std::string("x,\"y\"")});
  EXPECT_THROW(T.add({int64_t(1)}), InvalidArgument);
  auto text = T.render({{"name", "demo"}});
  EXPECT_EQ(text, "# spec: {\"name\":\"demo\"}\na,b,c\n3,0.10000000000000001,\"x,\"\"y\"\"\"\n");
  EXPECT_EQ(T.column("a"), std::vector<double>{3});
  EXPECT_THROW(T.column("z"), InvalidArgument);
}

TEST(Io, SvgChart) {
  auto svg = render_svg("t<1>", "x", "y", {{"a", {1, 2, 3}, {1, 0.5, 0.25}}, {"b", {1, 2}, {0, -1}}}, true, true);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("t&lt;1&gt;"), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 5, true);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(render_svg("empty", "x", "y", {}).find("</svg>"), std::string::npos);
}

TEST(Io, MultiplierDumpsRoundTrip) {
  DyadicDecomposition D(kernel_hilbert(), 3);
  auto S = multiplier_mn_grid(D.piece(3), gamma_1d({1, 2}), 16);
  S.metadata = {{"n", 3}};
  auto C = multiplier_from_csv(multiplier_csv(S));
  EXPECT_EQ(C.extents, S.extents);
  EXPECT_EQ(C.values, S.values);
  EXPECT_EQ(C.metadata, S.metadata);
  auto dir = scratch("mult");
  fs::create_directories(dir);
  write_multiplier_binary(S, dir / "m.bin");
  auto Bn = read_multiplier_binary(dir / "m.bin");
  EXPECT_EQ(Bn.values, S.values);
  EXPECT_EQ(Bn.metadata, S.metadata);
  EXPECT_THROW(multiplier_from_csv("nonsense\n"), InvalidArgument);
}

TEST(Registry, NamesAndDefaults) {
  std::vector<std::string> names;
  for (auto& e : experiments()) names.push_back(e.name);
  EXPECT_EQ(names, (std::vector<std::string>{"decompose-check", "gauss-scan", "weyl-scan", "prop0-check", "vdc-check",
                                             "partition-check", "iw-norm-scan", "sqfn-scan", "minor-arc-scan",
                                             "l2decay-scan", "lp-scan", "apply"}));
  for (auto& e : experiments()) {
    EXPECT_FALSE(e.help.empty());
    for (auto& p : e.params) EXPECT_FALSE(p.help.empty()) << e.name << " " << p.name;
  }
  EXPECT_THROW(find_experiment("nope"), InvalidArgument);
}

TEST(Schema, ResolveAndValidate) {
  const auto& E = find_experiment("lp-scan");
  auto r = resolve_params(E, {{"nmax", 8.0}, {"ps", {2}}});
  EXPECT_EQ(r["nmax"], 8);
  EXPECT_TRUE(r["nmax"].is_number_integer());
  EXPECT_TRUE(r["ps"][0].is_number_float());
  EXPECT_EQ(r["threshold"], 0.05);
  EXPECT_THROW(resolve_params(E, {{"bogus", 1}}), InvalidArgument);
  EXPECT_THROW(resolve_params(E, {{"nmax", 8.5}}), InvalidArgument);
  EXPECT_THROW(resolve_params(E, {{"nmax", "8"}}), InvalidArgument);
  EXPECT_THROW(resolve_params(E, {{"ps", json::array()}}), InvalidArgument);
  EXPECT_THROW(resolve_params(E, {{"gamma", {1.5}}}), InvalidArgument);
  EXPECT_THROW(resolve_params(E, {{"kernel", 3}}), InvalidArgument);
  EXPECT_THROW(resolve_params(find_experiment("gauss-scan"), {{"primes_only", 1}}), InvalidArgument);
}

TEST(Schema, CommandLineText) {
  const auto& E = find_experiment("lp-scan");
  EXPECT_EQ(parse_param_text(E, "ps", "1.5,2"), json({1.5, 2}));
  EXPECT_EQ(parse_param_text(E, "ps", "[3, 4]"), json({3, 4}));
  EXPECT_EQ(parse_param_text(E, "nmax", "7"), json(7));
  EXPECT_EQ(parse_param_text(E, "kernel", "1/y"), json("1/y"));
  EXPECT_THROW(parse_param_text(E, "ps", "[3,"), InvalidArgument);
  EXPECT_THROW(parse_param_text(E, "bogus", "1"), InvalidArgument);
  EXPECT_THROW(resolve_params(E, {{"nmax", parse_param_text(E, "nmax", "seven")}}), InvalidArgument);
}

TEST(Schema, SpecJson) {
  auto s = ExperimentSpec::from_json({{"name", "apply"}, {"params", {{"n", 3}}}, {"seed", 4}, {"out", "x"}});
  EXPECT_EQ(s.name, "apply");
  EXPECT_EQ(s.seed, 4);
  auto back = ExperimentSpec::from_json(s.to_json());
  EXPECT_EQ(back.params, s.params);
  EXPECT_THROW(ExperimentSpec::from_json({{"name", "apply"}, {"extra", 1}}), InvalidArgument);
  EXPECT_THROW(ExperimentSpec::from_json({{"params", json::object()}}), InvalidArgument);
  EXPECT_THROW(ExperimentSpec::from_json({{"name", "apply"}, {"seed", "1"}}), InvalidArgument);
}

TEST(Experiments, ErrorsCarryModuleMessages) {
  try {
    run("decompose-check", {{"kernel", "nope"}});
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("unknown kernel"), std::string::npos);
  }
  EXPECT_THROW(run("apply", {{"op", "MN"}, {"N", 2000000000}, {"gamma", {1}}}), GuardError);
}

TEST(Experiments, DecomposeCheckExample) {
  auto dir = scratch("decompose");
  auto R = run("decompose-check", {{"kernel", "1/y"}, {"nmax", 12}, {"samples", 400}}, dir);
  EXPECT_TRUE(R.pass);
  auto csv = slurp(dir / "decompose-check_pieces.csv");
  std::istringstream in(csv);
  std::string echo, header;
  std::getline(in, echo);
  std::getline(in, header);
  EXPECT_EQ(echo.rfind("# spec: {", 0), 0u);
  EXPECT_NE(echo.find("\"kernel\":\"1/y\""), std::string::npos);
  EXPECT_EQ(header, "n,support_lo,support_hi,integral,integral_error,bound,support_exact");
  EXPECT_EQ(R.tables[0].rows.size(), 12u);
  auto summary = json::parse(slurp(dir / "decompose-check_summary.json"));
  EXPECT_EQ(summary["pass"], true);
}

TEST(Experiments, PartitionCheckExample) {
  auto R = run("partition-check", {{"N", 16}, {"ks", {2}}, {"seeds", 1}, {"qcap", 20}, {"Ns", {8, 16}}}, {}, 7);
  EXPECT_TRUE(R.pass);
  ASSERT_EQ(R.tables[0].rows.size(), 1u);
  EXPECT_EQ(std::get<int64_t>(R.tables[0].rows[0][1]), 7);
  EXPECT_TRUE(R.summary["mean_retries"].contains("2"));
}

TEST(Experiments, LpScanExample) {
  auto R = run("lp-scan", {{"ps", {2}}, {"nmax", 12}, {"cross_cases", 5}, {"cross_nmax", 4}});
  EXPECT_TRUE(R.pass);
  auto& T = R.tables[0];
  EXPECT_EQ(T.columns, (std::vector<std::string>{"function", "p", "N", "ratio"}));
  EXPECT_EQ(T.rows.size(), 4u * 3u);
  EXPECT_LT(R.summary["cross_check_max_error"].get<double>(), 1e-8);
  EXPECT_TRUE(R.summary.contains("pass_plateau"));
}

TEST(Experiments, WeylScanReportsSpotValue) {
  auto R = run("weyl-scan", {{"Ns", {64, 128, 256}}});
  EXPECT_EQ(R.summary["spot_value"], json({2.0, 2.0}));
}

TEST(Experiments, ApplyMatchesLibrary) {
  auto dir = scratch("apply");
  auto R = run("apply", {{"op", "Tn"}, {"n", 3}, {"input", "delta"}, {"method", "direct"}}, dir);
  EXPECT_TRUE(R.pass);
  auto g = LatticeFunction::from_json(json::parse(slurp(dir / "output.json")));
  DyadicDecomposition D(kernel_hilbert(), 3);
  auto G = gamma_1d({1, 2});
  LatticeFunction delta(2);
  delta.set({0, 0}, 1.0);
  EXPECT_EQ(g, apply_Tn_direct(delta, D.piece(3), G));

  auto fourier = run("apply", {{"op", "Tn"}, {"n", 3}, {"input", "delta"}, {"format", "box"}}, dir);
  auto box = LatticeFunction::from_dense(read_box((dir / "output.box").string()));
  for (auto& [x, v] : g.entries()) EXPECT_LT(std::abs(box.get(x) - v), 1e-12);

  run("apply", {{"op", "multiplier"}, {"n", 3}, {"B", 16}, {"format", "csv"}}, dir);
  auto S = multiplier_from_csv(slurp(dir / "multiplier.csv"));
  EXPECT_EQ(S.values, multiplier_mn_grid(D.piece(3), G, 16).values);
  EXPECT_THROW(run("apply", {{"op", "nope"}}), InvalidArgument);
  EXPECT_THROW(run("apply", {{"input", "missing.json"}}), InvalidArgument);
}

TEST(Reproducibility, ByteIdenticalArtifacts) {
  std::vector<std::pair<std::string, json>> specs = {
      {"decompose-check", {{"nmax", 6}, {"split", 3}, {"samples", 200}}},
      {"lp-scan", {{"nmax", 5}, {"plateau_from", 3}, {"cross_cases", 4}, {"cross_nmax", 3}}},
      {"partition-check", {{"N", 8}, {"seeds", 2}, {"qcap", 20}, {"Ns", {8, 16}}}},
      {"minor-arc-scan", {{"n_lo", 4}, {"n_hi", 6}, {"extents", {64, 128}}}},
  };
  for (auto& [name, params] : specs) {
    auto a = scratch(name + "_a"), b = scratch(name + "_b");
    run(name, params, a, 11);
    run(name, params, b, 11);
    auto fa = files_of(a), fb = files_of(b);
    EXPECT_FALSE(fa.empty());
    EXPECT_EQ(fa, fb) << name;
  }
}

TEST(Reproducibility, SeedChangesRandomInputsOnly) {
  auto a = run("lp-scan", {{"nmax", 4}, {"plateau_from", 3}, {"cross_cases", 2}, {"cross_nmax", 2}}, {}, 1);
  auto b = run("lp-scan", {{"nmax", 4}, {"plateau_from", 3}, {"cross_cases", 2}, {"cross_nmax", 2}}, {}, 2);
  auto ra = a.tables[0].column("ratio"), rb = b.tables[0].column("ratio");
  ASSERT_EQ(ra.size(), rb.size());
  bool differ = false;
  for (size_t i = 0; i < ra.size(); ++i) {
    auto fn = std::get<std::string>(a.tables[0].rows[i][0]);
    if (fn == "noise32") differ |= ra[i] != rb[i];
    else EXPECT_EQ(ra[i], rb[i]) << fn;
  }
  EXPECT_TRUE(differ);
}
