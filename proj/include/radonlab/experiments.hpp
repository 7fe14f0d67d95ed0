#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arithmetic.hpp"
#include "errors.hpp"
#include "expsums.hpp"
#include "fit.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "lattice.hpp"
#include "multipliers.hpp"
#include "operators.hpp"
#include "scans.hpp"

namespace radonlab {

using json = nlohmann::json;

struct ExperimentSpec {
  std::string name;
  json params = json::object();
  int64_t seed = 1;
  std::string out_dir;

  json to_json() const { return {{"name", name}, {"params", params}, {"seed", seed}, {"out", out_dir}}; }
  static ExperimentSpec from_json(const json& j) {
    require(j.is_object(), "spec: expected a JSON object");
    for (auto& [k, v] : j.items())
      require(k == "name" || k == "params" || k == "seed" || k == "out", "spec: unknown key '" + k + "'");
    ExperimentSpec s;
    require(j.contains("name") && j["name"].is_string(), "spec: 'name' must be a string");
    s.name = j["name"];
    if (j.contains("params")) {
      require(j["params"].is_object(), "spec: 'params' must be an object");
      s.params = j["params"];
    }
    if (j.contains("seed")) {
      require(j["seed"].is_number_integer(), "spec: 'seed' must be an integer");
      s.seed = j["seed"];
    }
    if (j.contains("out")) {
      require(j["out"].is_string(), "spec: 'out' must be a string");
      s.out_dir = j["out"];
    }
    return s;
  }
};

struct Report {
  bool pass = false;
  json summary = json::object();
  std::vector<CsvTable> tables;
  std::vector<std::pair<std::string, std::string>> plots;  // file stem, svg text
  std::vector<std::pair<std::string, std::function<void(const std::filesystem::path&)>>> files;
};

struct ParamSpec {
  std::string name;
  json value;  // default; its JSON type is the parameter's type
  std::string help;
};

// Resolved parameters with typed access.
class Params {
 public:
  Params(json j, int64_t seed, std::string out) : j_(std::move(j)), seed_(seed), out_(std::move(out)) {}
  int64_t seed() const { return seed_; }
  const std::string& out_dir() const { return out_; }
  const json& raw() const { return j_; }
  int i(const std::string& k) const { return j_.at(k).get<int>(); }
  int64_t i64(const std::string& k) const { return j_.at(k).get<int64_t>(); }
  double d(const std::string& k) const { return j_.at(k).get<double>(); }
  bool b(const std::string& k) const { return j_.at(k).get<bool>(); }
  std::string s(const std::string& k) const { return j_.at(k).get<std::string>(); }
  std::vector<int> ivec(const std::string& k) const { return j_.at(k).get<std::vector<int>>(); }
  std::vector<double> dvec(const std::string& k) const { return j_.at(k).get<std::vector<double>>(); }

 private:
  json j_;
  int64_t seed_;
  std::string out_;
};

struct Experiment {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
  std::function<Report(const Params&)> run;
};

namespace detail {

enum class PType { Int, Float, Bool, String, IntList, FloatList };

inline PType param_type(const json& v) {
  if (v.is_boolean()) return PType::Bool;
  if (v.is_number_integer()) return PType::Int;
  if (v.is_number()) return PType::Float;
  if (v.is_string()) return PType::String;
  if (v.is_array() && !v.empty() && v[0].is_number_integer()) return PType::IntList;
  return PType::FloatList;
}

inline const char* type_name(PType t) {
  switch (t) {
    case PType::Int: return "int";
    case PType::Float: return "number";
    case PType::Bool: return "bool";
    case PType::String: return "string";
    case PType::IntList: return "int list";
    default: return "number list";
  }
}

inline bool integral(const json& v) {
  return v.is_number_integer() || (v.is_number_float() && std::isfinite(v.get<double>()) && std::floor(v.get<double>()) == v.get<double>());
}

// Coerce v to the parameter's type or throw.
inline json coerce(const ParamSpec& P, const json& v) {
  auto bad = [&] {
    return InvalidArgument("parameter '" + P.name + "' expects " + type_name(param_type(P.value)) + ", got " + v.dump());
  };
  switch (param_type(P.value)) {
    case PType::Bool:
      if (!v.is_boolean()) throw bad();
      return v;
    case PType::Int:
      if (!integral(v)) throw bad();
      return v.get<int64_t>();
    case PType::Float:
      if (!v.is_number()) throw bad();
      return v.get<double>();
    case PType::String:
      if (!v.is_string()) throw bad();
      return v;
    case PType::IntList: {
      if (!v.is_array() || v.empty()) throw bad();
      json out = json::array();
      for (auto& e : v) {
        if (!integral(e)) throw bad();
        out.push_back(e.get<int64_t>());
      }
      return out;
    }
    default: {
      if (!v.is_array() || v.empty()) throw bad();
      json out = json::array();
      for (auto& e : v) {
        if (!e.is_number()) throw bad();
        out.push_back(e.get<double>());
      }
      return out;
    }
  }
}

inline json parse_scalar(const std::string& t) {
  if (t == "true") return true;
  if (t == "false") return false;
  size_t pos = 0;
  try {
    long long v = std::stoll(t, &pos);
    if (pos == t.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    double v = std::stod(t, &pos);
    if (pos == t.size()) return v;
  } catch (const std::exception&) {
  }
  return t;
}

inline MultiIndexSet gamma_for(const CZKernel& K, const std::vector<int>& degrees) {
  if (K.k == 1) return gamma_1d(degrees);
  return gamma_set(K.k, *std::max_element(degrees.begin(), degrees.end()));
}

inline bool non_increasing(const std::vector<double>& v, double rel_tol) {
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] * (1 + rel_tol)) return false;
  return true;
}

inline json fit_pair(const std::vector<double>& N, const std::vector<double>& y) {
  auto lg = fit_log_growth(N, y);
  auto pw = fit_power_law(N, y);
  // best power law with exponent >= 0: a nonpositive optimum clamps to the constant model, r^2 = 0
  double pw_r2 = pw.slope > 0 ? pw.r2 : 0.0;
  return {{"log_growth", lg.to_json()},
          {"power_law", pw.to_json()},
          {"power_law_r2_positive_exponent", pw_r2},
          {"log_like", lg.r2 >= pw_r2}};
}

// ---- decompose-check ----

inline Report run_decompose(const Params& P) {
  auto K = make_kernel(P.s("kernel"));
  const int nmax = P.i("nmax"), split = P.i("split"), samples = P.i("samples");
  require(split >= 1 && split < nmax, "decompose-check: need 1 <= split < nmax");
  require(nmax >= 3, "decompose-check: nmax must be >= 3");
  DyadicDecomposition D(K, nmax);
  const int k = K.k;
  std::vector<std::vector<double>> dirs;
  if (k == 1) dirs = {{1.0}, {-1.0}};
  else
    for (int a = 0; a < 8; ++a) dirs.push_back({std::cos(0.4 + a * M_PI / 4), std::sin(0.4 + a * M_PI / 4)});

  // the cutoffs sum to one on 1 <= |x| <= 2^{nmax-2}
  double recon = 0;
  const double top = nmax - 2;
  for (int i = 0; i <= samples; ++i) {
    double r = std::exp2(top * i / samples);
    for (auto& u : dirs) {
      std::vector<double> x(k);
      for (int c = 0; c < k; ++c) x[c] = r * u[c];
      recon = std::max(recon, std::abs(D.partial_sum(x.data(), nmax) - K(x.data())));
    }
  }

  Report R;
  CsvTable T{"pieces", {"n", "support_lo", "support_hi", "integral", "integral_error", "bound", "support_exact"}, {}};
  bool support_ok = true;
  double max_int = 0;
  for (auto& p : D.pieces()) {
    bool ok = true;
    for (auto& u : dirs)
      for (double r : {std::nextafter(p.support_lo(), 0.0), 0.5 * p.support_lo(), std::nextafter(p.support_hi(), INFINITY),
                       1.5 * p.support_hi()}) {
        std::vector<double> x(k);
        for (int c = 0; c < k; ++c) x[c] = r * u[c];
        ok &= p(x.data()) == 0.0;
      }
    support_ok &= ok;
    auto q = piece_integral(p);
    max_int = std::max(max_int, std::abs(q.value));
    T.add({int64_t(p.n()), p.support_lo(), p.support_hi(), q.value, q.error, piece_uniform_bound({p}), int64_t(ok)});
  }
  auto all = D.pieces();
  double c_split = piece_uniform_bound({all.begin(), all.begin() + split}), c_all = piece_uniform_bound(all);
  double drift = c_split > 0 ? std::abs(c_all - c_split) / c_split : 0.0;

  bool pass_recon = recon <= P.d("recon_tol"), pass_int = max_int <= P.d("integral_tol"),
       pass_stable = drift <= P.d("stable_tol");
  R.pass = pass_recon && pass_int && support_ok && pass_stable;
  R.summary = {{"reconstruction_error", recon}, {"max_abs_integral", max_int}, {"support_exact", support_ok},
               {"bound_first_pieces", c_split}, {"bound_all_pieces", c_all}, {"bound_drift", drift},
               {"pass_reconstruction", pass_recon}, {"pass_integral", pass_int}, {"pass_stable", pass_stable}};
  R.plots.push_back({"decompose_integrals", render_svg("|integral of K_n|", "n", "|integral|",
                                                       {{"integral", T.column("n"), [&] {
                                                           auto v = T.column("integral");
                                                           for (auto& x : v) x = std::abs(x);
                                                           return v;
                                                         }()}},
                                                       false, true)});
  R.tables.push_back(std::move(T));
  return R;
}

// ---- gauss-scan ----

inline Report run_gauss(const Params& P) {
  auto degrees = P.ivec("gamma");
  auto G = gamma_1d(degrees);
  auto rows = gauss_decay_scan(G, static_cast<uint64_t>(P.i64("qmax")), P.b("primes_only"));
  Report R;
  CsvTable T{"maxima", {"q", "max_abs", "q_pow_minus_half"}, {}};
  std::vector<double> x, y;
  for (auto& r : rows) {
    T.add({int64_t(r.q), r.max_abs, 1 / std::sqrt(static_cast<double>(r.q))});
    if (r.q >= 2) x.push_back(static_cast<double>(r.q)), y.push_back(r.max_abs);
  }
  auto fit = fit_power_law(x, y);
  bool pass_fit = fit.slope <= P.d("max_slope");

  // exact modulus of the quadratic sum at odd primes
  json spot = nullptr;
  bool pass_spot = true;
  if (degrees == std::vector<int>{1, 2}) {
    double worst = 0;
    for (auto q : primes_up_to(static_cast<uint64_t>(P.i64("spot_qmax")))) {
      if (q == 2) continue;
      worst = std::max(worst, std::abs(std::abs(gauss_sum({0, 1}, q, G)) - 1 / std::sqrt(static_cast<double>(q))));
    }
    pass_spot = worst <= P.d("spot_tol");
    spot = {{"max_deviation", worst}, {"pass", pass_spot}};
  }
  R.pass = pass_fit && pass_spot;
  R.summary = {{"fit", fit.to_json()}, {"pass_fit", pass_fit}, {"spot_check", spot}};
  R.plots.push_back({"gauss_maxima", render_svg("max |G(a/q)|", "q", "max", {{"max |G|", x, y}}, true, true)});
  R.tables.push_back(std::move(T));
  return R;
}

// ---- weyl-scan ----

inline Report run_weyl(const Params& P) {
  std::vector<int64_t> Ns;
  for (int N : P.ivec("Ns")) Ns.push_back(N);
  auto rows = weyl_decay_scan(P.d("xi"), P.i("gamma0"), Ns, P.d("beta"));
  WeylSumSpec S;
  S.lo = {1};
  S.hi = {4};
  S.coeffs = {{{2}, 0.25}};
  cplx spot = weyl_sum(S);
  bool pass_spot = std::abs(spot - cplx(2, 2)) <= 1e-14;
  Report R;
  CsvTable T{"scan", {"N", "normalized", "q", "in_window"}, {}};
  std::vector<double> x, y;
  for (auto& r : rows) {
    T.add({r.N, r.normalized, int64_t(r.q), int64_t(r.in_window)});
    x.push_back(static_cast<double>(r.N));
    y.push_back(r.normalized);
  }
  bool mono = non_increasing(y, 0.0);
  R.pass = pass_spot && mono;
  R.summary = {{"spot_value", {spot.real(), spot.imag()}}, {"pass_spot", pass_spot}, {"monotone", mono}};
  R.plots.push_back({"weyl_scan", render_svg("|S_N|/N", "N", "|S_N|/N", {{"normalized", x, y}}, true, true)});
  R.tables.push_back(std::move(T));
  return R;
}

// ---- prop0-check ----

inline Report run_prop0(const Params& P) {
  auto K = make_kernel(P.s("kernel"));
  auto G = gamma_for(K, P.ivec("gamma"));
  const int n_lo = P.i("n_lo"), n_hi = P.i("n_hi");
  require(1 <= n_lo && n_lo <= n_hi, "prop0-check: need 1 <= n_lo <= n_hi");
  DyadicDecomposition D(K, n_hi);
  Report R;
  CsvTable T{"ratios", {"q", "n", "max_ratio", "max_error"}, {}};
  std::vector<Series> plot;
  bool pass = true;
  json per_q = json::array();
  for (int q : P.ivec("qs")) {
    require(q >= 1, "prop0-check: q must be >= 1");
    std::vector<int64_t> a(G.d(), q == 1 ? 0 : 1);
    Series s{"q=" + std::to_string(q), {}, {}};
    for (int n = n_lo; n <= n_hi; ++n) {
      auto p = D.piece(n);
      MultiplierEvaluator M(p, G);
      auto r = prop0_error(M, p, G, a, static_cast<uint64_t>(q), std::ldexp(1.0, n), P.d("L2"), P.d("L3"), P.i("samples"),
                           static_cast<uint64_t>(P.seed()));
      T.add({int64_t(q), int64_t(n), r.max_ratio, r.max_error});
      s.x.push_back(n);
      s.y.push_back(r.max_ratio);
    }
    double worst = *std::max_element(s.y.begin(), s.y.end());
    bool ok = worst <= P.d("growth") * s.y.front();
    pass &= ok;
    per_q.push_back({{"q", q}, {"first_ratio", s.y.front()}, {"max_ratio", worst}, {"pass", ok}});
    plot.push_back(std::move(s));
  }
  R.pass = pass;
  R.summary = {{"per_q", per_q}};
  R.plots.push_back({"prop0_ratios", render_svg("major-arc error ratio", "n", "ratio", plot, false, true)});
  R.tables.push_back(std::move(T));
  return R;
}

// ---- vdc-check ----

inline Report run_vdc(const Params& P) {
  auto K = make_kernel(P.s("kernel"));
  auto G = gamma_for(K, P.ivec("gamma"));
  const int n_lo = P.i("n_lo"), n_hi = P.i("n_hi");
  require(1 <= n_lo && n_lo <= n_hi, "vdc-check: need 1 <= n_lo <= n_hi");
  auto v = P.dvec("v");
  require(static_cast<int>(v.size()) == G.d(), "vdc-check: v must have " + std::to_string(G.d()) + " entries");
  DyadicDecomposition D(K, n_hi);
  std::vector<DyadicPiece> ps;
  for (int n = n_lo; n <= n_hi; ++n) ps.push_back(D.piece(n));
  auto rep = vdc_check(ps, G, v, P.d("s_min"), P.d("s_max"), P.i("per_octave"), P.d("tol"));
  Report R;
  CsvTable T{"constants", {"n", "C_small", "C_large"}, {}};
  for (auto& r : rep.rows) T.add({int64_t(r.n), r.C_small, r.C_large});
  R.pass = rep.pass;
  R.summary = {{"stable_small", rep.stable_small}, {"stable_large", rep.stable_large}};
  R.plots.push_back({"vdc_constants", render_svg("envelope constants", "n", "C",
                                                 {{"C_small", T.column("n"), T.column("C_small")},
                                                  {"C_large", T.column("n"), T.column("C_large")}})});
  R.tables.push_back(std::move(T));
  return R;
}

// ---- partition-check ----

inline Report run_partition(const Params& P) {
  const int N = P.i("N"), nseeds = P.i("seeds");
  const double rho = P.d("rho");
  require(nseeds >= 1, "partition-check: seeds must be >= 1");
  auto G = gamma_1d(P.ivec("gamma"));
  auto qcap = static_cast<uint64_t>(P.i64("qcap"));
  Report R;

  CsvTable Tr{"retries", {"k", "seed", "retries", "shatters"}, {}};
  bool pass_retries = true, pass_shatter = true;
  json retries = json::object();
  for (int k : P.ivec("ks")) {
    double total = 0;
    for (int s = 0; s < nseeds; ++s) {
      auto F = partition_family(N, k, P.seed() + s);
      bool ok = shatter_verify(F);
      pass_shatter &= ok;
      total += F.retries;
      Tr.add({int64_t(k), P.seed() + s, int64_t(F.retries), int64_t(ok)});
    }
    retries[std::to_string(k)] = total / nseeds;
    pass_retries &= total / nseeds <= P.d("max_mean_retries");
  }

  CsvTable Tc{"classes", {"seed", "classes", "fractions", "disjoint", "union_exact", "o_property_capped", "o_property_full"}, {}};
  auto U = build_UN(N, rho, G, qcap);
  std::set<RationalPoint> target(U.points.begin(), U.points.end());
  bool pass_classes = true;
  for (int s = 0; s < nseeds; ++s) {
    int64_t seed = P.seed() + s;
    auto classes = partition_UN(N, rho, G, seed, qcap);
    std::set<RationalPoint> all;
    size_t count = 0;
    for (auto& F : classes)
      for (auto& p : F.points) all.insert(p), ++count;
    bool disjoint = count == all.size(), exact = all == target;
    auto o_ok = [](const IwPartition& part) {
      for (auto& C : part.classes)
        if (!o_property_verify(C.Lambda, C.witness, &part.params.large_primes).ok) return false;
      return true;
    };
    bool o_capped = o_ok(partition_PN(N, rho, seed, qcap)), o_full = o_ok(partition_PN(N, rho, seed));
    pass_classes &= disjoint && exact && o_capped && o_full;
    Tc.add({seed, int64_t(classes.size()), int64_t(count), int64_t(disjoint), int64_t(exact), int64_t(o_capped),
            int64_t(o_full)});
  }

  auto Ns = P.ivec("Ns");
  int D = 0, m_max = 0;
  std::vector<std::pair<int, size_t>> counts;
  for (int n : Ns) {
    auto part = partition_PN(n, rho, P.seed());
    D = std::max(D, part.params.D);
    m_max = std::max(m_max, static_cast<int>(part.params.large_primes.size()));
    counts.push_back({n, part.classes.size()});
  }
  double C = IwPartition::construction_constant(D, m_max, *std::min_element(Ns.begin(), Ns.end()));
  CsvTable Tg{"growth", {"N", "classes", "classes_over_logN", "C_logN"}, {}};
  bool pass_growth = true;
  for (auto [n, c] : counts) {
    double bound = C * std::log(static_cast<double>(n));
    pass_growth &= static_cast<double>(c) <= bound;
    Tg.add({int64_t(n), int64_t(c), c / std::log(static_cast<double>(n)), bound});
  }

  R.pass = pass_retries && pass_shatter && pass_classes && pass_growth;
  R.summary = {{"mean_retries", retries}, {"pass_retries", pass_retries}, {"pass_shatter", pass_shatter},
               {"UN_size", U.size()},     {"pass_classes", pass_classes}, {"construction_constant", C},
               {"pass_growth", pass_growth}};
  R.tables.push_back(std::move(Tr));
  R.tables.push_back(std::move(Tc));
  R.tables.push_back(std::move(Tg));
  return R;
}

// ---- sqfn-scan / iw-norm-scan ----

struct ArcScanSetup {
  MultiIndexSet G;
  std::vector<int> Ns;
  std::vector<double> ps;
  int B = 0;
};

inline ArcScanSetup arc_scan_setup(const Params& P) {
  ArcScanSetup S{gamma_1d(P.ivec("gamma")), P.ivec("Ns"), P.dvec("ps"), P.i("B")};
  require(S.G.d() == 1, "arc scans run on one-dimensional Gamma");
  require(S.Ns.size() >= 3, "need at least three values of N");
  return S;
}

inline uint64_t growth_qcap(int N, double rho) {
  double c = std::floor(std::exp(std::pow(static_cast<double>(N), rho)));
  guard(c <= 1e6, "q-cap e^{N^rho} exceeds 10^6");
  return static_cast<uint64_t>(c);
}

// f with f^ = Delta_N on the grid: the function best adapted to the arcs
inline LatticeFunction arc_adapted(const SampledMultiplier& Delta) {
  auto v = Delta.values;
  inverse_dft_inplace(v, Delta.extents);
  LatticeFunction f(1);
  for (size_t i = 0; i < v.size(); ++i) f.set({static_cast<int64_t>(i)}, v[i]);
  return f;
}

// For each N and p, the max over the test set and the arc-adapted function of `ratio`.
inline Report arc_scan(const Params& P, const std::string& what,
                       const std::function<double(const LatticeFunction&, int, const FractionSet&, const ArcScaling&,
                                                  const SampledMultiplier&, double)>& ratio,
                       const std::function<void(const LatticeFunction&, int, const FractionSet&, const ArcScaling&)>& extra =
                           nullptr) {
  auto S = arc_scan_setup(P);
  const double rho = P.d("rho");
  auto tests = standard_test_set(S.G, static_cast<uint64_t>(P.seed()));
  auto eta = build_eta(1);
  Report R;
  CsvTable T{"ratios", {"N", "p", "function", "ratio"}, {}};
  std::map<double, Series> best;
  CsvTable Ta{"arcs", {"N", "qcap", "arcs", "epsilon", "disjoint"}, {}};
  for (int N : S.Ns) {
    auto qcap = growth_qcap(N, rho);
    auto F = build_UN(N, rho, S.G, qcap);
    auto E = arc_scaling_growth(N, rho, S.G);
    Ta.add({int64_t(N), int64_t(qcap), int64_t(F.size()), E.epsilons()[0], int64_t(support_disjointness_check(F, E, *eta))});
    auto Delta = assemble_arc_multiplier([](const double*) { return cplx(1, 0); }, F, E, *eta, std::vector<int>{S.B});
    std::vector<TestFunction> fs = tests;
    fs.push_back({"arc_adapted", arc_adapted(Delta)});
    if (extra)
      for (auto& t : fs) extra(t.f, N, F, E);
    for (double p : S.ps) {
      double mx = 0;
      for (auto& t : fs) {
        double r = ratio(t.f, N, F, E, Delta, p);
        T.add({int64_t(N), p, t.name, r});
        mx = std::max(mx, r);
      }
      auto& s = best[p];
      s.label = "p=" + format_number(p);
      s.x.push_back(N);
      s.y.push_back(mx);
    }
  }
  CsvTable Tm{"max_ratio", {"p", "N", "max_ratio"}, {}};
  json fits = json::array();
  bool pass = true;
  std::vector<Series> plot;
  for (auto& [p, s] : best) {
    for (size_t i = 0; i < s.x.size(); ++i) Tm.add({p, int64_t(s.x[i]), s.y[i]});
    auto f = fit_pair(s.x, s.y);
    f["p"] = p;
    pass &= f["log_like"].get<bool>();
    fits.push_back(f);
    plot.push_back(s);
  }
  R.pass = pass;
  R.summary = {{"fits", fits}};
  R.plots.push_back({what, render_svg(what + ": max norm ratio", "N", "ratio", plot, true, false)});
  R.tables.push_back(std::move(T));
  R.tables.push_back(std::move(Tm));
  R.tables.push_back(std::move(Ta));
  return R;
}

inline Report run_sqfn(const Params& P) {
  const int nmax = P.i("nmax"), j = P.i("j");
  const double tol = P.d("parseval_tol");
  const int B = P.i("B");
  auto G = gamma_1d(P.ivec("gamma"));
  std::map<int, std::vector<SampledMultiplier>> families;
  auto family = [&](int N, const FractionSet& F, const ArcScaling& E) -> const std::vector<SampledMultiplier>& {
    auto& fam = families[N];
    if (fam.empty())
      for (int n = 0; n <= nmax; ++n) fam.push_back(omega_multiplier(F, E, n, j, G, {B}));
    return fam;
  };
  double worst_parseval = 0;
  auto extra = [&](const LatticeFunction& f, int N, const FractionSet& F, const ArcScaling& E) {
    auto& fam = family(N, F, E);
    double a = square_function_norm(f, fam, 2), b = square_function_norm_parseval(f, fam);
    worst_parseval = std::max(worst_parseval, std::abs(a - b) / std::max(b, 1e-300));
  };
  auto ratio = [&](const LatticeFunction& f, int N, const FractionSet& F, const ArcScaling& E, const SampledMultiplier&,
                   double p) { return square_function_norm(f, family(N, F, E), p) / lp_norm(f, p); };
  Report R = arc_scan(P, "sqfn", ratio, extra);
  bool pass_parseval = worst_parseval <= tol;
  R.summary["parseval_relative_error"] = worst_parseval;
  R.summary["pass_parseval"] = pass_parseval;
  R.summary["pass_log_growth"] = R.pass;
  R.pass = R.pass && pass_parseval;
  return R;
}

inline Report run_iw(const Params& P) {
  auto ratio = [&](const LatticeFunction& f, int, const FractionSet&, const ArcScaling&, const SampledMultiplier& Delta,
                   double p) { return lp_norm(apply_multiplier(f, Delta), p) / lp_norm(f, p); };
  return arc_scan(P, "iw_norm", ratio);
}

// ---- minor-arc-scan ----

inline ArcFamilyParams arc_params(const Params& P) {
  ArcFamilyParams A;
  A.chi = P.d("chi");
  A.l = P.i("l");
  A.rho = P.d("rho");
  A.qcap = static_cast<uint64_t>(P.i64("qcap"));
  return A;
}

inline Report run_minor(const Params& P) {
  auto K = make_kernel(P.s("kernel"));
  auto G = gamma_for(K, P.ivec("gamma"));
  auto ext = P.ivec("extents");
  require(static_cast<int>(ext.size()) == G.d(), "minor-arc-scan: extents must have " + std::to_string(G.d()) + " entries");
  auto rows = minor_arc_scan(K, G, P.i("n_lo"), P.i("n_hi"), ext, arc_params(P));
  Report R;
  CsvTable T{"scan", {"n", "max_off_arcs", "max_on_arcs", "on_points", "arcs", "argmax"}, {}};
  std::vector<double> x, y;
  for (auto& r : rows) {
    std::string arg;
    for (size_t i = 0; i < r.argmax.size(); ++i) arg += (i ? " " : "") + format_number(r.argmax[i]);
    T.add({int64_t(r.n), r.max_off, r.max_on, int64_t(r.on_points), int64_t(r.arcs), arg});
    x.push_back(r.n);
    y.push_back(r.max_off);
  }
  R.pass = non_increasing(y, P.d("rel_tol"));
  R.summary = {{"monotone", R.pass}};
  R.plots.push_back({"minor_arcs", render_svg("max |m_n| off major arcs", "n", "max", {{"off arcs", x, y}}, false, true)});
  R.tables.push_back(std::move(T));
  return R;
}

// ---- l2decay-scan ----

inline Report run_l2decay(const Params& P) {
  auto K = make_kernel(P.s("kernel"));
  auto G = gamma_for(K, P.ivec("gamma"));
  DecayConfig C;
  C.smax = P.i("smax");
  C.jmax = P.i("jmax");
  C.chi = P.d("chi");
  C.l = P.i("l");
  C.rho = P.d("rho");
  C.qcap = static_cast<uint64_t>(P.i64("qcap"));
  C.window = P.i("window");
  C.radii = P.i("radii");
  C.angles = P.i("angles");
  auto tab = l2_decay_table(K, G, C);
  const double tol = P.d("rel_tol");
  Report R;
  CsvTable T{"cells", {"s", "j", "n_lo", "n_hi", "D", "arcs", "disjoint"}, {}};
  for (auto& c : tab.cells) T.add({int64_t(c.s), int64_t(c.j), int64_t(c.n_lo), int64_t(c.n_hi), c.D, int64_t(c.arcs), int64_t(c.disjoint)});
  CsvTable V{"violations", {"direction", "s", "j", "from", "to"}, {}};
  auto check = [&](const std::string& dir, const DecayCell& a, const DecayCell& b) {
    if (b.D > a.D * (1 + tol)) V.add({dir, int64_t(b.s), int64_t(b.j), a.D, b.D});
  };
  for (int s = 0; s <= C.smax; ++s)
    for (int j = -C.jmax; j <= C.jmax; ++j) {
      if (s > 0) check("s", tab.at(s - 1, j), tab.at(s, j));
      if (j > 0) check("j", tab.at(s, j - 1), tab.at(s, j));
      if (j < 0) check("j", tab.at(s, j + 1), tab.at(s, j));
    }
  std::vector<Series> plot;
  for (int s = 0; s <= C.smax; ++s) {
    Series sr{"s=" + std::to_string(s), {}, {}};
    for (int j = -C.jmax; j <= C.jmax; ++j) sr.x.push_back(j), sr.y.push_back(tab.at(s, j).D);
    plot.push_back(sr);
  }
  R.pass = V.rows.empty();
  R.summary = {{"config", C.to_json()}, {"violations", V.rows.size()}};
  R.plots.push_back({"l2decay", render_svg("D(s, j)", "j", "D", plot, false, true)});
  R.tables.push_back(std::move(T));
  R.tables.push_back(std::move(V));
  return R;
}

// ---- lp-scan ----

inline Report run_lp(const Params& P) {
  auto K = make_kernel(P.s("kernel"));
  auto G = gamma_for(K, P.ivec("gamma"));
  const int nmax = P.i("nmax"), from = P.i("plateau_from");
  require(1 <= from && from < nmax, "lp-scan: need 1 <= plateau_from < nmax");
  DyadicDecomposition D(K, nmax);
  Report R;

  // direct against Fourier on random sparse inputs
  std::mt19937_64 rng(static_cast<uint64_t>(P.seed()));
  std::normal_distribution<double> gauss;
  double cross = 0;
  const int cases = P.i("cross_cases"), cross_nmax = std::min(P.i("cross_nmax"), nmax);
  for (int c = 0; c < cases; ++c) {
    int n = 1 + static_cast<int>(rng() % static_cast<uint64_t>(cross_nmax));
    LatticeFunction f(G.d());
    int pts = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < pts; ++i) {
      Point x(G.d());
      for (auto& v : x) v = static_cast<int64_t>(rng() % 32);
      f.set(x, {gauss(rng), gauss(rng)});
    }
    auto p = D.piece(n);
    auto a = apply_Tn_direct(f, p, G);
    auto b = apply_Tn_fourier_box(f, piece_lattice(p, G));
    // the direct result in the frame of the Fourier box
    std::vector<cplx> direct(b.size());
    const auto& ea = a.entries();
    for (auto& [x, v] : ea) {
      require(b.contains(x), "lp-scan: direct output outside the Fourier box");
      direct[b.index(x)] = v;
    }
    for (size_t i = 0; i < b.size(); ++i) cross = std::max(cross, std::abs(direct[i] - b.values[i]));
  }
  bool pass_cross = cross <= P.d("cross_tol");

  CsvTable T{"ratios", {"function", "p", "N", "ratio"}, {}};
  CsvTable Tp{"plateau", {"function", "p", "ratio_from", "ratio_to", "increment"}, {}};
  bool pass_plateau = true;
  double worst = 0;
  std::vector<Series> plot;
  std::vector<Translates> partial;
  for (int N = from; N <= nmax; ++N) partial.push_back(partial_sum_translates(D, G, N));
  for (auto& t : standard_test_set(G, static_cast<uint64_t>(P.seed()))) {
    auto F = t.f.to_dense();
    for (double p : P.dvec("ps")) {
      double base = lp_norm(F, p);
      Series s{t.name + " p=" + format_number(p), {}, {}};
      for (int N = from; N <= nmax; ++N) {
        double r = translates_lp_norm(F, partial[N - from], p) / base;
        T.add({t.name, p, int64_t(N), r});
        s.x.push_back(N);
        s.y.push_back(r);
      }
      double inc = std::abs(s.y.back() - s.y.front()) / s.y.front();
      worst = std::max(worst, inc);
      pass_plateau &= inc < P.d("threshold");
      Tp.add({t.name, p, s.y.front(), s.y.back(), inc});
      plot.push_back(std::move(s));
    }
  }
  R.pass = pass_cross && pass_plateau;
  R.summary = {{"cross_check_max_error", cross}, {"pass_cross_check", pass_cross},
               {"max_increment", worst},         {"pass_plateau", pass_plateau}};
  R.plots.push_back({"lp_ratios", render_svg("||T_N f||_p / ||f||_p", "N", "ratio", plot)});
  R.tables.push_back(std::move(T));
  R.tables.push_back(std::move(Tp));
  return R;
}

// ---- apply ----

inline LatticeFunction load_function(const std::string& input, const MultiIndexSet& G, uint64_t seed) {
  namespace fs = std::filesystem;
  if (input.ends_with(".json")) {
    std::ifstream in(input);
    require(static_cast<bool>(in), "apply: cannot open " + input);
    return LatticeFunction::from_json(json::parse(in));
  }
  if (input.ends_with(".box")) return LatticeFunction::from_dense(read_box(input));
  for (auto& t : standard_test_set(G, seed))
    if (t.name == input) return t.f;
  throw InvalidArgument("apply: input must be a .json or .box file or one of delta, noise32, box16, paraboloid");
}

inline Report run_apply(const Params& P) {
  auto K = make_kernel(P.s("kernel"));
  auto G = gamma_for(K, P.ivec("gamma"));
  const std::string op = P.s("op"), method = P.s("method"), format = P.s("format");
  require(method == "direct" || method == "fourier", "apply: method must be direct or fourier");
  Report R;
  if (op == "multiplier") {
    require(format == "csv" || format == "bin", "apply: multiplier format must be csv or bin");
    DyadicDecomposition D(K, P.i("n"));
    auto S = multiplier_mn_grid(D.piece(P.i("n")), G, P.i("B"));
    S.metadata = {{"n", P.i("n")}, {"kernel", K.name}, {"gamma", G.to_json()}};
    if (format == "csv") R.files.push_back({"multiplier.csv", [S](const std::filesystem::path& p) { write_text(p, multiplier_csv(S)); }});
    else R.files.push_back({"multiplier.bin", [S](const std::filesystem::path& p) { write_multiplier_binary(S, p); }});
    R.pass = true;
    R.summary = {{"op", op}, {"points", S.size()}, {"l2", lp_norm(S.values, 2) / std::sqrt(static_cast<double>(S.size()))}};
    return R;
  }
  require(format == "json" || format == "box", "apply: output format must be json or box");
  auto f = load_function(P.s("input"), G, static_cast<uint64_t>(P.seed()));
  require(f.d() == G.d(), "apply: input dimension does not match Gamma");
  LatticeFunction g(f.d());
  if (op == "Tn") {
    DyadicDecomposition D(K, P.i("n"));
    g = method == "direct" ? apply_Tn_direct(f, D.piece(P.i("n")), G) : apply_Tn_fourier(f, D.piece(P.i("n")), G);
  } else if (op == "T") {
    DyadicDecomposition D(K, P.i("n"));
    g = apply_T_partial(f, D, G, P.i("n"), method == "fourier");
  } else if (op == "MN") {
    g = apply_MN(f, P.i64("N"), G, P.b("symmetric"));
  } else {
    throw InvalidArgument("apply: op must be Tn, T, MN or multiplier");
  }
  CsvTable T{"norms", {"p", "input", "output"}, {}};
  for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()}) T.add({p, lp_norm(f, p), lp_norm(g, p)});
  if (format == "json") R.files.push_back({"output.json", [g](const std::filesystem::path& p) { write_text(p, g.to_json().dump() + "\n"); }});
  else R.files.push_back({"output.box", [g](const std::filesystem::path& p) { write_box(g.to_dense(), p.string()); }});
  R.pass = true;
  R.summary = {{"op", op}, {"input_support", f.support_size()}, {"output_support", g.support_size()}};
  R.tables.push_back(std::move(T));
  return R;
}

}  // namespace detail

inline const std::vector<Experiment>& experiments() {
  using namespace detail;
  static const std::vector<Experiment> all = {
      {"decompose-check",
       "Dyadic decomposition of a kernel: reconstruction, mean zero pieces, exact supports, stable uniform bound.",
       {{"kernel", "hilbert", "kernel name (hilbert, sign_over_abs, odd_square, log_osc, riesz2d, zero)"},
        {"nmax", 12, "number of dyadic pieces"},
        {"split", 6, "the uniform bound over pieces 1..split is compared to all pieces"},
        {"samples", 2000, "radial samples for the reconstruction check"},
        {"recon_tol", 1e-12, "max reconstruction error on 1 <= |x| <= 2^(nmax-2)"},
        {"integral_tol", 1e-8, "max |integral of K_n|"},
        {"stable_tol", 0.05, "max relative drift of the uniform bound"}},
       run_decompose},
      {"gauss-scan",
       "Complete exponential sums: max |G(a/q)| over reduced a, power-law decay fit in q.",
       {{"gamma", json::array({1, 2}), "monomial degrees of the one-variable map"},
        {"qmax", 500, "largest modulus"},
        {"primes_only", true, "scan prime moduli only"},
        {"max_slope", -0.45, "pass if the fitted slope is at most this"},
        {"spot_qmax", 199, "check |G((0,1)/q)| = q^(-1/2) for odd primes up to this (quadratic map only)"},
        {"spot_tol", 1e-10, "tolerance of the spot check"}},
       run_gauss},
      {"weyl-scan",
       "Weyl sums of xi n^gamma0 over [1, N]: |S_N|/N along N, plus the exact spot value of n^2/4 on [1, 4].",
       {{"xi", 0.6180339887498949, "frequency"},
        {"gamma0", 2, "degree of the phase"},
        {"Ns", json::array({64, 128, 256, 512, 1024, 2048, 4096}), "lengths"},
        {"beta", 1.0, "log power of the rational-approximation window"}},
       run_weyl},
      {"prop0-check",
       "Major-arc approximation m_n(a/q + t) ~ G(a/q) Phi_n(t): the scaled error stays bounded across n.",
       {{"kernel", "hilbert", "kernel name"},
        {"gamma", json::array({1, 2}), "monomial degrees"},
        {"n_lo", 8, "first scale"},
        {"n_hi", 14, "last scale"},
        {"qs", json::array({1, 2, 5}), "denominators"},
        {"samples", 24, "sampled offsets per scale"},
        {"L2", 1.0, "offset box parameter"},
        {"L3", 5.0, "denominator bound"},
        {"growth", 1.1, "allowed growth of the ratio over its first value"}},
       run_prop0},
      {"vdc-check",
       "Van der Corput envelope of Phi_n along an anisotropic ray: the constants are stable in n.",
       {{"kernel", "hilbert", "kernel name"},
        {"gamma", json::array({1, 2}), "monomial degrees"},
        {"n_lo", 2, "first scale"},
        {"n_hi", 10, "last scale"},
        {"v", json::array({1.0, 1.0}), "ray direction"},
        {"s_min", 1.0 / 64, "smallest ray parameter"},
        {"s_max", 32.0, "largest ray parameter"},
        {"per_octave", 4, "samples per octave"},
        {"tol", 0.2, "allowed relative spread of the constants"}},
       run_vdc},
      {"partition-check",
       "Logarithmic partition of the rational set: shattering families, disjoint classes with the O property, class count.",
       {{"N", 16, "size parameter"},
        {"ks", json::array({2, 3}), "family sizes for the shattering check"},
        {"seeds", 10, "number of seeds (seed, seed+1, ...)"},
        {"max_mean_retries", 2.0, "pass if the mean retry count is at most this"},
        {"rho", 0.5, "exponent of the rational set"},
        {"gamma", json::array({1, 2}), "monomial degrees"},
        {"qcap", 60, "denominator cap for the fraction-level check"},
        {"Ns", json::array({8, 16, 32}), "sizes for the class-count bound"}},
       run_partition},
      {"iw-norm-scan",
       "||F^-1(Delta_N f^)||_p / ||f||_p over N: log-growth fit against the best positive power law.",
       {{"gamma", json::array({1}), "monomial degrees (one variable)"},
        {"rho", 0.25, "exponent of the rational set"},
        {"B", 131072, "grid size"},
        {"Ns", json::array({4, 8, 16, 32}), "sizes"},
        {"ps", json::array({2.0, 3.0}), "exponents"}},
       run_iw},
      {"sqfn-scan",
       "Square function of the arc-localized dyadic pieces: Parseval check and log-growth fit of the norm ratio.",
       {{"gamma", json::array({1}), "monomial degrees (one variable)"},
        {"rho", 0.25, "exponent of the rational set"},
        {"B", 131072, "grid size"},
        {"nmax", 16, "dyadic scales 0..nmax"},
        {"j", 0, "scale shift"},
        {"Ns", json::array({4, 8, 16, 32}), "sizes"},
        {"ps", json::array({2.0, 3.0}), "exponents"},
        {"parseval_tol", 1e-10, "relative tolerance of the p = 2 Parseval check"}},
       run_sqfn},
      {"minor-arc-scan",
       "max |m_n| on grid points off the major arcs, for consecutive n.",
       {{"kernel", "hilbert", "kernel name"},
        {"gamma", json::array({1, 2}), "monomial degrees"},
        {"n_lo", 6, "first scale"},
        {"n_hi", 12, "last scale"},
        {"chi", 0.5, "arc width exponent"},
        {"l", 1, "arc set index power"},
        {"rho", 0.1, "exponent of the rational set"},
        {"qcap", 16, "denominator cap"},
        {"extents", json::array({1024, 4096}), "grid extents"},
        {"rel_tol", 1e-12, "relative tolerance of the monotonicity check"}},
       run_minor},
      {"l2decay-scan",
       "D(s, j): max over ring neighbourhoods of the arcs of sum_n |m_n|^2 Delta^2, for shells s and shifts j.",
       {{"kernel", "hilbert", "kernel name"},
        {"gamma", json::array({1, 2}), "monomial degrees"},
        {"smax", 4, "last shell"},
        {"jmax", 6, "largest |j|"},
        {"chi", 0.5, "arc width exponent"},
        {"l", 2, "shell power"},
        {"rho", 0.05, "exponent of the rational set"},
        {"qcap", 25, "denominator cap"},
        {"window", 3, "number of scales n summed per cell"},
        {"radii", 8, "radial samples per ring"},
        {"angles", 24, "angular samples per ring"},
        {"rel_tol", 1e-12, "relative tolerance of the monotonicity checks"}},
       run_l2decay},
      {"lp-scan",
       "l^p norms of the truncated operators: direct against Fourier T_n, and the plateau of ||T_N f||_p / ||f||_p.",
       {{"kernel", "hilbert", "kernel name"},
        {"gamma", json::array({1, 2}), "monomial degrees"},
        {"nmax", 12, "last truncation"},
        {"plateau_from", 10, "first truncation of the plateau window"},
        {"ps", json::array({1.5, 2.0, 3.0, 4.0}), "exponents"},
        {"threshold", 0.05, "max relative change over the window"},
        {"cross_cases", 50, "random direct/Fourier comparisons"},
        {"cross_nmax", 8, "largest piece in the comparisons"},
        {"cross_tol", 1e-8, "max pointwise difference"}},
       run_lp},
      {"apply",
       "Apply T_n, the truncated operator T, the average M_N, or dump the sampled multiplier m_n.",
       {{"op", "Tn", "Tn, T, MN or multiplier"},
        {"kernel", "hilbert", "kernel name"},
        {"gamma", json::array({1, 2}), "monomial degrees"},
        {"n", 4, "piece index (Tn, multiplier) or truncation (T)"},
        {"N", 8, "averaging radius (MN)"},
        {"symmetric", false, "average over [-N, N]^k instead of [1, N]^k (MN)"},
        {"method", "fourier", "direct or fourier"},
        {"input", "box16", "a .json or .box file, or a test function name"},
        {"B", 64, "grid size (multiplier)"},
        {"format", "json", "output format: json or box; csv or bin for the multiplier"}},
       run_apply},
  };
  return all;
}

inline const Experiment& find_experiment(const std::string& name) {
  for (auto& e : experiments())
    if (e.name == name) return e;
  std::string names;
  for (auto& e : experiments()) names += (names.empty() ? "" : ", ") + e.name;
  throw InvalidArgument("unknown experiment '" + name + "' (" + names + ")");
}

// Defaults filled in, unknown keys and type mismatches rejected.
inline json resolve_params(const Experiment& E, const json& given) {
  require(given.is_object(), "params must be a JSON object");
  json out = json::object();
  for (auto& P : E.params) out[P.name] = P.value;
  for (auto& [k, v] : given.items()) {
    auto it = std::find_if(E.params.begin(), E.params.end(), [&](const ParamSpec& P) { return P.name == k; });
    require(it != E.params.end(), E.name + ": unknown parameter '" + k + "'");
    out[k] = detail::coerce(*it, v);
  }
  return out;
}

// Command-line text to JSON: lists are comma separated or JSON arrays.
inline json parse_param_text(const Experiment& E, const std::string& key, const std::string& text) {
  auto it = std::find_if(E.params.begin(), E.params.end(), [&](const ParamSpec& P) { return P.name == key; });
  require(it != E.params.end(), E.name + ": unknown parameter '" + key + "'");
  if (it->value.is_array()) {
    if (!text.empty() && text.front() == '[') {
      try {
        return json::parse(text);
      } catch (const json::exception&) {
        throw InvalidArgument("parameter '" + key + "': malformed list " + text);
      }
    }
    json out = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(detail::parse_scalar(item));
    return out;
  }
  if (it->value.is_string()) return text;
  return detail::parse_scalar(text);
}

inline json spec_echo(const ExperimentSpec& s, const json& resolved) {
  return {{"name", s.name}, {"params", resolved}, {"seed", s.seed}};
}

inline void write_report(const ExperimentSpec& s, const json& resolved, const Report& R) {
  namespace fs = std::filesystem;
  fs::path dir(s.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw GuardError("cannot create " + dir.string() + ": " + ec.message());
  json echo = spec_echo(s, resolved);
  for (auto& T : R.tables) write_text(dir / (s.name + "_" + T.name + ".csv"), T.render(echo));
  for (auto& [stem, svg] : R.plots) write_text(dir / (stem + ".svg"), svg);
  for (auto& [file, writer] : R.files) writer(dir / file);
  json summary = {{"spec", echo}, {"pass", R.pass}, {"results", R.summary}};
  write_text(dir / (s.name + "_summary.json"), summary.dump(2) + "\n");
}

inline Report run_experiment(const ExperimentSpec& s) {
  const auto& E = find_experiment(s.name);
  json resolved = resolve_params(E, s.params);
  Report R = E.run(Params(resolved, s.seed, s.out_dir));
  if (!s.out_dir.empty()) write_report(s, resolved, R);
  return R;
}

}  // namespace radonlab
