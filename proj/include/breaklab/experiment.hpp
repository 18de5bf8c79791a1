#pragma once

// Scenario configuration and the two experiments: convergence of the
// distortion of test quadruples, and the quotient profile of ψ.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "breaklab/conjugacy.hpp"
#include "breaklab/crossratio.hpp"
#include "breaklab/detail/csv.hpp"
#include "breaklab/detail/random.hpp"
#include "breaklab/error.hpp"
#include "breaklab/generic_map.hpp"
#include "breaklab/maps.hpp"
#include "breaklab/partition.hpp"
#include "breaklab/quadruple.hpp"
#include "breaklab/rotation.hpp"

namespace breaklab {

// ---------------------------------------------------------------------------
// Configuration

/// One map of a scenario. `family` is rigid, two_break_pl, two_break_moebius,
/// one_break_moebius, or sine_composed (a sine diffeomorphism after f₁, f₂ only).
struct MapSpec {
  std::string family = "two_break_moebius";
  double rho = 0.0;
  double a = 0.1;
  double b = 0.55;
  double sigma_a = 2.0;
  double sigma_b = 1.0;
  double shape = 0.5;
  double amp = 0.3;
  double phase = 0.0;

  bool has_movable_b() const { return family == "two_break_pl" || family == "two_break_moebius"; }
  double first_break() const { return family == "one_break_moebius" ? b : a; }
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string kind = "main";  ///< main | identity | rigidity
  std::string rho = "golden";
  std::vector<int> levels{5, 7, 9, 11, 13};
  std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  std::optional<double> r1;   ///< unset: 40 e^{5 v₁}
  std::int64_t orbit_length = 100000;
  std::vector<int> scales{8, 10, 12, 14};  ///< h = 2^{-k}
  bool match_measure = true;
  double x0 = kDefaultSeed;
  double rho_tol = 1e-12;
  std::uint64_t seed = 1;
  MapSpec f1;
  MapSpec f2;
};

inline FamilyDescriptor descriptor_of(const MapSpec& m) {
  if (m.family == "rigid") return RigidRotation{m.rho};
  if (m.family == "two_break_pl") return two_break_pl_with_jump(m.a, m.b, m.sigma_a);
  if (m.family == "two_break_moebius") return TwoBreakMoebius{m.a, m.b, m.sigma_a, m.sigma_b, m.shape, 0.0};
  if (m.family == "one_break_moebius") return OneBreakMoebius{m.b, m.sigma_a, 0.0};
  throw Error(ErrorKind::ConfigError, "family '" + m.family + "' has no closed-form descriptor");
}

namespace detail {

/// Whole-string conversion; trailing garbage is an error.
template <class T>
T parse_value(const std::string& raw, const std::string& key) {
  auto b = raw.find_first_not_of(" \t"), e = raw.find_last_not_of(" \t");
  std::string text = b == std::string::npos ? std::string() : raw.substr(b, e - b + 1);
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
  } else {
    std::istringstream is(text);
    T v{};
    if (is >> v && (is >> std::ws).eof()) return v;
  }
  throw Error(ErrorKind::ConfigError, "bad value '" + raw + "' for " + key);
}

template <class T>
T get_value(const boost::property_tree::ptree& t, const std::string& key, T fallback) {
  auto v = t.get_optional<std::string>(key);
  return v ? parse_value<T>(*v, key) : fallback;
}

template <class T>
std::vector<T> parse_list(const std::string& s, const std::string& key) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_value<T>(item, key));
  }
  return out;
}

inline MapSpec parse_map(const boost::property_tree::ptree& t) {
  MapSpec m;
  m.family = t.get<std::string>("family", m.family);
  m.rho = get_value(t, "rho", m.rho);
  m.a = get_value(t, "a", m.a);
  m.b = get_value(t, "b", m.b);
  m.sigma_a = get_value(t, "sigma_a", get_value(t, "sigma", m.sigma_a));
  m.sigma_b = get_value(t, "sigma_b", m.sigma_b);
  m.shape = get_value(t, "shape", m.shape);
  m.amp = get_value(t, "amp", m.amp);
  m.phase = get_value(t, "phase", m.phase);
  return m;
}

/// Drops trailing comments: a '#' or ';' preceded by whitespace ends the line.
inline std::string strip_inline_comments(std::istream& in) {
  std::string out, line;
  while (std::getline(in, line)) {
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.erase(i);
        break;
      }
    }
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace detail

/// INI text with sections [scenario], [f1] and [f2].
inline ScenarioConfig parse_scenario(std::istream& in) {
  boost::property_tree::ptree t;
  try {
    std::istringstream text(detail::strip_inline_comments(in));
    boost::property_tree::ini_parser::read_ini(text, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  ScenarioConfig c;
  try {
    auto s = t.get_child_optional("scenario");
    if (s) {
      c.name = s->get<std::string>("name", c.name);
      c.kind = s->get<std::string>("kind", c.kind);
      c.rho = s->get<std::string>("rho", c.rho);
      if (auto v = s->get_optional<std::string>("levels")) c.levels = detail::parse_list<int>(*v, "levels");
      if (auto v = s->get_optional<std::string>("eps")) c.eps = detail::parse_list<double>(*v, "eps");
      if (auto v = s->get_optional<std::string>("scales")) c.scales = detail::parse_list<int>(*v, "scales");
      if (auto v = s->get_optional<std::string>("r1"); v && *v != "auto") c.r1 = detail::parse_value<double>(*v, "r1");
      c.orbit_length = detail::get_value(*s, "orbit_length", c.orbit_length);
      c.match_measure = detail::get_value(*s, "match_measure", c.match_measure);
      c.x0 = detail::get_value(*s, "x0", c.x0);
      c.rho_tol = detail::get_value(*s, "rho_tol", c.rho_tol);
      c.seed = detail::get_value(*s, "seed", c.seed);
    }
    if (auto f = t.get_child_optional("f1")) c.f1 = detail::parse_map(*f);
    if (auto f = t.get_child_optional("f2")) c.f2 = detail::parse_map(*f);
  } catch (const boost::property_tree::ptree_error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  for (int n : c.levels)
    if (n % 2 == 0 || n < 1) throw Error(ErrorKind::ConfigError, "levels must be odd and positive");
  for (double e : c.eps)
    if (!(e > 0.0 && e <= 0.1)) throw Error(ErrorKind::ConfigError, "eps values must lie in (0, 0.1]");
  if (c.kind != "main" && c.kind != "identity" && c.kind != "rigidity")
    throw Error(ErrorKind::ConfigError, "scenario kind must be main, identity or rigidity");
  if (c.f1.family == "sine_composed") throw Error(ErrorKind::ConfigError, "f1 cannot be sine_composed");
  return c;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file " + p.string());
  return parse_scenario(in);
}

// ---------------------------------------------------------------------------
// Matched pairs

using SineAfter = Composed<SineDiffeo, PHomeomorphism>;
using SecondMap = std::variant<PHomeomorphism, SineAfter>;

/// f₁, f₂ tuned to a common ρ, with the breaks used to anchor ψ.
struct MatchedPair {
  TargetRho target;
  PHomeomorphism f1;
  SecondMap f2;
  RotationNumber rho1, rho2;
  double a1 = 0.0, a2 = 0.0;
  std::optional<double> b1, b2;
  double mu1 = 0.0;  ///< μ₁([a₁,b₁])
  double mu2 = 0.0;  ///< μ₂([a₂,b₂])
  bool measure_matched = false;
  double sigma_product1 = 1.0, sigma_product2 = 1.0;
};

template <class Fn>
decltype(auto) visit_f2(const MatchedPair& p, Fn&& fn) {
  return std::visit(std::forward<Fn>(fn), p.f2);
}

inline std::optional<double> second_break(const PHomeomorphism& f, double a) {
  for (const auto& b : f.breaks())
    if (circle_distance(b.location, a) > 1e-12) return b.location;
  return std::nullopt;
}

inline double sigma_at(const PHomeomorphism& f, std::optional<double> x) {
  if (!x) return 1.0;
  const BreakPoint* b = f.find_break(*x);
  return b ? b->jump_ratio() : 1.0;
}

inline MatchedPair prepare_pair(const ScenarioConfig& c) {
  MatchedPair P;
  P.target = parse_target(c.rho);
  auto t1 = tune_family(descriptor_of(c.f1), P.target, c.rho_tol);
  P.f1 = t1.map;
  P.rho1 = t1.rho;
  P.a1 = frac(c.f1.first_break());
  P.b1 = second_break(P.f1, P.a1);
  P.sigma_product1 = jump_product(P.f1);
  const std::int64_t N = c.orbit_length;
  if (P.b1) P.mu1 = invariant_measure_of_arc(P.f1, P.target.value, P.a1, *P.b1, N).value;

  if (c.kind == "identity") {
    P.f2 = P.f1;
    P.rho2 = P.rho1;
    P.a2 = P.a1;
    P.b2 = P.b1;
    P.mu2 = P.mu1;
    P.measure_matched = true;
    P.sigma_product2 = P.sigma_product1;
    return P;
  }
  if (c.f2.family == "sine_composed") {
    SineDiffeo g{c.f2.amp, c.f2.phase};
    const PHomeomorphism inner = P.f1.with_offset(0.0);
    auto t2 = tune_to_target_rho([&](double t) { return SineAfter{g, inner, t}; }, P.target, c.rho_tol);
    P.f2 = t2.map;
    P.rho2 = t2.rho;
    P.a2 = P.a1;  // g is smooth, so the break of f₁ is the break of g∘f₁
    P.sigma_product2 = P.sigma_product1;
    return P;
  }
  P.a2 = frac(c.f2.first_break());
  const double tol = 3.0 / std::sqrt(static_cast<double>(N));
  if (c.match_measure && P.b1 && c.f2.has_movable_b()) {
    MapSpec spec = c.f2;
    auto mm = match_measure_condition(
        [&](double b2) {
          spec.b = b2;
          return descriptor_of(spec);
        },
        P.a2, P.mu1, P.target, c.rho_tol, N, 0.1 * tol);
    P.f2 = mm.map;
    P.rho2 = mm.rho;
    P.b2 = mm.b2;
    P.mu2 = mm.measure;
    P.measure_matched = std::abs(P.mu2 - P.mu1) <= tol;
  } else {
    auto t2 = tune_family(descriptor_of(c.f2), P.target, c.rho_tol);
    P.f2 = t2.map;
    P.rho2 = t2.rho;
    P.b2 = second_break(t2.map, P.a2);
    if (P.b2) P.mu2 = invariant_measure_of_arc(t2.map, P.target.value, P.a2, *P.b2, N).value;
    P.measure_matched = P.b1.has_value() == P.b2.has_value() && std::abs(P.mu2 - P.mu1) <= tol;
  }
  P.sigma_product2 = jump_product(std::get<PHomeomorphism>(P.f2));
  return P;
}

inline PsiResult build_pair_psi(const MatchedPair& P, std::int64_t N) {
  return visit_f2(P, [&](const auto& f2) { return build_conjugacy_psi(P.f1, P.a1, P.rho1, f2, P.a2, P.rho2, N); });
}

// ---------------------------------------------------------------------------
// Distortion experiment

struct DistortionRow {
  int n = 0;
  double eps = 0.0;
  std::string which;  ///< case tag, or "error:<kind>"
  double dist_f1 = std::numeric_limits<double>::quiet_NaN();
  double dist_f2 = std::numeric_limits<double>::quiet_NaN();
  double target1 = std::numeric_limits<double>::quiet_NaN();
  double target2 = std::numeric_limits<double>::quiet_NaN();
  double product_f1 = std::numeric_limits<double>::quiet_NaN();  ///< Π of per-step distortions
  double product_f2 = std::numeric_limits<double>::quiet_NaN();
  double ratio_lhs = std::numeric_limits<double>::quiet_NaN();   ///< Dist(f₁^{q_n} z; ψ)/Dist(z; ψ)
  double ratio_rhs = std::numeric_limits<double>::quiet_NaN();   ///< Dist(ψz; f₂^{q_n})/Dist(z; f₁^{q_n})
  ConditionsReport conditions_z, conditions_image;
  std::int64_t l = 0, p = 0;
  double resid1() const { return std::abs(dist_f1 - target1); }
  double resid2() const { return std::abs(dist_f2 - target2); }
  bool ok() const { return which.rfind("error:", 0) != 0; }
};

struct DistortionReport {
  std::string scenario;
  double r1 = 0.0;
  double v1 = 0.0;
  std::vector<DistortionRow> rows;
};

/// Per-step distortions Dist(f^i z; f), 0 ≤ i < n, and the final image.
template <LiftMap M>
std::vector<double> per_step_distortions(const Quadruple& z, const M& f, std::int64_t n) {
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n));
  Quadruple cur = z;
  for (std::int64_t i = 0; i < n; ++i) {
    Quadruple nxt = cur.image(f);
    d.push_back(distortion_between(cur, nxt));
    cur = nxt;
  }
  return d;
}

template <LiftMap M2>
DistortionRow distortion_row(const MatchedPair& P, const M2& f2, const ConjugacyFunction& psi,
                             const ContinuedFraction& cf, int n, double eps, double R1, double x0) {
  DistortionRow row;
  row.n = n;
  row.eps = eps;
  auto S = construct_test_quadruple(P.f1, P.a1, P.b1, P.rho1, cf, n, eps, x0);
  row.which = to_string(S.which);
  row.l = S.l;
  row.p = S.p;
  const std::int64_t q = cf.qn(n);
  auto d1 = iterated_distortion(S.z, P.f1, q);
  row.dist_f1 = d1.direct;
  row.product_f1 = d1.product;
  row.conditions_z = check_conditions_C(S.z, S.x0, R1, eps, S.mirrored());
  row.conditions_image = check_conditions_C(d1.final_image, S.x0, R1, eps, S.mirrored());

  Quadruple pz = Quadruple::from_lifts(psi.lift(S.z[0]), psi.lift(S.z[1]), psi.lift(S.z[2]), psi.lift(S.z[3]));
  auto d2 = iterated_distortion(pz, f2, q);
  row.dist_f2 = d2.direct;
  row.product_f2 = d2.product;

  double sa1 = sigma_at(P.f1, P.a1), sb1 = sigma_at(P.f1, P.b1);
  double sa2 = 1.0, sb2 = 1.0;
  if (const auto* g = std::get_if<PHomeomorphism>(&P.f2)) {
    sa2 = sigma_at(*g, P.a2);
    sb2 = sigma_at(*g, P.b2);
  } else {
    sa2 = sa1;
    sb2 = sb1;
  }
  row.target1 = distortion_target(S.which, sa1, sb1);
  row.target2 = distortion_target(S.which, sa2, sb2);

  // ψ on the image quadruple is read through the conjugacy relation ψ∘f₁^{q_n} = f₂^{q_n}∘ψ
  double dist_psi_z = cross_ratio(pz) / cross_ratio(S.z);
  double dist_psi_img = cross_ratio(d2.final_image) / cross_ratio(d1.final_image);
  row.ratio_lhs = dist_psi_img / dist_psi_z;
  row.ratio_rhs = row.dist_f2 / row.dist_f1;
  return row;
}

inline DistortionReport run_distortion_experiment(const ScenarioConfig& c) {
  DistortionReport rep;
  rep.scenario = c.name;
  MatchedPair P = prepare_pair(c);
  rep.v1 = total_variation_log_df(P.f1);
  rep.r1 = c.r1 ? *c.r1 : default_r1(rep.v1);
  auto psi = build_pair_psi(P, c.orbit_length);
  const auto& cf = P.target.cf;
  for (int n : c.levels) {
    for (double eps : c.eps) {
      try {
        rep.rows.push_back(visit_f2(P, [&](const auto& f2) {
          return distortion_row(P, f2, psi.psi, cf, n, eps, rep.r1, c.x0);
        }));
      } catch (const Error& e) {
        DistortionRow row;
        row.n = n;
        row.eps = eps;
        row.which = std::string("error:") + to_string(e.kind());
        rep.rows.push_back(row);
      }
    }
  }
  return rep;
}

inline void write_distortion_csv(std::ostream& os, const DistortionReport& rep) {
  os << "n,eps,case,dist_f1,dist_f2,target1,target2,resid1,resid2\n";
  for (const auto& r : rep.rows)
    os << r.n << ',' << csv_num(r.eps) << ',' << r.which << ',' << csv_num(r.dist_f1) << ',' << csv_num(r.dist_f2)
       << ',' << csv_num(r.target1) << ',' << csv_num(r.target2) << ',' << csv_num(r.resid1()) << ','
       << csv_num(r.resid2()) << '\n';
}

// ---------------------------------------------------------------------------
// Singularity experiment

struct ScaleIndices {
  int k = 0;  ///< h = 2^{-k}
  double h = 0.0;
  double index_05 = 0.0, index_01 = 0.0, index_002 = 0.0;
  double mean = 0.0;
};

struct SingularityReport {
  std::string scenario;
  std::string kind;
  double residual = 0.0;
  std::size_t monotonicity_violations = 0;
  double sigma_product1 = 1.0, sigma_product2 = 1.0;
  double mu1 = 0.0, mu2 = 0.0;
  bool measure_matched = false;
  std::vector<ScaleIndices> scales;
  std::vector<QuotientProfile> profiles;
  ConjugacyFunction psi;

  bool index01_strictly_increasing() const {
    for (std::size_t i = 1; i < scales.size(); ++i)
      if (!(scales[i].index_01 > scales[i - 1].index_01)) return false;
    return !scales.empty();
  }
  double max_index01() const {
    double m = 0;
    for (const auto& s : scales) m = std::max(m, s.index_01);
    return m;
  }
  double max_index002() const {
    double m = 0;
    for (const auto& s : scales) m = std::max(m, s.index_002);
    return m;
  }

  /// Verdict on the trend expected for this kind of scenario.
  bool verdict() const {
    if (kind == "identity") return max_index01() == 0.0;
    if (kind == "rigidity") return max_index002() <= 0.05;
    return index01_strictly_increasing() && !scales.empty() && scales.back().index_01 > 0.5;
  }
  std::string label() const {
    if (kind == "main") return measure_matched ? "MAIN" : "MAIN (exploratory: measures not matched)";
    return "CONTROL (" + kind + ")";
  }
};

inline SingularityReport run_singularity_experiment(const ScenarioConfig& c) {
  SingularityReport rep;
  rep.scenario = c.name;
  rep.kind = c.kind;
  MatchedPair P = prepare_pair(c);
  rep.sigma_product1 = P.sigma_product1;
  rep.sigma_product2 = P.sigma_product2;
  rep.mu1 = P.mu1;
  rep.mu2 = P.mu2;
  rep.measure_matched = P.measure_matched;
  auto psi = build_pair_psi(P, c.orbit_length);
  rep.psi = psi.psi;
  rep.monotonicity_violations = psi.psi.monotonicity_violations();
  // residual on a seeded jittered grid
  UniformSource rng(c.seed);
  rep.residual = visit_f2(P, [&](const auto& f2) {
    double worst = 0.0;
    const int grid = 1000;
    for (int j = 0; j < grid; ++j) {
      double x = (j + rng.next()) / grid;
      worst = std::max(worst, circle_distance(psi.psi.eval(frac(P.f1.lift(x))), frac(f2.lift(psi.psi.eval(x)))));
    }
    return worst;
  });
  for (int k : c.scales) {
    auto prof = quotient_profile(psi.psi, std::ldexp(1.0, -k));
    ScaleIndices s;
    s.k = k;
    s.h = prof.h;
    s.index_05 = prof.singularity_index(0.5);
    s.index_01 = prof.singularity_index(0.1);
    s.index_002 = prof.singularity_index(0.02);
    s.mean = prof.mean();
    rep.scales.push_back(s);
    rep.profiles.push_back(std::move(prof));
  }
  return rep;
}

inline nlohmann::ordered_json singularity_summary(const SingularityReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  nlohmann::ordered_json v;
  v["label"] = r.label();
  v["kind"] = r.kind;
  v["pass"] = r.verdict();
  v["residual"] = r.residual;
  v["monotonicity_violations"] = r.monotonicity_violations;
  v["sigma_product_f1"] = r.sigma_product1;
  v["sigma_product_f2"] = r.sigma_product2;
  v["mu1"] = r.mu1;
  v["mu2"] = r.mu2;
  v["measure_matched"] = r.measure_matched;
  v["index01_strictly_increasing"] = r.index01_strictly_increasing();
  auto& sc = v["scales"] = nlohmann::ordered_json::array();
  for (const auto& s : r.scales)
    sc.push_back({{"k", s.k}, {"h", s.h}, {"index_0.5", s.index_05}, {"index_0.1", s.index_01},
                  {"index_0.02", s.index_002}, {"mean", s.mean}});
  j["verdicts"] = v;
  return j;
}

inline nlohmann::ordered_json distortion_summary(const DistortionReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  nlohmann::ordered_json v;
  v["r1"] = r.r1;
  v["v1"] = r.v1;
  bool cond = true, decomp = true, ratio_ok = true;
  std::size_t errors = 0;
  for (const auto& row : r.rows) {
    if (!row.ok()) {
      ++errors;
      continue;
    }
    cond = cond && row.conditions_z.all() && row.conditions_image.all();
    decomp = decomp && std::abs(row.dist_f1 - row.product_f1) <= 1e-7 && std::abs(row.dist_f2 - row.product_f2) <= 1e-7;
    ratio_ok = ratio_ok && std::abs(row.ratio_lhs - row.ratio_rhs) <= 1e-6;
  }
  v["conditions_C"] = cond;
  v["decomposition"] = decomp;
  v["ratio_identity"] = ratio_ok;
  v["error_rows"] = errors;
  j["verdicts"] = v;
  return j;
}

/// Writes the experiment outputs of a scenario into `dir` and returns the summary.
inline nlohmann::ordered_json write_singularity_outputs(const SingularityReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "profile.csv");
    write_profile_csv_header(os);
    for (const auto& p : r.profiles) write_profile_csv_rows(os, p);
  }
  {
    std::ofstream os(dir / "psi.csv");
    write_psi_csv(os, r.psi, 4096);
  }
  auto j = singularity_summary(r);
  std::ofstream(dir / "summary.json") << j.dump(2) << '\n';
  return j;
}

inline nlohmann::ordered_json write_distortion_outputs(const DistortionReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "distortion.csv");
    write_distortion_csv(os, r);
  }
  auto j = distortion_summary(r);
  std::ofstream(dir / "distortion_summary.json") << j.dump(2) << '\n';
  return j;
}

}  // namespace breaklab
