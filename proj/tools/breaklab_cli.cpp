// Command-line front end: one subcommand per experiment, CSV/JSON into --out.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "breaklab/experiment.hpp"

namespace fs = std::filesystem;
using namespace breaklab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitBudget = 2;
constexpr int kExitUsage = 64;

struct MapOptions {
  MapSpec spec;
  double offset = 0.0;
  std::string target;  // tune the offset to this ρ when set
};

void add_map_options(CLI::App* cmd, MapOptions& m) {
  cmd->add_option("--family", m.spec.family, "rigid | two_break_pl | two_break_moebius | one_break_moebius")
      ->capture_default_str();
  cmd->add_option("--a", m.spec.a, "first break")->capture_default_str();
  cmd->add_option("--b", m.spec.b, "second break (the only one for one_break_moebius)")->capture_default_str();
  cmd->add_option("--sigma-a", m.spec.sigma_a, "jump ratio at a")->capture_default_str();
  cmd->add_option("--sigma-b", m.spec.sigma_b, "jump ratio at b (two_break_moebius)")->capture_default_str();
  cmd->add_option("--shape", m.spec.shape, "curvature split between the Möbius pieces")->capture_default_str();
  cmd->add_option("--offset", m.offset, "lift offset t in f + t")->capture_default_str();
  cmd->add_option("--target", m.target, "tune the offset to this rotation number (golden, silver)");
}

PHomeomorphism make_map(MapOptions& m, const std::string& rho_arg, double tol) {
  if (m.spec.family == "rigid") {
    if (rho_arg.empty()) throw Error(ErrorKind::InvalidArgument, "rigid rotation needs --rho");
    if (rho_arg == "golden" || rho_arg == "silver") return build_family(RigidRotation{named_target(rho_arg).value});
    return build_family(RigidRotation{std::stod(rho_arg)});
  }
  FamilyDescriptor d = descriptor_of(m.spec);
  if (!m.target.empty()) return tune_family(d, parse_target(m.target), tol).map;
  return build_family(with_offset(d, m.offset));
}

void ensure_dir(const std::string& out) {
  if (!out.empty()) fs::create_directories(out);
}

void write_json(const std::string& out, const std::string& file, const nlohmann::ordered_json& j) {
  if (out.empty()) return;
  ensure_dir(out);
  std::ofstream(fs::path(out) / file) << j.dump(2) << '\n';
}

std::vector<double> parse_z(const std::string& s) {
  auto v = detail::parse_list<double>(s, "--z");
  if (v.size() != 4) throw Error(ErrorKind::InvalidArgument, "--z needs four comma-separated lifts");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"breaklab: circle maps with break points"};
  app.require_subcommand(1);
  std::string out;
  app.add_option("--out", out, "output directory for CSV/JSON files");

  // rotnum
  auto* rotnum = app.add_subcommand("rotnum", "rotation number of a map");
  MapOptions rot_map;
  rot_map.spec.family = "rigid";
  std::string rot_rho;
  double rot_tol = 1e-10;
  add_map_options(rotnum, rot_map);
  rotnum->add_option("--rho", rot_rho, "angle of the rigid rotation");
  rotnum->add_option("--tol", rot_tol, "tolerance")->capture_default_str();
  rotnum->add_option("--out", out);

  // cf
  auto* cf_cmd = app.add_subcommand("cf", "continued fraction and convergents");
  std::string cf_rho = "golden";
  int cf_depth = 10;
  cf_cmd->add_option("--rho", cf_rho, "golden, silver or a value in (0,1)")->capture_default_str();
  cf_cmd->add_option("--depth", cf_depth, "number of rows (a_0 .. a_{depth-1})")->capture_default_str();
  cf_cmd->add_option("--out", out);

  // partition
  auto* part = app.add_subcommand("partition", "dynamical partition of a map tuned to a target rotation number");
  MapOptions part_map;
  part_map.spec.family = "two_break_pl";
  part_map.spec.a = 0.25;
  part_map.spec.b = 0.75;
  part_map.spec.sigma_a = 3.0;
  part_map.target = "golden";
  int part_level = 6;
  double part_x0 = kDefaultSeed;
  add_map_options(part, part_map);
  part->add_option("--level", part_level, "partition level n")->capture_default_str();
  part->add_option("--x0", part_x0, "seed point")->capture_default_str();
  part->add_option("--out", out);

  // distortion / conjugacy / singularity take a scenario file
  std::string cfg_path;
  auto* dist = app.add_subcommand("distortion", "distortion of test quadruples along the eps ladder");
  dist->add_option("--config", cfg_path, "scenario file")->required();
  dist->add_option("--out", out);
  auto* conj = app.add_subcommand("conjugacy", "conjugacy psi between the two maps of a scenario");
  conj->add_option("--config", cfg_path, "scenario file")->required();
  conj->add_option("--out", out);
  auto* sing = app.add_subcommand("singularity", "difference-quotient profile of psi");
  sing->add_option("--config", cfg_path, "scenario file")->required();
  sing->add_option("--out", out);

  // conditions
  auto* cond = app.add_subcommand("conditions", "check conditions (C_{R,eps}) for four lifted points");
  std::string cond_z;
  double cond_x0 = 0.0, cond_r1 = 2.0, cond_eps = 0.01;
  bool cond_mirrored = false;
  cond->add_option("--z", cond_z, "z1,z2,z3,z4 as increasing lifts")->required();
  cond->add_option("--x0", cond_x0, "reference point")->capture_default_str();
  cond->add_option("--r1", cond_r1, "constant R")->capture_default_str();
  cond->add_option("--eps", cond_eps, "epsilon")->capture_default_str();
  cond->add_flag("--mirrored", cond_mirrored, "exchange the roles of l12 and l34");
  cond->add_option("--out", out);

  // scenario run <file>
  auto* scen = app.add_subcommand("scenario", "run a scenario file");
  auto* scen_run = scen->add_subcommand("run", "run every experiment the scenario kind calls for");
  scen->require_subcommand(1);
  scen_run->add_option("file", cfg_path, "scenario file")->required();
  scen_run->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (*rotnum) {
      auto f = make_map(rot_map, rot_rho, 1e-12);
      auto r = rotation_number(f, rot_tol);
      std::printf("%.15g\n", r.value);
      write_json(out, "rotnum.json",
                 {{"rho", r.value}, {"error_bound", r.error_bound}, {"method", to_string(r.method)},
                  {"lower", {r.lower.p, r.lower.q}}, {"upper", {r.upper.p, r.upper.q}}});
      return kExitOk;
    }
    if (*cf_cmd) {
      ContinuedFraction cf;
      if (cf_rho == "golden" || cf_rho == "silver") {
        auto t = named_target(cf_rho);
        cf = from_partial_quotients({t.cf.k.begin(), t.cf.k.begin() + std::min(cf_depth, kMaxDepth)});
      } else {
        cf = continued_fraction(std::stod(cf_rho), std::min(cf_depth, kMaxDepth));
      }
      std::ostringstream os;
      os << "n,k,p,q\n";
      for (int n = 0; n < cf_depth && n <= cf.depth(); ++n)
        os << n << ',' << (n == 0 ? 0 : cf.partial_quotient(n)) << ',' << cf.pn(n) << ',' << cf.qn(n) << '\n';
      std::cout << os.str();
      if (cf.terminated) std::cout << "# rational: expansion terminated\n";
      if (!out.empty()) {
        ensure_dir(out);
        std::ofstream(fs::path(out) / "cf.csv") << os.str();
      }
      return kExitOk;
    }
    if (*part) {
      if (part_map.target.empty()) throw Error(ErrorKind::InvalidArgument, "partition needs --target");
      auto target = parse_target(part_map.target);
      auto tuned = tune_family(descriptor_of(part_map.spec), target, 1e-12);
      auto P = build_dynamical_partition(tuned.map, tuned.rho, target.cf, part_level, part_x0);
      std::printf("level %d: %zu intervals, total length %.15g\n", P.n, P.size(), P.total_length());
      if (!out.empty()) {
        ensure_dir(out);
        std::ofstream os(fs::path(out) / "partition.csv");
        write_partition_csv_header(os);
        write_partition_csv_rows(os, P);
      }
      return kExitOk;
    }
    if (*cond) {
      auto z = parse_z(cond_z);
      auto q = Quadruple::from_lifts(z[0], z[1], z[2], z[3]);
      auto r = check_conditions_C(q, cond_x0, cond_r1, cond_eps, cond_mirrored);
      std::printf("a %s margin %.6g\nb %s margin %.6g\nc %s margin %.6g\n", r.a() ? "pass" : "fail", r.margin_a,
                  r.b() ? "pass" : "fail", r.margin_b, r.c() ? "pass" : "fail", r.margin_c);
      write_json(out, "conditions.json",
                 {{"a", r.margin_a}, {"b", r.margin_b}, {"c", r.margin_c}, {"pass", r.all()}});
      return r.all() ? kExitOk : kExitValidation;
    }
    if (*dist) {
      auto c = load_scenario(cfg_path);
      auto r = run_distortion_experiment(c);
      write_distortion_csv(std::cout, r);
      if (!out.empty()) write_distortion_outputs(r, out);
      return kExitOk;
    }
    if (*conj) {
      auto c = load_scenario(cfg_path);
      auto P = prepare_pair(c);
      auto psi = build_pair_psi(P, c.orbit_length);
      std::printf("residual %.6g\nmonotonicity violations %zu\n", psi.residual, psi.psi.monotonicity_violations());
      if (!out.empty()) {
        ensure_dir(out);
        std::ofstream os(fs::path(out) / "psi.csv");
        write_psi_csv(os, psi.psi, 4096);
      }
      return kExitOk;
    }
    if (*sing) {
      auto c = load_scenario(cfg_path);
      auto r = run_singularity_experiment(c);
      auto j = out.empty() ? singularity_summary(r) : write_singularity_outputs(r, out);
      std::cout << j.dump(2) << '\n';
      return r.verdict() ? kExitOk : kExitValidation;
    }
    if (*scen_run) {
      auto c = load_scenario(cfg_path);
      nlohmann::ordered_json all;
      all["scenario"] = c.name;
      bool pass = true;
      auto sr = run_singularity_experiment(c);
      auto sj = out.empty() ? singularity_summary(sr) : write_singularity_outputs(sr, out);
      all["verdicts"]["singularity"] = sj["verdicts"];
      pass = pass && sr.verdict();
      if (c.kind == "main") {
        auto dr = run_distortion_experiment(c);
        auto dj = out.empty() ? distortion_summary(dr) : write_distortion_outputs(dr, out);
        all["verdicts"]["distortion"] = dj["verdicts"];
      }
      std::cout << all.dump(2) << '\n';
      return pass ? kExitOk : kExitValidation;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_budget_failure() ? kExitBudget : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}
