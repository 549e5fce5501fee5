#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "e2h/csv.hpp"
#include "e2h/cubic.hpp"
#include "e2h/error.hpp"
#include "e2h/kernels.hpp"
#include "e2h/montecarlo.hpp"
#include "e2h/params.hpp"
#include "e2h/regions.hpp"
#include "e2h/stochastic_sim.hpp"
#include "e2h/verify.hpp"

namespace e2h::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kPropertyFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParamFlags {
  std::optional<double> c, gamma, delta, delta_prime, tau, beta_lo, beta_hi, nu;
  std::optional<std::int64_t> pi_size, n, m;
  std::optional<int> L;
};

struct Globals {
  std::optional<std::string> config;
  std::uint64_t seed = 0;
  std::string out = ".";
  int threads = 1;
  std::optional<std::string> replay;
};

/// Output files are staged in memory and only written once the command succeeded.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  std::ostringstream& add(const std::string& name) {
    streams.emplace_back(name, std::make_unique<std::ostringstream>());
    return *streams.back().second;
  }
  void finish() {
    for (auto& [name, s] : streams) files.emplace_back(name, s->str());
    streams.clear();
  }
  std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> streams;
};

void add_param_flags(CLI::App& app, ParamFlags& f) {
  app.add_option("--c", f.c, "coupling constant c in (0,1)");
  app.add_option("--gamma", f.gamma, "exceptional mass gamma in [0,1)");
  app.add_option("--delta", f.delta, "MLE confidence delta in (0,1)");
  app.add_option("--delta-prime", f.delta_prime, "acceptance-count confidence delta' in (0,1]");
  app.add_option("--pi-size", f.pi_size, "model class size |Pi| >= 2");
  app.add_option("--tau", f.tau, "reward threshold tau in (0,1]");
  app.add_option("--n", f.n, "questions per iteration");
  app.add_option("--m", f.m, "answers per question");
  app.add_option("--L", f.L, "difficulty levels");
  app.add_option("--beta-lo", f.beta_lo, "beta' > 0");
  app.add_option("--beta-hi,--beta", f.beta_hi, "beta > beta'");
  app.add_option("--nu", f.nu, "budget parameter nu; overrides sqrt(1/n)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TheoryParams resolve_params(const Globals& g, const ParamFlags& f, std::vector<std::string>& warnings) {
  TheoryParams p;
  if (g.config) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(*g.config));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("malformed config " + *g.config + ": " + e.what());
    }
    p = apply_params_json(p, j, &warnings);
  }
  auto set = [](auto& field, const auto& opt) {
    if (opt) field = *opt;
  };
  set(p.c, f.c);
  set(p.gamma, f.gamma);
  set(p.delta, f.delta);
  set(p.delta_prime, f.delta_prime);
  set(p.tau, f.tau);
  set(p.beta_lo, f.beta_lo);
  set(p.beta_hi, f.beta_hi);
  set(p.pi_size, f.pi_size);
  set(p.n, f.n);
  set(p.m, f.m);
  set(p.L, f.L);
  if (f.nu) p.nu = *f.nu;
  if (f.n && p.nu) warnings.push_back("both n and nu given; nu overrides sqrt(1/n)");
  p.validate();
  return p;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return v;
}

void interval_row(CsvWriter& csv, const char* kind, double key, double nu, const Interval& iv) {
  csv.row(kind, key, nu, iv.valid ? iv.lo : std::nan(""), iv.valid ? iv.hi : std::nan(""), iv.valid);
}

// --- subcommands -----------------------------------------------------------

struct IntervalsOpts {
  std::vector<double> a{1.0};
};

int cmd_intervals(const IntervalsOpts& o, const TheoryParams& p, const DerivedConstants& d, Outputs& out,
                  std::ostream& log) {
  for (double a : o.a)
    if (!(a > 0.0)) throw ParameterError("invalid parameter: a > 0");
  CsvWriter csv(out.add("intervals.csv"), {"kind", "a_or_beta", "nu", "lo", "hi", "valid"});
  for (double a : o.a) {
    const Interval iv = invariant_interval(a, p, d);
    interval_row(csv, "I", a, d.nu, iv);
    log << "I(a=" << format_double(a) << ", nu=" << format_double(d.nu) << ") = ";
    if (iv.valid)
      log << "(" << format_double(iv.lo) << ", " << format_double(iv.hi) << ")\n";
    else
      log << "invalid: " << iv.reason << "\n";
  }
  const Interval im = feasibility_interval(p, d);
  interval_row(csv, "I_M", p.beta_hi, d.nu, im);
  const Interval in = improvement_interval(p.beta_lo, p.beta_hi, d.nu, p, d);
  interval_row(csv, "I_N", p.beta_hi, d.nu, in);
  log << "I_M length " << format_double(im.length()) << ", I_N length " << format_double(in.length()) << "\n";
  return kOk;
}

struct ThresholdOpts {
  std::optional<double> x0;
  bool nu_c_only = false;
  bool profile = false;
  double delta_gap = 0.1;
  double profile_lo = 0.01;
  double profile_hi = 12.0;
  int profile_points = 120;
  int curve_points = 50;
};

int cmd_thresholds(const ThresholdOpts& o, const TheoryParams& p, const DerivedConstants& d, Outputs& out,
                   std::ostream& log) {
  const double top = 1.0 - p.gamma;
  const double x0 = o.x0.value_or(0.5 * top);
  if (!(x0 > 0.0 && x0 < top)) throw ParameterError("invalid parameter: 0 < x0 < 1 - gamma");
  if (o.curve_points < 2) throw ParameterError("invalid parameter: curve-points >= 2");

  const CriticalValue nc = critical_nu_c(p.beta_lo, p.beta_hi, p, d);
  if (o.nu_c_only) {
    CsvWriter csv(out.add("critical.csv"), {"quantity", "value", "flag"});
    csv.row("nu_c", nc.value, nc.domain_limited ? "domain_limited" : "root");
    log << "nu_c = " << format_double(nc.value) << (nc.domain_limited ? " (domain-limited)" : "") << "\n";
    return kOk;
  }

  {
    CsvWriter csv(out.add("thresholds.csv"), {"nu", "x_threshold", "domain_flag"});
    const auto nus = linspace(0.0, nc.value, o.curve_points + 1);
    for (const auto& s : threshold_curve(p.beta_lo, p.beta_hi, nus, p, d))
      csv.row(s.nu, s.x, s.ok ? "ok" : "no_root");
  }
  const double nT = critical_nu_T(p, d);
  const NuStar ns = nu_star(p.beta_lo, p.beta_hi, x0, p, d);
  {
    CsvWriter csv(out.add("critical.csv"), {"quantity", "value", "flag"});
    csv.row("nu_c", nc.value, nc.domain_limited ? "domain_limited" : "root");
    csv.row("nu_T", nT, "root");
    csv.row("nu_star", ns.value, ns.capped ? "capped" : "root");
  }
  log << "nu_c = " << format_double(nc.value) << ", nu_T = " << format_double(nT) << ", nu*(x0=" << format_double(x0)
      << ") = " << format_double(ns.value) << "\n";

  if (o.profile) {
    if (!(o.profile_lo > 0.0 && o.profile_hi > o.profile_lo && o.profile_points >= 3))
      throw ParameterError("invalid parameter: 0 < profile-lo < profile-hi, profile-points >= 3");
    const auto grid = linspace(o.profile_lo, o.profile_hi, o.profile_points);
    const NuStarProfile prof = nu_star_profile(o.delta_gap, grid, x0, p, d);
    CsvWriter csv(out.add("profile.csv"), {"beta_lo", "nu_star", "is_argmax"});
    for (const auto& pt : prof.points) csv.row(pt.beta_lo, pt.nu_star, pt.is_argmax);
    log << "profile: argmax beta' = " << format_double(prof.points[prof.argmax].beta_lo)
        << ", interior local maxima = " << prof.local_maxima << ", tail slope = " << format_double(prof.tail_slope)
        << "\n";
  }
  return kOk;
}

struct RegionsOpts {
  std::vector<double> x0{0.1, 0.25, 0.49, 0.7, 0.9};
  double nu_max = 0.03;
  int nu_points = 31;
};

int cmd_regions(const RegionsOpts& o, bool nu_fixed, const TheoryParams& p, const DerivedConstants& d, Outputs& out,
                std::ostream& log) {
  for (double x : o.x0)
    if (!(x > 0.0)) throw ParameterError("invalid parameter: x0 > 0");
  if (!nu_fixed && !(o.nu_max >= 0.0 && o.nu_points >= 1))
    throw ParameterError("invalid parameter: nu-max >= 0, nu-points >= 1");
  const std::vector<double> nus = nu_fixed ? std::vector<double>{d.nu} : linspace(0.0, o.nu_max, o.nu_points);
  CsvWriter csv(out.add("regions.csv"),
                {"beta_lo", "beta_hi", "nu", "x0", "T1", "T2", "T3", "E", "N", "in_I_M", "in_I_N"});
  int improving = 0, rows = 0;
  for (double nu : nus) {
    const Interval im = feasibility_interval(p.beta_lo, p.beta_hi, nu, p, d);
    const Interval in = improvement_interval(p.beta_lo, p.beta_hi, nu, p, d);
    for (double x0 : o.x0) {
      const ErrorEvaluation ev = evaluate_error_terms({p.beta_lo, p.beta_hi, nu, x0}, p, d);
      const double nan = std::nan("");
      const ErrorTerms& t = ev.terms;
      const double N = ev.ok() ? -t.E - 0.5 * (t.aL - 1.0) * (1.0 - p.gamma) : nan;
      csv.row(p.beta_lo, p.beta_hi, nu, x0, ev.ok() ? t.T1 : nan, ev.ok() ? t.T2 : nan, ev.ok() ? t.T3 : nan,
              ev.ok() ? t.E : nan, N, im.contains(x0), in.contains(x0));
      ++rows;
      if (ev.ok() && N < 0) ++improving;
    }
  }
  log << rows << " (nu, x0) points, " << improving << " with N < 0\n";
  return kOk;
}

struct ScanOpts {
  std::string panel = "all";
  bool fast = false;
  int x0_points = 2000;
};

int cmd_scan(const ScanOpts& o, int threads, const TheoryParams& p, const DerivedConstants& d, Outputs& out,
             std::ostream& log) {
  std::vector<Panel> panels;
  if (o.panel == "all") {
    panels = {Panel::a, Panel::b, Panel::c, Panel::d};
  } else {
    panels.push_back(parse_panel(o.panel));
  }
  for (Panel pn : panels) {
    ScanConfig cfg = default_scan_config(pn, o.fast);
    cfg.x0_points = o.x0_points;
    cfg.threads = threads;
    const ScanResult res = run_scan(cfg, p, d);
    write_panel_csv(out.add(std::string("panel_") + panel_letter(pn) + ".csv"), res);
    const auto agree = std::count_if(res.cells.begin(), res.cells.end(), [](const ScanCell& c) { return c.agree; });
    log << "panel " << panel_letter(pn) << ": " << res.cells.size() << " cells, " << agree
        << " with endpoints within one grid cell\n";
  }
  return kOk;
}

struct SimulateOpts {
  int rounds = 5;
  int replications = 100;
  std::int64_t Q = 10000;
  double v_target = 0.5;
};

int cmd_simulate(const SimulateOpts& o, const Globals& g, const TheoryParams& p, const DerivedConstants& d,
                 Outputs& out, std::ostream& log) {
  SimulationConfig cfg;
  cfg.Q = o.Q;
  cfg.V_target = o.v_target;
  cfg.rounds = o.rounds;
  cfg.replications = o.replications;
  cfg.seed = g.seed;
  cfg.threads = g.threads;
  if (cfg.rounds < 1) throw ParameterError("invalid parameter: rounds >= 1");
  const SimulationReport rep = run_replications(cfg, p, d);
  write_simulation_csv(out.add("simulation.csv"), rep.records);
  log << rep.records.size() << " rounds, bound satisfied in " << rep.satisfied << "/" << rep.scored
      << " (coverage " << format_double(rep.coverage()) << "), mean slack " << format_double(rep.mean_slack) << "\n";
  return kOk;
}

int cmd_verify(bool fast, const Globals& g, const TheoryParams& p, Outputs& out, std::ostream& log,
               std::ostream& err) {
  VerifyOptions vo;
  vo.fast = fast;
  vo.seed = g.seed == 0 ? 1 : g.seed;
  vo.threads = g.threads;
  const auto results = run_property_suite(p, vo, [&](const PropertyResult& r) {
    log << (r.passed ? "PASS " : "FAIL ") << r.name;
    for (std::size_t i = r.name.size(); i < 40; ++i) log << ' ';
    log << ' ' << r.detail << "\n";
  });
  CsvWriter csv(out.add("verify.csv"), {"property", "passed", "detail"});
  const PropertyResult* first_fail = nullptr;
  for (const auto& r : results) {
    csv.row(r.name, r.passed, r.detail);
    if (!r.passed && !first_fail) first_fail = &r;
  }
  if (first_fail) {
    err << "property failed: " << first_fail->name << "\n";
    return kPropertyFailure;
  }
  log << "all " << results.size() << " properties passed\n";
  return kOk;
}

// --- manifest --------------------------------------------------------------

void write_outputs(const Globals& g, const std::string& sub, const std::vector<std::string>& args,
                   const TheoryParams& p, const DerivedConstants& d, const Outputs& out, double seconds) {
  const fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + g.out + ": " + ec.message());
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, content] : out.files) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw UsageError("cannot write " + (dir / name).string());
    f << content;
    files.push_back(name);
  }
  nlohmann::json m;
  m["subcommand"] = sub;
  m["argv"] = args;
  m["params"] = params_to_json(p);
  m["derived"] = {{"c_delta", d.c_delta}, {"c_delta_prime", d.c_delta_prime}, {"nu", d.nu}};
  m["seed"] = g.seed;
  m["threads"] = g.threads;
  m["outputs"] = files;
  m["version"] = E2H_VERSION;
  m["isa"] = kernels::isa_name(kernels::active_isa());
  m["duration_seconds"] = seconds;
  std::ofstream f(dir / (sub + ".manifest.json"), std::ios::binary);
  if (!f) throw UsageError("cannot write manifest");
  f << m.dump(2) << "\n";
}

std::vector<std::string> replay_args(const std::string& path, const std::optional<std::string>& out_override) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed manifest " + path + ": " + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array()) throw UsageError("manifest has no argv array");
  std::vector<std::string> stored = m["argv"].get<std::vector<std::string>>();
  if (!out_override) return stored;
  std::vector<std::string> args;
  for (std::size_t i = 0; i < stored.size(); ++i) {
    if (stored[i] == "--out") {
      ++i;
      continue;
    }
    if (stored[i].rfind("--out=", 0) == 0) continue;
    args.push_back(stored[i]);
  }
  args.push_back("--out");
  args.push_back(*out_override);
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-sample self-improvement dynamics toolkit"};
  app.fallthrough();
  app.set_version_flag("--version", std::string(E2H_VERSION));
  Globals g;
  ParamFlags pf;
  app.add_option("--config", g.config, "JSON file with TheoryParams keys");
  app.add_option("--seed", g.seed, "random seed (u64)");
  app.add_option("--out", g.out, "output directory")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--replay", g.replay, "re-run the command recorded in a manifest");
  add_param_flags(app, pf);

  IntervalsOpts io;
  auto* s_int = app.add_subcommand("intervals", "invariant, feasibility and improvement intervals");
  s_int->add_option("--a", io.a, "map scale(s) for I(a, nu)");

  ThresholdOpts to;
  auto* s_thr = app.add_subcommand("thresholds", "x(nu), nu_c, nu_T, nu* and the nu* profile");
  s_thr->add_option("--x0", to.x0, "initial value in (0, 1 - gamma)");
  s_thr->add_flag("--nu-c", to.nu_c_only, "only compute nu_c");
  s_thr->add_flag("--profile", to.profile, "write the nu* profile along beta'");
  s_thr->add_option("--delta-gap", to.delta_gap, "fixed beta - beta' for the profile");
  s_thr->add_option("--profile-lo", to.profile_lo);
  s_thr->add_option("--profile-hi", to.profile_hi);
  s_thr->add_option("--profile-points", to.profile_points);
  s_thr->add_option("--curve-points", to.curve_points);

  RegionsOpts ro;
  auto* s_reg = app.add_subcommand("regions", "error functional E and improvement condition N on a grid");
  s_reg->add_option("--x0", ro.x0, "initial values");
  s_reg->add_option("--nu-max", ro.nu_max);
  s_reg->add_option("--nu-points", ro.nu_points);

  ScanOpts so;
  auto* s_scan = app.add_subcommand("scan", "Monte-Carlo region-length panels");
  s_scan->add_option("--panel", so.panel, "a, b, c, d or all");
  s_scan->add_flag("--fast", so.fast, "reduced axis grids");
  s_scan->add_option("--x0-points", so.x0_points, "x0 grid resolution");

  SimulateOpts mo;
  auto* s_sim = app.add_subcommand("simulate", "generate-filter-update simulation");
  s_sim->add_option("--rounds", mo.rounds);
  s_sim->add_option("--replications", mo.replications)->check(CLI::PositiveNumber);
  s_sim->add_option("--Q", mo.Q, "questions in the synthetic world");
  s_sim->add_option("--v-target", mo.v_target, "initial expected reward");

  bool verify_fast = false;
  auto* s_ver = app.add_subcommand("verify", "run the property suite");
  s_ver->add_flag("--fast", verify_fast, "reduced grids");

  app.require_subcommand(0, 1);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << E2H_VERSION << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (g.replay) {
      if (!app.get_subcommands().empty()) throw UsageError("--replay takes no subcommand");
      const std::optional<std::string> out_override =
          app.get_option("--out")->count() > 0 ? std::optional<std::string>(g.out) : std::nullopt;
      return run(replay_args(*g.replay, out_override), out, err);
    }
    if (app.get_subcommands().empty()) {
      err << app.help();
      return kUsage;
    }
    CLI::App* sub = app.get_subcommands().front();
    std::vector<std::string> warnings;
    const TheoryParams p = resolve_params(g, pf, warnings);
    const DerivedConstants d = derive_constants(p);
    for (const auto& w : warnings) err << "warning: " << w << "\n";

    Outputs outputs;
    const auto t0 = std::chrono::steady_clock::now();
    int rc = kOk;
    const std::string name = sub->get_name();
    if (name == "intervals") {
      rc = cmd_intervals(io, p, d, outputs, out);
    } else if (name == "thresholds") {
      rc = cmd_thresholds(to, p, d, outputs, out);
    } else if (name == "regions") {
      rc = cmd_regions(ro, pf.nu.has_value() || (g.config && p.nu.has_value()), p, d, outputs, out);
    } else if (name == "scan") {
      rc = cmd_scan(so, g.threads, p, d, outputs, out);
    } else if (name == "simulate") {
      rc = cmd_simulate(mo, g, p, d, outputs, out);
    } else if (name == "verify") {
      rc = cmd_verify(verify_fast, g, p, outputs, out, err);
    }
    outputs.finish();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_outputs(g, name, args, p, d, outputs, secs);
    return rc;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const RootFindError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace e2h::cli
