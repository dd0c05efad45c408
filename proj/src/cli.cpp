#include "hol/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "hol/json_util.hpp"
#include "hol/verify.hpp"

namespace hol {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& s) {
  try {
    return parse_extended(s);
  } catch (const std::logic_error&) {
    throw PreconditionError("bad value '" + s + "' for " + key);
  }
}

int to_int(const std::string& key, const std::string& s) {
  const double d = to_double(key, s);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw PreconditionError("bad integer '" + s + "' for " + key);
  return static_cast<int>(d);
}

std::string csv_num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

ConstantsConfig constants_config(const CliOptions& o) {
  ConstantsConfig c;
  c.oracle.grid_points = o.grid_points;
  c.oracle.x_min = o.xmin;
  c.oracle.x_max = o.xmax;
  c.oracle.seed = o.seed;
  c.oracle.restarts = o.restarts;
  c.local.seed = o.seed;
  return c;
}

GammaConfig gamma_config(const CliOptions& o) {
  GammaConfig g;
  g.x_min = o.xmin;
  g.x_max = o.xmax;
  g.oracle = constants_config(o).oracle;
  return g;
}

TheoremData theorem_data(const CliOptions& o) {
  TheoremData d;
  d.u = weight_preset(o.u);
  d.v = weight_preset(o.v);
  d.w = weight_preset(o.w);
  d.k = kernel_preset(o.kernel);
  d.e = Exponents(to_double("p", o.p), to_double("r", o.r), to_double("q", o.q));
  return d;
}

void emit(const CliOptions& o, const std::string& file, const std::string& text) {
  if (o.out.empty()) return;
  std::filesystem::create_directories(o.out);
  std::ofstream f(std::filesystem::path(o.out) / file, std::ios::binary);
  if (!f) throw PreconditionError("cannot write " + file + " in " + o.out);
  f << text;
}

json artifact(const std::string& command, const CliOptions& o, json library_config) {
  return {{"command", command}, {"options", o.to_json()}, {"config", std::move(library_config)}};
}

int cmd_constants(const CliOptions& o, std::ostream& out) {
  const Theorem t = parse_theorem(o.theorem);
  const auto d = theorem_data(o);
  const auto cfg = constants_config(o);
  json j = artifact("constants", o, cfg.to_json());
  j["setup"] = d.to_json();
  j["result"] = compute_breakdown(t, d, cfg).to_json();
  const std::string s = j.dump(2) + "\n";
  emit(o, "constants.json", s);
  out << s;
  return kExitOk;
}

int cmd_oracle(const CliOptions& o, std::ostream& out) {
  const Theorem t = parse_theorem(o.theorem);
  const auto d = theorem_data(o);
  const auto cfg = constants_config(o);
  json j = artifact("oracle", o, cfg.oracle.to_json());
  j["setup"] = d.to_json();
  j["operator"] = to_string(theorem_operator(t));
  j["result"] = best_constant(parent_inequality(t, d), cfg.oracle).to_json();
  const std::string s = j.dump(2) + "\n";
  emit(o, "oracle.json", s);
  out << s;
  return kExitOk;
}

int cmd_maximal(const CliOptions& o, std::ostream& out) {
  GammaSetup s;
  s.p = to_double("p", o.p);
  s.q = to_double("q", o.q);
  s.u = weight_preset(o.u);
  s.v = weight_preset(o.v);
  const auto cfg = gamma_config(o);
  json j = artifact("maximal", o, cfg.to_json());
  j["setup"] = s.to_json();
  const auto m = maximal_constants(s, cfg);
  j["result"] = m.to_json();
  if (o.estimate) {
    const auto est = estimate_min_constant(s, cfg);
    j["estimate"] = est.to_json();
    j["estimate_over_total"] = num_json(div0(est.value.value(), m.total.value()));
  }
  const std::string text = j.dump(2) + "\n";
  emit(o, "maximal.json", text);
  out << text;
  return kExitOk;
}

int cmd_verify(const CliOptions& o, std::ostream& out) {
  VerifyConfig cfg;
  cfg.seed = o.seed;
  cfg.band_lo = o.band_lo;
  cfg.band_hi = o.band_hi;
  cfg.preset = o.preset;
  cfg.constants = constants_config(o);
  cfg.gamma = gamma_config(o);
  if (cfg.preset != "all") {
    const auto names = level_preset_names();
    if (std::find(names.begin(), names.end(), cfg.preset) == names.end()) {
      throw PreconditionError("unknown levels preset '" + cfg.preset + "'");
    }
  }
  std::vector<std::string> suites = suite_names();
  if (o.suite != "all") suites = {o.suite};
  json j = artifact("verify", o, cfg.to_json());
  j["suites"] = json::array();
  bool all = true;
  for (const auto& name : suites) {
    const auto r = run_suite(name, cfg);
    all = all && r.pass;
    out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.summary << "\n";
    j["suites"].push_back({{"name", r.name}, {"pass", r.pass}, {"summary", r.summary}, {"report", r.report}});
  }
  j["pass"] = all;
  emit(o, "verify.json", j.dump(2) + "\n");
  return all ? kExitOk : kExitFail;
}

int cmd_sweep(const CliOptions& o, std::ostream& out) {
  if (o.count < 1) throw PreconditionError("sweep count must be at least 1");
  if (!std::isfinite(o.start) || !std::isfinite(o.stop)) throw PreconditionError("sweep range must be finite");
  const Theorem t = parse_theorem(o.theorem);
  const auto base = theorem_data(o);
  const auto cfg = constants_config(o);
  static const std::vector<std::string> params = {"v.alpha", "u.alpha", "w.alpha", "p", "r", "q"};
  if (std::find(params.begin(), params.end(), o.param) == params.end()) {
    throw PreconditionError("unknown sweep parameter '" + o.param + "'");
  }
  json j = artifact("sweep", o, cfg.to_json());
  j["setup"] = base.to_json();
  j["points"] = json::array();
  std::string csv = "sweep_value,A0,A1,A2,total,oracle,ratio,pass\n";
  bool all = true;
  // points run one after another so rows come out in sweep order
  for (int i = 0; i < o.count; ++i) {
    const double x = o.count == 1 ? o.start : o.start + (o.stop - o.start) * i / (o.count - 1);
    TheoremData d = base;
    const WeightFn xa = WeightFn::power(x);
    if (o.param == "v.alpha") d.v = WeightFn::product({base.v, xa});
    if (o.param == "u.alpha") d.u = WeightFn::product({base.u, xa});
    if (o.param == "w.alpha") d.w = WeightFn::product({base.w, xa});
    if (o.param == "p") d.e = Exponents(x, base.e.r, base.e.q);
    if (o.param == "r") d.e = Exponents(base.e.p, x, base.e.q);
    if (o.param == "q") d.e = Exponents(base.e.p, base.e.r, x);
    const auto pt = equivalence_point(t, d, cfg, o.band_lo, o.band_hi);
    all = all && pt.report.pass;
    const auto& b = pt.breakdown;
    const bool sum = b.mode == "sum";
    auto term = [&](const TermResult& r) { return sum ? csv_num(r.value.value()) : std::string("nan"); };
    csv += csv_num(x) + "," + term(b.A0) + "," + term(b.A1) + "," + term(b.A2) + "," + csv_num(b.total.value()) + "," +
           csv_num(pt.oracle.value.value()) + "," + csv_num(pt.report.ratio) + "," + (pt.report.pass ? "true" : "false") +
           "\n";
    json pj = pt.to_json();
    pj["sweep_value"] = x;
    j["points"].push_back(pj);
  }
  j["pass"] = all;
  emit(o, "sweep.csv", csv);
  emit(o, "sweep.json", j.dump(2) + "\n");
  out << csv;
  return all ? kExitOk : kExitFail;
}

}  // namespace

void CliOptions::set(const std::string& key, const std::string& value) {
  static const std::map<std::string, std::function<void(CliOptions&, const std::string&)>> setters = {
      {"theorem", [](CliOptions& o, const std::string& s) { o.theorem = s; }},
      {"kernel", [](CliOptions& o, const std::string& s) { o.kernel = s; }},
      {"u", [](CliOptions& o, const std::string& s) { o.u = s; }},
      {"v", [](CliOptions& o, const std::string& s) { o.v = s; }},
      {"w", [](CliOptions& o, const std::string& s) { o.w = s; }},
      {"p", [](CliOptions& o, const std::string& s) { o.p = s; }},
      {"r", [](CliOptions& o, const std::string& s) { o.r = s; }},
      {"q", [](CliOptions& o, const std::string& s) { o.q = s; }},
      {"grid-points", [](CliOptions& o, const std::string& s) { o.grid_points = to_int("grid-points", s); }},
      {"xmin", [](CliOptions& o, const std::string& s) { o.xmin = to_double("xmin", s); }},
      {"xmax", [](CliOptions& o, const std::string& s) { o.xmax = to_double("xmax", s); }},
      {"seed", [](CliOptions& o, const std::string& s) { o.seed = static_cast<std::uint64_t>(to_int("seed", s)); }},
      {"restarts", [](CliOptions& o, const std::string& s) { o.restarts = to_int("restarts", s); }},
      {"band-lo", [](CliOptions& o, const std::string& s) { o.band_lo = to_double("band-lo", s); }},
      {"band-hi", [](CliOptions& o, const std::string& s) { o.band_hi = to_double("band-hi", s); }},
      {"out", [](CliOptions& o, const std::string& s) { o.out = s; }},
      {"suite", [](CliOptions& o, const std::string& s) { o.suite = s; }},
      {"preset", [](CliOptions& o, const std::string& s) { o.preset = s; }},
      {"param", [](CliOptions& o, const std::string& s) { o.param = s; }},
      {"start", [](CliOptions& o, const std::string& s) { o.start = to_double("start", s); }},
      {"stop", [](CliOptions& o, const std::string& s) { o.stop = to_double("stop", s); }},
      {"count", [](CliOptions& o, const std::string& s) { o.count = to_int("count", s); }},
      {"estimate", [](CliOptions& o, const std::string& s) { o.estimate = s == "true" || s == "1"; }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw PreconditionError("unknown config key '" + key + "'");
  it->second(*this, value);
}

void CliOptions::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read config file " + path);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw PreconditionError(path + ":" + std::to_string(no) + ": expected key = value");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

json CliOptions::to_json() const {
  return {{"theorem", theorem}, {"kernel", kernel},   {"u", u},         {"v", v},
          {"w", w},             {"p", p},             {"r", r},         {"q", q},
          {"grid-points", grid_points}, {"xmin", xmin}, {"xmax", xmax}, {"seed", seed},
          {"restarts", restarts},       {"band-lo", band_lo}, {"band-hi", band_hi}, {"suite", suite},
          {"preset", preset},           {"param", param},     {"start", start},     {"stop", stop},
          {"count", count},             {"estimate", estimate}};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliOptions o;
  try {
    if (const char* path = std::getenv("HOL_CONFIG"); path != nullptr && *path != '\0') o.load_file(path);
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }

  CLI::App app{"Weighted inequality constants, best-constant oracle and verification suites", "hol"};
  app.require_subcommand(1, 1);
  auto* constants = app.add_subcommand("constants", "Characterization constants A0, A1, A2 of a theorem");
  auto* oracle = app.add_subcommand("oracle", "Best-constant lower bound for a theorem's inequality");
  auto* maximal = app.add_subcommand("maximal", "Constants for the maximal operator between Gamma spaces");
  auto* verify = app.add_subcommand("verify", "Run verification suites");
  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter; CSV of constants against the oracle");

  auto numeric = [&](CLI::App* c) {
    c->add_option("--grid-points", o.grid_points, "Oracle mesh cells");
    c->add_option("--xmin", o.xmin, "Lower end of the working window");
    c->add_option("--xmax", o.xmax, "Upper end of the working window");
    c->add_option("--seed", o.seed, "Random seed");
    c->add_option("--restarts", o.restarts, "Oracle restarts");
    c->add_option("--out", o.out, "Directory for JSON/CSV artifacts");
  };
  auto weights = [&](CLI::App* c, bool with_w) {
    c->add_option("--u", o.u, "Weight u: one, sqrt, exp, chi01, x^a, JSON text or file");
    c->add_option("--v", o.v, "Weight v");
    if (with_w) c->add_option("--w", o.w, "Weight w");
  };
  auto theorem = [&](CLI::App* c) {
    c->add_option("--theorem", o.theorem, "2.1, 2.2, 3.1, 3.2, 4.1, 4.2, 5.1 or 5.2");
    c->add_option("--kernel", o.kernel, "indicator, difference, difference^b, log_ratio, JSON text or file");
    weights(c, true);
    c->add_option("--p", o.p, "Source exponent (number or inf)");
    c->add_option("--r", o.r, "Target exponent");
    c->add_option("--q", o.q, "Inner exponent");
    numeric(c);
  };
  auto bands = [&](CLI::App* c) {
    c->add_option("--band-lo", o.band_lo, "Lower end of the oracle/total band");
    c->add_option("--band-hi", o.band_hi, "Upper end of the oracle/total band");
  };
  theorem(constants);
  theorem(oracle);
  theorem(sweep);
  bands(sweep);
  sweep->add_option("--param", o.param, "v.alpha, u.alpha, w.alpha, p, r or q");
  sweep->add_option("--start", o.start, "First sweep value");
  sweep->add_option("--stop", o.stop, "Last sweep value");
  sweep->add_option("--count", o.count, "Number of sweep values");
  weights(maximal, false);
  maximal->add_option("--p", o.p, "Exponent of the source Gamma space");
  maximal->add_option("--q", o.q, "Exponent of the target Gamma space");
  maximal->add_flag("--estimate", o.estimate, "Also run the estimator on the nonincreasing cone");
  numeric(maximal);
  verify->add_option("--suite", o.suite, "all or one suite name");
  verify->add_option("--preset", o.preset, "Levels preset: all, one, sqrt, exp or chi01");
  bands(verify);
  numeric(verify);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }

  try {
    if (constants->parsed()) return cmd_constants(o, out);
    if (oracle->parsed()) return cmd_oracle(o, out);
    if (maximal->parsed()) return cmd_maximal(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    return cmd_sweep(o, out);
  } catch (const PreconditionError& e) {
    err << "precondition: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const DiagnosticError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const nlohmann::json::exception& e) {
    err << "precondition: " << e.what() << "\n";
    return kExitPrecondition;
  }
}

}  // namespace hol
