// transop command-line front end: invariant | simulate | verify | schur.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "transop/transop.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace transop;

namespace {

struct RunConfig {
  std::string command;
  std::string system = "doubling";
  double u = 0.3;
  double a = 0.5;
  int m = 1;
  long K = 10000;
  int N = 2;
  std::size_t grid_n = 1024;
  std::size_t paths = 100000;
  std::size_t steps = 10;
  std::uint64_t master_seed = kDefaultMasterSeed;
  unsigned threads = default_threads();
  std::string out = ".";
  std::string suite = "all";
  std::string function;
  double radius = 0.9;
  bool timing = false;
  std::string inject_fault;
};

// Threads and timing never change results, so they stay out of the report unless --timing is given.
json config_json(const RunConfig& c) {
  json j{{"command", c.command}, {"system", c.system}, {"u", c.u},           {"a", c.a},
         {"m", c.m},             {"K", c.K},           {"N", c.N},           {"grid_n", c.grid_n},
         {"paths", c.paths},     {"steps", c.steps},   {"master_seed", c.master_seed}, {"suite", c.suite},
         {"function", c.function}, {"radius", c.radius}, {"inject_fault", c.inject_fault}};
  if (c.timing) j["threads"] = c.threads;
  return j;
}

void load_config_file(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path);
  const json j = json::parse(in);
  if (!j.is_object()) throw Error("config file must hold a JSON object");
  static const std::set<std::string> known{"system", "u",           "a",       "m",     "K",        "N",      "grid_n",
                                           "paths",  "steps",       "master_seed", "threads", "out", "suite", "function",
                                           "radius", "timing",      "inject_fault"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error("unknown config key '" + k + "'");
  auto get = [&](const char* k, auto& dst) {
    if (j.contains(k)) j.at(k).get_to(dst);
  };
  get("system", c.system);
  get("u", c.u);
  get("a", c.a);
  get("m", c.m);
  get("K", c.K);
  get("N", c.N);
  get("grid_n", c.grid_n);
  get("paths", c.paths);
  get("steps", c.steps);
  get("master_seed", c.master_seed);
  get("threads", c.threads);
  get("out", c.out);
  get("suite", c.suite);
  get("function", c.function);
  get("radius", c.radius);
  get("timing", c.timing);
  get("inject_fault", c.inject_fault);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& p, const std::vector<std::string>& header) : path_(p), out_(p, std::ios::binary) {
    if (!out_) throw Error("cannot write " + p.string());
    row(header);
    rows_ = 0;
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    ++rows_;
  }
  json manifest_entry() const { return {{"file", path_.filename().string()}, {"rows", rows_}}; }

 private:
  fs::path path_;
  std::ofstream out_;
  std::size_t rows_ = 0;
};

struct Report {
  json checks = json::array();
  json manifest = json::array();
  json results = json::object();
  bool ok = true;

  void add(const verify::CheckRecord& r, bool timing) {
    json j{{"name", r.name},          {"status", r.pass ? "pass" : "fail"}, {"statistic", r.statistic},
           {"threshold", r.threshold}, {"relation", r.relation},            {"detail", r.detail}};
    if (std::isnan(r.statistic)) j["statistic"] = nullptr;
    if (timing) j["runtime_ms"] = r.runtime_ms;
    checks.push_back(std::move(j));
    ok = ok && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  " << r.statistic << " " << r.relation << " " << r.threshold;
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
    std::cout << '\n';
  }
};

verify::CheckRecord check(const std::string& name, double stat, double thr, const std::string& rel, std::string detail = {}) {
  verify::CheckRecord r{name, false, stat, thr, rel, 0, std::move(detail)};
  r.pass = !std::isnan(stat) && (rel == "<=" ? stat <= thr : stat >= thr);
  return r;
}

int finish(const RunConfig& c, Report& rep) {
  json j{{"version", TRANSOP_VERSION}, {"config", config_json(c)}, {"checks", rep.checks}, {"manifest", rep.manifest}};
  if (!rep.results.empty()) j["results"] = rep.results;
  const fs::path p = fs::path(c.out) / "report.json";
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << j.dump(2) << '\n';
  return rep.ok ? 0 : 1;
}

std::optional<double> param_suffix(const std::string& system, const std::string& prefix) {
  if (system.rfind(prefix, 0) != 0 || system.size() == prefix.size()) return std::nullopt;
  return std::stod(system.substr(prefix.size()));
}

// Accepts "fejer-m" / "parametric-u" / "bernoulli-a" with or without the numeric suffix.
void resolve_system(RunConfig& c) {
  if (auto v = param_suffix(c.system, "fejer-")) c.m = static_cast<int>(*v), c.system = "fejer-m";
  if (auto v = param_suffix(c.system, "parametric-")) c.u = *v, c.system = "parametric-u";
  if (auto v = param_suffix(c.system, "bernoulli-")) c.a = *v, c.system = "bernoulli-a";
  static const std::set<std::string> known{"logistic", "doubling", "random-control", "gauss",        "cantor",     "halving",
                                           "haar",     "fejer-m",  "schur-random",   "bernoulli-a", "parametric-u"};
  if (!known.count(c.system)) throw Error("unknown system '" + c.system + "'");
}

// Fejer kernel: coefficients (2m+1-|n|)/(2m+1), |n| <= 2m.
CosinePolynomial fejer_h(int m) {
  std::vector<double> c(static_cast<std::size_t>(2 * m + 1));
  for (int n = 0; n <= 2 * m; ++n) c[static_cast<std::size_t>(n)] = static_cast<double>(2 * m + 1 - n) / (2 * m + 1);
  return CosinePolynomial(c);
}

void write_density(const RunConfig& c, Report& rep, const DiscreteMeasure& mu, const std::optional<DiscreteMeasure>& ref) {
  CsvWriter w(fs::path(c.out) / "invariant.csv", {"x_mid", "density", "reference_density", "abs_err"});
  const auto& g = mu.grid();
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double d = mu[i] / g.width();
    if (ref) {
      const double r = (*ref)[i] / g.width();
      w.row({num(g.node(i)), num(d), num(r), num(std::abs(d - r))});
    } else {
      w.row({num(g.node(i)), num(d), "", ""});
    }
  }
  rep.manifest.push_back(w.manifest_entry());
}

int cmd_invariant(const RunConfig& c) {
  Report rep;
  const std::size_t n = c.grid_n;
  const UlamOptions opt{std::nullopt, 8, c.threads};
  std::optional<DiscreteMeasure> ref;
  double l1_tol = 0.03;
  auto ulam = [&](const auto& op) {
    const auto st = power_iterate(build_ulam(op, op.grid(), opt), 1e-12, 20000);
    rep.add(check("power-iteration-residual", st.residual, 1e-10, "<=", "iterations " + std::to_string(st.iterations)), c.timing);
    return st.measure;
  };
  std::optional<DiscreteMeasure> mu;
  if (c.system == "doubling") {
    mu = ulam(systems::doubling(n));
    ref = DiscreteMeasure::uniform(mu->grid());
    l1_tol = 1e-6;
  } else if (c.system == "logistic") {
    mu = ulam(systems::logistic(n));
    ref = reference::arcsine_measure(mu->grid());
  } else if (c.system == "random-control") {
    mu = ulam(systems::random_control(n));
    ref = reference::arcsine_measure(mu->grid());
  } else if (c.system == "gauss") {
    mu = ulam(systems::gauss(n, c.K));
    ref = reference::gauss_measure(mu->grid());
    l1_tol = 0.02;
  } else if (c.system == "parametric-u") {
    mu = ulam(systems::parametric(c.u, n));
  } else if (c.system == "haar") {
    mu = ulam(systems::circle(WaveletFilter::haar(), n));
    ref = DiscreteMeasure::uniform(mu->grid());
  } else if (c.system == "fejer-m") {
    mu = ulam(systems::circle(WaveletFilter::stretched_haar(c.m), n));
  } else if (c.system == "cantor" || c.system == "halving" || c.system == "bernoulli-a") {
    const auto ifs = c.system == "cantor" ? systems::cantor() : c.system == "halving" ? systems::halving() : systems::bernoulli(c.a);
    const double r = c.system == "bernoulli-a" ? systems::bernoulli_radius(c.a) : 1.0;
    const Grid g = c.system == "bernoulli-a" ? Grid::interval(-r, r, n) : Grid::unit_interval(n);
    const auto h = hutchinson_iterate(ifs, DiscreteMeasure::uniform(g), 60);
    mu = h.stationary.measure;
    double worst = 0;
    for (double q : h.ratios) worst = std::max(worst, q);
    rep.add(check("contraction-ratio", worst, ifs.alpha_bound() + 2.0 / static_cast<double>(n), "<="), c.timing);
    if (c.system == "cantor") {
      rep.add(check("cantor-mean-error", std::abs(mu->mean() - 0.5), 1e-3, "<="), c.timing);
      rep.add(check("cantor-variance-error", std::abs(mu->variance() - 0.125), 1e-3, "<="), c.timing);
    } else if (c.system == "halving" || c.a == 0.5) {
      ref = DiscreteMeasure::uniform(g);
    }
  } else {
    throw Error("system '" + c.system + "' has no transfer form");
  }
  write_density(c, rep, *mu, ref);
  if (ref) rep.add(check("l1-to-reference", reference::density_l1(*mu, *ref), l1_tol, "<="), c.timing);
  return finish(c, rep);
}

struct SimSetup {
  std::optional<RealMap> sigma;
  bool circle = false;
  std::function<std::optional<DiscreteMeasure>(std::size_t)> law_at;  // reference law of step k, when known
};

auto stationary(std::optional<DiscreteMeasure> mu) {
  return [mu = std::move(mu)](std::size_t) { return mu; };
}

template <Sampler S>
int simulate_with(const RunConfig& c, const S& sampler, const SimSetup& setup, const Grid& hist_grid) {
  Report rep;
  const auto pe = simulate_paths(sampler, c.paths, c.steps, c.master_seed, c.threads);
  {
    std::vector<std::string> head{"path"};
    for (std::size_t k = 0; k <= c.steps; ++k) head.push_back("x" + std::to_string(k));
    CsvWriter w(fs::path(c.out) / "paths.csv", head);
    for (std::size_t p = 0; p < std::min<std::size_t>(100, pe.n_paths); ++p) {
      std::vector<std::string> row{std::to_string(p)};
      for (double x : pe.path(p)) row.push_back(num(x));
      w.row(row);
    }
    rep.manifest.push_back(w.manifest_entry());
  }
  {
    CsvWriter w(fs::path(c.out) / "marginals.csv", {"step", "bin_lower", "bin_upper", "mass"});
    for (std::size_t k = 0; k <= c.steps; ++k) {
      const auto h = histogram(pe.sample(k), hist_grid);
      for (std::size_t i = 0; i < hist_grid.n(); ++i)
        w.row({std::to_string(k), num(hist_grid.cell_lower(i)), num(hist_grid.cell_upper(i)), num(h[i])});
    }
    rep.manifest.push_back(w.manifest_entry());
  }
  if (setup.sigma && c.steps > 0)
    rep.add(check("solenoid-constraint-violations", static_cast<double>(solenoid_violations(pe, *setup.sigma, setup.circle)), 0, "<="),
            c.timing);
  if (setup.law_at && setup.law_at(0)) {
    double worst = 0;
    for (std::size_t k = 0; k <= c.steps; ++k) worst = std::max(worst, ks_distance(pe.sample(k), *setup.law_at(k)));
    rep.add(check("marginal-ks-max", worst, 0.02, "<="), c.timing);
  }
  rep.results["seed"] = {{"master_seed", pe.seed.master_seed}, {"first_stream", pe.seed.stream_id}};
  rep.results["system"] = pe.system;
  return finish(c, rep);
}

int cmd_simulate(const RunConfig& c) {
  const Grid unit = Grid::unit_interval(c.grid_n);
  const Grid ref_grid = Grid::unit_interval(4096);
  auto branch = [&](const BranchSystem& bs, InitialLaw init, auto law_at) {
    return simulate_with(c, BranchSampler(bs, std::move(init)), {bs.sigma_map(), bs.grid().is_circle(), law_at},
                         bs.grid().is_circle() ? Grid::circle(c.grid_n) : unit);
  };
  // Started from h dt, step k of the circle chain has density |m^(k)|^2 h.
  auto circle = [&](const WaveletFilter& f, const CosinePolynomial& h) {
    const Grid fine = Grid::circle(1 << 16);
    const auto init = InitialLaw::from_measure(pi_k_distribution(f, h, 0, fine).normalized());
    return branch(systems::circle_chain(f, h, c.grid_n), init,
                  [f, h, fine](std::size_t k) -> std::optional<DiscreteMeasure> {
                    return pi_k_distribution(f, h, static_cast<int>(k), fine).normalized();
                  });
  };
  if (c.system == "doubling")
    return branch(systems::doubling(c.grid_n), InitialLaw::uniform(), stationary(DiscreteMeasure::uniform(ref_grid)));
  if (c.system == "logistic")
    return branch(systems::logistic(c.grid_n), InitialLaw::arcsine(), stationary(reference::arcsine_measure(ref_grid)));
  if (c.system == "parametric-u") return branch(systems::parametric(c.u, c.grid_n), InitialLaw::uniform(), stationary(std::nullopt));
  if (c.system == "haar") return circle(WaveletFilter::haar(), CosinePolynomial::constant(1.0));
  if (c.system == "fejer-m") return circle(WaveletFilter::stretched_haar(c.m), fejer_h(c.m));
  if (c.system == "random-control") {
    const auto cs = systems::random_control(c.grid_n);
    return simulate_with(c, ControlledSampler(cs, InitialLaw::arcsine()), {std::nullopt, false, stationary(reference::arcsine_measure(ref_grid))}, unit);
  }
  if (c.system == "gauss") {
    const GaussBackwardSampler gs(c.K);
    // 0 and 1 are identified: 1/x can round just below an integer.
    return simulate_with(c, gs, {RealMap([](double x) { return 1.0 / x - std::floor(1.0 / x); }), true, stationary(reference::gauss_measure(ref_grid))},
                         unit);
  }
  if (c.system == "cantor" || c.system == "halving") {
    const auto ifs = c.system == "cantor" ? systems::cantor() : systems::halving();
    std::optional<DiscreteMeasure> law;
    if (c.system == "halving") law = DiscreteMeasure::uniform(ref_grid);
    return simulate_with(c, IfsSampler(ifs, InitialLaw::uniform(), unit), {std::nullopt, false, stationary(law)}, unit);
  }
  if (c.system == "bernoulli-a") {
    const double r = systems::bernoulli_radius(c.a);
    const Grid g = Grid::interval(-r, r, c.grid_n);
    std::optional<DiscreteMeasure> law;
    if (c.a == 0.5) law = DiscreteMeasure::uniform(Grid::interval(-r, r, 4096));
    return simulate_with(c, IfsSampler(systems::bernoulli(c.a), InitialLaw::uniform(-r, r), g), {std::nullopt, false, stationary(law)}, g);
  }
  throw Error("system '" + c.system + "' has no sampler");
}

int cmd_verify(const RunConfig& c) {
  Report rep;
  const verify::Options o{c.master_seed, c.threads, c.inject_fault};
  for (const auto& r : verify::run_suite(c.suite, o)) rep.add(r, c.timing);
  return finish(c, rep);
}

cplx parse_complex(std::string s) {
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  if (s.empty()) throw Error("empty complex number");
  if (s.back() != 'i') return {std::stod(s), 0.0};
  s.pop_back();
  // Split at the last sign that is not an exponent sign or the leading sign.
  std::size_t cut = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;)
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      cut = i;
      break;
    }
  auto part = [](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return std::stod(t);
  };
  if (cut == std::string::npos) return {0.0, part(s)};
  return {std::stod(s.substr(0, cut)), part(s.substr(cut))};
}

std::vector<cplx> parse_list(const std::string& s) {
  std::vector<cplx> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) v.push_back(parse_complex(item));
  return v;
}

// "constant:c" | "blaschke:a1;a2;..." | "rational:p0;p1;...|q0;q1;..."
SchurFunction parse_function(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error("malformed function '" + text + "'");
  const std::string kind = text.substr(0, colon), body = text.substr(colon + 1);
  try {
    if (kind == "constant") return SchurFunction::constant(parse_complex(body));
    if (kind == "blaschke") return blaschke(parse_list(body));
    if (kind == "rational") {
      const auto bar = body.find('|');
      if (bar == std::string::npos) throw Error("rational function needs numerator|denominator");
      return SchurFunction::rational(parse_list(body.substr(0, bar)), parse_list(body.substr(bar + 1)));
    }
  } catch (const std::invalid_argument&) {
    throw Error("malformed function '" + text + "'");
  }
  throw Error("unknown function kind '" + kind + "'");
}

int cmd_schur(const RunConfig& c) {
  Report rep;
  const int depth = static_cast<int>(std::max<std::size_t>(1, c.steps));
  std::vector<std::string> head{"sequence"};
  for (int k = 0; k < depth; ++k) {
    head.push_back("rho" + std::to_string(k) + "_re");
    head.push_back("rho" + std::to_string(k) + "_im");
  }
  head.push_back("terminated");
  head.push_back("roundtrip_residual");
  CsvWriter w(fs::path(c.out) / "schur_params.csv", head);
  auto emit = [&](std::size_t idx, const SchurParams& p, double residual) {
    std::vector<std::string> row{std::to_string(idx)};
    for (int k = 0; k < depth; ++k) {
      const cplx v = k < static_cast<int>(p.params.size()) ? p.params[static_cast<std::size_t>(k)] : cplx{};
      row.push_back(num(v.real()));
      row.push_back(num(v.imag()));
    }
    row.push_back(p.terminated ? "1" : "0");
    row.push_back(num(residual));
    w.row(row);
  };
  if (!c.function.empty()) {
    const auto s = parse_function(c.function);
    // Walk the steps by hand so an identically zero remainder (exact zero tail) is visible.
    SchurParams p;
    bool zero_tail = false;
    SchurFunction cur = s;
    for (int d = 0; d < depth; ++d) {
      auto st = schur_step(cur);
      p.params.push_back(st.rho);
      if (st.terminated) {
        p.terminated = true;
        p.terminal_defect = st.terminal_defect;
        break;
      }
      cur = std::move(*st.next);
      if (cur.is_rational() && cur.numerator().size() == 1 && cur.numerator()[0] == 0.0) {
        zero_tail = true;
        break;
      }
    }
    const bool exact = p.terminated || zero_tail;
    // Otherwise s and its truncation agree to order z^depth, so |difference| <= 2 |z|^depth on |z| <= r.
    const double r = exact ? 0.9 : 0.5;
    const double tol = exact ? 1e-8 : 2.0 * std::pow(r, depth) + 1e-12;
    Stream st(c.master_seed, kAuxStreamBase);
    double res = 0;
    for (int t = 0; t < 64; ++t) {
      const cplx z = std::polar(r * std::sqrt(st.uniform()), 2.0 * std::numbers::pi * st.uniform());
      res = std::max(res, std::abs(s(z) - eval_from_params(p, z, depth)));
    }
    emit(0, p, res);
    rep.results["terminated"] = p.terminated;
    rep.results["exact_zero_tail"] = zero_tail;
    rep.results["parameters"] = p.params.size();
    rep.add(check("reconstruction-residual", res, tol, "<=",
                  p.terminated ? "finite Blaschke product" : zero_tail ? "zero tail" : "truncated at depth " + std::to_string(depth)),
            c.timing);
  } else {
    if (c.system != "schur-random") throw Error("schur: give --function or --system schur-random");
    const auto nu = DiskLaw::uniform(c.radius);
    double worst = 0;
    for (std::size_t i = 0; i < c.paths; ++i) {
      Stream st(c.master_seed, i);
      const auto p = sample_random_schur(nu, depth, st);
      const auto q = extract_params(function_from_params(p, 3 * depth), depth);
      double r = q.params.size() == p.params.size() ? 0.0 : 1.0;
      for (std::size_t k = 0; k < std::min(p.params.size(), q.params.size()); ++k) r = std::max(r, std::abs(p.params[k] - q.params[k]));
      worst = std::max(worst, r);
      emit(i, p, r);
    }
    rep.add(check("roundtrip-max-residual", worst, 1e-8, "<="), c.timing);
  }
  rep.manifest.push_back(w.manifest_entry());
  return finish(c, rep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transop: transfer operators, Markov chains, solenoids, wavelet filters and Schur parameters"};
  app.set_version_flag("--version", std::string(TRANSOP_VERSION));
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_file;

  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"invariant", "simulate", "verify", "schur"}) subs[name] = app.add_subcommand(name);
  subs["invariant"]->description("Invariant measure by Ulam or Hutchinson iteration; writes invariant.csv");
  subs["simulate"]->description("Sample chain paths; writes paths.csv and marginals.csv");
  subs["verify"]->description("Run a verification suite; writes report.json");
  subs["schur"]->description("Schur parameters of a function or of random draws; writes schur_params.csv");

  // Every subcommand takes the same flags; flags override the config file.
  RunConfig flags;
  std::vector<CLI::Option*> given;
  for (auto& [name, sub] : subs) {
    given.push_back(sub->add_option("--system", flags.system, "built-in system"));
    given.push_back(sub->add_option("--grid-n", flags.grid_n, "grid cells")->check(CLI::Range(2, 1 << 22)));
    given.push_back(sub->add_option("--paths", flags.paths, "number of paths (schur: number of sequences)")->check(CLI::PositiveNumber));
    given.push_back(sub->add_option("--steps", flags.steps, "steps per path (schur: depth)"));
    given.push_back(sub->add_option("--master-seed", flags.master_seed, "master seed"));
    given.push_back(sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::Range(1, 1024)));
    given.push_back(sub->add_option("--out", flags.out, "output directory"));
    given.push_back(sub->add_option("--suite", flags.suite, "verification suite")
                        ->check(CLI::IsMember({"operators", "chains", "solenoid", "wavelet", "schur", "all"})));
    given.push_back(sub->add_option("--u", flags.u, "parametric system u"));
    given.push_back(sub->add_option("--a", flags.a, "Bernoulli contraction a"));
    given.push_back(sub->add_option("--m", flags.m, "Fejer parameter m"));
    given.push_back(sub->add_option("--K", flags.K, "Gauss truncation"));
    given.push_back(sub->add_option("--radius", flags.radius, "disk radius for random Schur parameters"));
    given.push_back(sub->add_option("--function", flags.function, "constant:c | blaschke:a1;a2 | rational:p0;p1|q0;q1"));
    given.push_back(sub->add_flag("--timing", flags.timing, "include runtimes and thread count in the report"));
    given.push_back(sub->add_option("--inject-fault", flags.inject_fault, "fault fixture (misnormalized-filter)"));
    sub->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (auto& [name, sub] : subs)
      if (sub->parsed()) cfg.command = name;
    if (!config_file.empty()) load_config_file(config_file, cfg);
    for (auto* opt : given) {
      if (opt->count() == 0) continue;
      const std::string n = opt->get_name();
      if (n == "--system") cfg.system = flags.system;
      else if (n == "--grid-n") cfg.grid_n = flags.grid_n;
      else if (n == "--paths") cfg.paths = flags.paths;
      else if (n == "--steps") cfg.steps = flags.steps;
      else if (n == "--master-seed") cfg.master_seed = flags.master_seed;
      else if (n == "--threads") cfg.threads = flags.threads;
      else if (n == "--out") cfg.out = flags.out;
      else if (n == "--suite") cfg.suite = flags.suite;
      else if (n == "--u") cfg.u = flags.u;
      else if (n == "--a") cfg.a = flags.a;
      else if (n == "--m") cfg.m = flags.m;
      else if (n == "--K") cfg.K = flags.K;
      else if (n == "--radius") cfg.radius = flags.radius;
      else if (n == "--function") cfg.function = flags.function;
      else if (n == "--timing") cfg.timing = flags.timing;
      else if (n == "--inject-fault") cfg.inject_fault = flags.inject_fault;
    }
    if (cfg.command != "verify" && !(cfg.command == "schur" && !cfg.function.empty())) resolve_system(cfg);
    fs::create_directories(cfg.out);
    if (cfg.command == "invariant") return cmd_invariant(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    return cmd_schur(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
