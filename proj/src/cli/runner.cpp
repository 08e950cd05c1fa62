#include "runner.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "symld/bridge.hpp"
#include "symld/errors.hpp"
#include "symld/exact.hpp"
#include "symld/rate.hpp"
#include "symld/sampler.hpp"
#include "symld/transport.hpp"
#include "verify.hpp"

namespace symld::cli {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json number_or_inf(double v) {
  if (std::isinf(v)) return Json(v > 0 ? "inf" : "-inf");
  return Json(v);
}

// 64-bit FNV-1a over the canonical config dump
std::string config_digest(const ExperimentConfig& cfg) {
  const std::string s = config_to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FirstLayerSampler layer1_from_param(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("layer1 must be fixed:<file> or iid:<file>");
  const std::string mode = spec.substr(0, colon);
  const std::string path = spec.substr(colon + 1);
  if (mode == "fixed") return FirstLayerSampler::fixed(sample_from_json(load_json_file(path)));
  if (mode == "iid") return FirstLayerSampler::iid(measure_from_json(load_json_file(path)));
  throw ConfigError("layer1 mode must be fixed or iid");
}

std::string run_sample(const ExperimentConfig& cfg) {
  const int n = cfg.params.at("n").get<int>();
  const std::int64_t draws = cfg.params.at("draws").get<std::int64_t>();
  const auto layer1 = layer1_from_param(cfg.params.at("layer1").get<std::string>());
  RngHandle rng(*cfg.seed);
  const int k = layer1.alphabet()->size();
  std::ostringstream os;
  os << "draw_id";
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) os << ",p_" << i << "_" << j;
  os << "\n";
  for (std::int64_t d = 0; d < draws; ++d) {
    const PairMeasure v = sample_two_layer(layer1, n, rng);
    os << d;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) os << ',' << num(v.weight(i, j));
    os << "\n";
  }
  return os.str();
}

std::string run_exact_ld(const ExperimentConfig& cfg) {
  const auto mu = measure_from_json(load_json_file(cfg.params.at("mu").get<std::string>()));
  const auto target = pair_measure_from_json(load_json_file(cfg.params.at("target").get<std::string>()));
  const std::int64_t n = cfg.params.at("n").get<std::int64_t>();
  const int k = mu.size();
  std::vector<std::int64_t> counts(k);
  for (int i = 0; i < k; ++i) counts[i] = std::llround(n * mu.weight(i));
  const auto table = nearest_feasible_table(target.weights(), MarginVector(counts));
  const double rate = finite_n_rate(target, mu, n);
  const double limit = rate_fixed_sample(target, mu);
  std::ostringstream os;
  os << "n";
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) os << ",m_" << i << "_" << j;
  os << ",log_prob_exact,rate_gap\n" << n;
  for (auto c : table.cells.v) os << ',' << c;
  os << ',' << num(-rate * static_cast<double>(n)) << ','
     << num(std::isinf(limit) ? INFINITY : std::abs(rate - limit)) << "\n";
  return os.str();
}

std::string run_rate(const ExperimentConfig& cfg) {
  const std::string which = cfg.params.at("rate").get<std::string>();
  const auto nu = pair_measure_from_json(load_json_file(cfg.params.at("nu").get<std::string>()));
  const auto mu = measure_from_json(load_json_file(cfg.params.at("mu").get<std::string>()));
  double value = 0.0;
  if (which == "I") {
    value = rate_fixed_sample(nu, mu);
  } else if (which == "J") {
    value = rate_two_layer(nu, RateOracle::sanov(mu));
  } else {
    throw ConfigError("rate must be I or J");
  }
  return Json{{"value", number_or_inf(value)}}.dump(2) + "\n";
}

std::string run_project(const ExperimentConfig& cfg) {
  const auto ref = pair_measure_from_json(load_json_file(cfg.params.at("reference").get<std::string>()));
  ConstraintSet cs;
  if (cfg.params.contains("common_marginal")) {
    cs.common_marginal =
        measure_from_json(load_json_file(cfg.params.at("common_marginal").get<std::string>()));
  }
  if (cfg.params.contains("observables")) {
    for (const auto& ob : cfg.params.at("observables")) {
      const auto& g = ob.at("g");
      Grid2<double> grid(ref.size(), ref.size(), 0.0);
      for (int i = 0; i < ref.size(); ++i)
        for (int j = 0; j < ref.size(); ++j) grid(i, j) = g.at(i).at(j).get<double>();
      cs.observables.push_back(Observable{std::move(grid), ob.at("target").get<double>()});
    }
  }
  if (cfg.params.contains("ball")) {
    const auto& b = cfg.params.at("ball");
    cs.ball = BallConstraint{
        pair_measure_from_json(load_json_file(b.at("center").get<std::string>())),
        b.at("radius").get<double>()};
  }
  const auto r = entropy_project(ref, cs);
  Json minim = pair_measure_to_json(r.minimizer);
  return Json{{"minimizer", minim},
              {"value", number_or_inf(r.value)},
              {"residuals", Json{{"marginal", r.marginal_residual}, {"observable", r.observable_gap}}},
              {"certified", r.certified}}
             .dump(2) +
         "\n";
}

std::string run_transport(const ExperimentConfig& cfg) {
  const std::string op = cfg.params.at("op").get<std::string>();
  if (op == "wasserstein") {
    if (!cfg.params.contains("rho") || !cfg.params.contains("nu")) {
      throw ConfigError("transport wasserstein requires rho and nu");
    }
    const Json jr = load_json_file(cfg.params.at("rho").get<std::string>());
    const Json jn = load_json_file(cfg.params.at("nu").get<std::string>());
    const std::string ground =
        cfg.params.contains("ground") ? cfg.params.at("ground").get<std::string>() : "dt";
    WassersteinResult res;
    if (jr.contains("pair_weights")) {
      const auto rho = pair_measure_from_json(jr);
      const auto nu = pair_measure_from_json(jn);
      PairMode mode = PairMode::sum;
      BaseMetric base = BaseMetric::tilde;
      if (ground == "d2max") {
        mode = PairMode::max;
        base = BaseMetric::plain;
      } else if (ground == "d2sum") {
        mode = PairMode::sum;
        base = BaseMetric::plain;
      } else if (ground == "dt2max") {
        mode = PairMode::max;
      } else if (ground == "dt2sum" || ground == "dt") {
        mode = PairMode::sum;
      } else {
        throw ConfigError("unknown pair ground metric: " + ground);
      }
      res = wasserstein_atomic(rho, nu, mode, base);
    } else {
      const auto rho = measure_from_json(jr);
      const auto nu = measure_from_json(jn);
      BaseMetric base;
      if (ground == "d") {
        base = BaseMetric::plain;
      } else if (ground == "dt") {
        base = BaseMetric::tilde;
      } else {
        throw ConfigError("unknown ground metric: " + ground);
      }
      res = wasserstein_atomic(rho, nu, base);
    }
    return Json{{"cost", res.cost}, {"plan", transport_plan_to_json(res.plan)}}.dump(2) + "\n";
  }
  if (op == "project") {
    if (!cfg.params.contains("gamma") || !cfg.params.contains("sample")) {
      throw ConfigError("transport project requires gamma and sample");
    }
    const PairAtoms gamma = pair_atoms_from_json(load_json_file(cfg.params.at("gamma").get<std::string>()));
    const IndexedSample s = sample_from_json(load_json_file(cfg.params.at("sample").get<std::string>()));
    SymSet sym(s);
    RngHandle rng(*cfg.seed);
    const auto pr = project_to_symset(gamma, sym, rng);
    return Json{{"measure", pair_measure_to_json(pr.measure)},
                {"rep_perm", pr.rep.map},
                {"left_cost", pr.left_cost},
                {"right_cost", pr.right_cost}}
               .dump(2) +
           "\n";
  }
  throw ConfigError("transport op must be wasserstein or project");
}

CylinderFunctional phi_from_param(const std::string& spec, double beta) {
  if (spec == "zero") return CylinderFunctional::zero();
  if (spec.rfind("const:", 0) == 0) return CylinderFunctional::constant(std::stod(spec.substr(6)));
  if (spec.rfind("quad:", 0) == 0) {
    const std::string rest = spec.substr(5);
    const auto at = rest.find('@');
    if (at == std::string::npos) throw ConfigError("quad phi needs a@t");
    const double a = std::stod(rest.substr(0, at));
    const double t = std::stod(rest.substr(at + 1));
    if (t < 0 || t > beta) throw ConfigError("phi time outside [0, beta]");
    return CylinderFunctional::quadratic(a, t);
  }
  throw ConfigError("phi must be zero, const:<c> or quad:<a>@<t>");
}

std::string run_bridge(const ExperimentConfig& cfg) {
  const double beta = cfg.params.at("beta").get<double>();
  const int grid_steps = cfg.params.at("grid").get<int>();
  const int n = cfg.params.at("n").get<int>();
  const int draws = cfg.params.at("draws").get<int>();
  const auto phi = phi_from_param(cfg.params.at("phi").get<std::string>(), beta);
  const auto layer1 = layer1_from_param(cfg.params.at("layer1").get<std::string>());
  RngHandle rng(*cfg.seed);
  const TimeGrid grid = TimeGrid::regular(beta, grid_steps);
  const auto ens = sample_ensemble(layer1, 1.0, grid, n, rng);
  // endpoint pairs realized by this ensemble
  std::vector<EndpointPair> pairs;
  const auto& al = *ens.endpoints.alphabet();
  for (int i = 0; i < n; ++i) {
    pairs.emplace_back(al.point(ens.endpoints.at(i)).coords,
                       al.point(ens.endpoints.at(ens.sigma(i))).coords);
  }
  RngHandle mc = rng.split(1);
  const auto est = cumulant_fixed_n(pairs, beta, 1.0, phi, draws, mc);
  // the limit law: product of the first-layer limit with itself
  const DiscreteMeasure base = layer1.is_fixed()
                                   ? empirical_of(layer1.fixed_sample())
                                   : [&] {
                                       // iid mode: the first-layer law itself
                                       auto probe = layer1.draw(1, mc);
                                       (void)probe;
                                       return empirical_of(layer1.draw(1, mc));
                                     }();
  const double limit = cumulant_limit(product(base, base), beta, 1.0, phi);
  std::ostringstream os;
  os << "n,lambda_n_exact,lambda_n_mc,lambda_limit,gap,stderr\n";
  os << n << ',' << num(est.exact) << ',' << num(est.mc) << ',' << num(limit) << ','
     << num(std::abs(est.exact - limit)) << ',' << num(est.mc_stderr) << "\n";
  return os.str();
}

std::string run_verify(const ExperimentConfig& cfg) {
  const std::string suite = cfg.params.at("suite").get<std::string>();
  const bool fault = cfg.params.contains("inject_fault") && cfg.params.at("inject_fault").get<bool>();
  const auto rows = verify_suite(suite, *cfg.seed, fault);
  return cfg.format == "json" ? report_json(rows) : report_csv(rows);
}

}  // namespace

RunOutcome run(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome out;
  if (cfg.subcommand == "sample") {
    out.content = run_sample(cfg);
  } else if (cfg.subcommand == "exact-ld") {
    out.content = run_exact_ld(cfg);
  } else if (cfg.subcommand == "rate") {
    out.content = run_rate(cfg);
  } else if (cfg.subcommand == "project") {
    out.content = run_project(cfg);
  } else if (cfg.subcommand == "transport") {
    out.content = run_transport(cfg);
  } else if (cfg.subcommand == "bridge") {
    out.content = run_bridge(cfg);
  } else if (cfg.subcommand == "verify") {
    out.content = run_verify(cfg);
  } else {
    throw ConfigError("unknown subcommand: " + cfg.subcommand);
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.record = Json{
      {"experiment_id", cfg.subcommand},
      {"inputs_digest", config_digest(cfg)},
      {"duration_seconds", std::chrono::duration<double>(t1 - t0).count()},
      {"out", cfg.out.empty() ? Json(nullptr) : Json(cfg.out)}};
  return out;
}

namespace {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DomainError*>(&e)) return 2;
  if (dynamic_cast<const CapError*>(&e)) return 3;
  if (dynamic_cast<const ConvergenceError*>(&e)) return 4;
  return 5;
}

const char* error_type_for(int code) {
  switch (code) {
    case 2: return "config";
    case 3: return "cap";
    case 4: return "non-convergence";
    default: return "internal";
  }
}

}  // namespace

int main_with_args(int argc, char** argv) {
  CLI::App app{"symld: a numerical laboratory for permutation-symmetrised empirical measures"};
  app.require_subcommand(0, 1);

  std::string config_path, out_path, format = "csv";
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "64-bit seed")->each([&](const std::string&) { seed_set = true; });

  // subcommand-local knobs all funnel into params
  Json params = Json::object();
  auto opt_str = [&params](CLI::App* sub, const std::string& name, const std::string& help) {
    sub->add_option_function<std::string>(
        "--" + name, [&params, name](const std::string& v) { params[name] = v; }, help);
  };
  auto opt_int = [&params](CLI::App* sub, const std::string& name, const std::string& help) {
    sub->add_option_function<std::int64_t>(
        "--" + name, [&params, name](std::int64_t v) { params[name] = v; }, help);
  };
  auto opt_dbl = [&params](CLI::App* sub, const std::string& name, const std::string& help) {
    sub->add_option_function<double>(
        "--" + name, [&params, name](double v) { params[name] = v; }, help);
  };

  CLI::App* c_sample = app.add_subcommand("sample", "draw symmetrised pair measures");
  opt_int(c_sample, "n", "sample size");
  opt_int(c_sample, "draws", "number of draws");
  opt_str(c_sample, "layer1", "fixed:<file> or iid:<file>");

  CLI::App* c_exact = app.add_subcommand("exact-ld", "finite-n exact rate at a target");
  opt_str(c_exact, "mu", "reference empirical measure file");
  opt_int(c_exact, "n", "sample size");
  opt_str(c_exact, "target", "target pair measure file");

  CLI::App* c_rate = app.add_subcommand("rate", "evaluate a rate function");
  opt_str(c_rate, "rate", "I (fixed sample) or J (two layer)");
  opt_str(c_rate, "nu", "pair measure file");
  opt_str(c_rate, "mu", "discrete measure file");

  CLI::App* c_project = app.add_subcommand("project", "entropy projection");
  opt_str(c_project, "reference", "reference pair measure file");
  opt_str(c_project, "common_marginal", "common marginal file");

  CLI::App* c_transport = app.add_subcommand("transport", "optimal transport tools");
  opt_str(c_transport, "op", "wasserstein or project");
  opt_str(c_transport, "rho", "first measure file");
  opt_str(c_transport, "nu", "second measure file");
  opt_str(c_transport, "ground", "d | dt | d2max | d2sum | dt2max | dt2sum");
  opt_str(c_transport, "gamma", "pair atom list file");
  opt_str(c_transport, "sample", "generating sample file");

  CLI::App* c_bridge = app.add_subcommand("bridge", "bridge ensemble cumulants");
  opt_dbl(c_bridge, "beta", "time horizon");
  opt_int(c_bridge, "grid", "number of grid steps");
  opt_int(c_bridge, "n", "ensemble size");
  opt_int(c_bridge, "draws", "Monte Carlo paths per endpoint pair");
  opt_str(c_bridge, "phi", "zero | const:<c> | quad:<a>@<t>");
  opt_str(c_bridge, "layer1", "fixed:<file> or iid:<file>");

  CLI::App* c_verify = app.add_subcommand("verify", "run a verification suite");
  opt_str(c_verify, "suite", "oracle | coupling | rate | bridge | all");
  c_verify->add_flag_function(
      "--inject-fault", [&params](std::int64_t) { params["inject_fault"] = true; },
      "negative control: corrupt one table count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << Json{{"error", Json{{"code", 2}, {"type", "config"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 2;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = config_from_json(load_json_file(config_path));
    }
    for (CLI::App* sub : {c_sample, c_exact, c_rate, c_project, c_transport, c_bridge, c_verify}) {
      if (sub->parsed()) {
        cfg.subcommand = sub->get_name();
        for (const auto& [key, value] : params.items()) cfg.params[key] = value;
      }
    }
    if (cfg.subcommand.empty()) throw ConfigError("no subcommand given (flag or config file)");
    if (seed_set) cfg.seed = seed;
    if (!out_path.empty()) cfg.out = out_path;
    if (format != "csv") cfg.format = format;
    validate(cfg);

    const RunOutcome outcome = run(cfg);
    if (cfg.out.empty()) {
      std::cout << outcome.content;
    } else {
      write_file_atomic(cfg.out, outcome.content);
    }
    std::cerr << outcome.record.dump() << "\n";
    return 0;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    std::cerr << Json{{"error",
                       Json{{"code", code}, {"type", error_type_for(code)}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return code;
  }
}

}  // namespace symld::cli
