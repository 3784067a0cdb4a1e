#include "siv/cli.hpp"

#include "siv/dgp.hpp"
#include "siv/error.hpp"
#include "siv/estimator.hpp"
#include "siv/io.hpp"
#include "siv/robust.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

namespace siv::cli {

namespace {

using json = nlohmann::ordered_json;

struct Options {
  std::string input;
  std::string outcome;
  std::vector<std::string> endogenous;
  std::vector<std::string> controls;
  std::vector<std::string> instruments;
  std::string method = "SIV";
  std::string sign = "auto";
  std::string criterion = "dt_moment";
  std::string parametric_form = "trace";
  std::string methods = "OLS,SIV,RSIV_p,RSIV_n";
  double delta_min = 1e-3;
  double min_corr = 0.10;
  int grid_points = 200;
  int refine_rounds = 30;
  double significance_z = 1.959963984540054;
  int bootstrap = 0;
  std::uint64_t seed = 20240601;
  int threads = 1;
  std::string output;
  std::string output_prefix;
  std::string replications_output;

  std::string scale = "desk";
  std::size_t population_size = 20000;
  std::size_t sample_size = 1000;
  int generations = 10;
  int draws = 5;
  std::string dgp_sign = "positive";
  bool exogenous = false;
  double heteroscedasticity = 0.0;
  double nu_low = -2.0;
  double nu_high = 2.0;
  double target_bias = 1.0;
  std::string construction = "latent";
};

template <class T>
T require_parsed(std::optional<T> v, const std::string& what, const std::string& raw) {
  if (!v) throw Error(ErrorKind::InvalidInput, "unknown " + what + " '" + raw + "'");
  return *v;
}

ModelSpec model_spec(const Options& o) {
  ModelSpec spec;
  spec.outcome = o.outcome;
  spec.endogenous = o.endogenous;
  spec.controls = o.controls;
  spec.external_instruments = o.instruments;
  spec.method = require_parsed(parse_method(o.method), "method", o.method);
  spec.sign = require_parsed(parse_sign_policy(o.sign), "sign", o.sign);
  spec.search.grid.delta_min = o.delta_min;
  spec.search.grid.min_corr = o.min_corr;
  spec.search.grid.n_points = o.grid_points;
  spec.search.grid.refine_rounds = o.refine_rounds;
  spec.search.significance_z = o.significance_z;
  spec.search.parametric_form =
      require_parsed(parse_parametric_form(o.parametric_form), "parametric form", o.parametric_form);
  spec.search.threads = o.threads;
  if (spec.outcome.empty() || spec.endogenous.empty()) {
    throw Error(ErrorKind::InvalidInput, "--outcome and --endogenous are required");
  }
  return spec;
}

std::vector<std::string> used_columns(const ModelSpec& spec) {
  std::vector<std::string> cols{spec.outcome};
  for (const auto* group : {&spec.endogenous, &spec.controls, &spec.external_instruments}) {
    for (const auto& c : *group) {
      if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    }
  }
  return cols;
}

DgpConfig dgp_config(const Options& o, const CLI::App& sub) {
  DgpConfig c;
  if (o.scale == "full") {
    c.population_size = 100000;
    c.n_generations = 50;
    c.n_draws = 10;
  } else if (o.scale != "desk") {
    throw Error(ErrorKind::InvalidInput, "unknown scale '" + o.scale + "'");
  }
  auto given = [&sub](const char* name) { return sub.count(name) > 0; };
  if (given("--population-size")) c.population_size = o.population_size;
  if (given("--generations")) c.n_generations = o.generations;
  if (given("--draws")) c.n_draws = o.draws;
  c.sample_size = o.sample_size;
  if (o.dgp_sign == "positive") {
    c.sign = EndogeneitySign::positive;
  } else if (o.dgp_sign == "negative") {
    c.sign = EndogeneitySign::negative;
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown endogeneity sign '" + o.dgp_sign + "'");
  }
  if (o.construction == "latent") {
    c.construction = DgpConstruction::latent;
  } else if (o.construction == "literal") {
    c.construction = DgpConstruction::literal;
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown construction '" + o.construction + "'");
  }
  c.seed = o.seed;
  c.exogenous = o.exogenous;
  c.heteroscedasticity = o.heteroscedasticity;
  c.nu_low = o.nu_low;
  c.nu_high = o.nu_high;
  c.target_bias = o.target_bias;
  return c;
}

// Writes to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot write '" + path + "'");
  fn(f);
}

int cmd_estimate(const Options& o, std::ostream& out) {
  const ModelSpec spec = model_spec(o);
  const IngestResult in = ingest_csv(o.input, used_columns(spec));
  std::vector<SivEstimate> estimates;
  if (spec.endogenous.size() > 1) {
    estimates = multi_endogenous_estimate(in.data, spec);
  } else {
    estimates.push_back(estimate(in.data, spec));
  }
  std::unique_ptr<BootstrapResult> boot;
  if (o.bootstrap > 0) {
    if (spec.endogenous.size() > 1) {
      throw Error(ErrorKind::InvalidInput, "bootstrap supports a single endogenous regressor");
    }
    boot = std::make_unique<BootstrapResult>(bootstrap(in.data, spec, o.bootstrap, o.seed, o.threads));
    SivEstimate& e = estimates.front();
    e.se = boot->se;
    e.ci_low = boot->ci_low;
    e.ci_high = boot->ci_high;
    e.ci_kind = "percentile";
  }
  const json report = estimate_report(estimates, boot.get(), in.rows_dropped);
  emit(o.output, out, [&](std::ostream& s) { s << dump_json(report); });
  return 0;
}

int cmd_locus(const Options& o, std::ostream& out) {
  const ModelSpec spec = model_spec(o);
  const CriterionKind kind = require_parsed(parse_criterion(o.criterion), "criterion", o.criterion);
  if (o.output_prefix.empty()) throw Error(ErrorKind::InvalidInput, "--output-prefix is required");
  const IngestResult in = ingest_csv(o.input, used_columns(spec));
  const SivContext ctx = build_context(in.data, spec);
  const SignDecision decision = determine_sign(ctx, spec.search, spec.sign);

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["criterion"] = std::string(criterion_name(kind));
  summary["sign_verdict"] = std::string(verdict_name(decision.verdict));
  summary["k"] = decision.k ? json(*decision.k) : json(nullptr);
  json files = json::array();
  for (int k : {1, -1}) {
    if (spec.sign == SignPolicy::positive && k == 1) continue;
    if (spec.sign == SignPolicy::negative && k == -1) continue;
    DeltaLocus locus;
    std::optional<double> d0;
    if (kind == CriterionKind::dt_moment) {
      locus = k > 0 ? decision.locus_plus : decision.locus_minus;
      d0 = k > 0 ? decision.delta0_plus : decision.delta0_minus;
    } else {
      const RobustResult r = robust_delta0(
          ctx, k, spec.search,
          kind == CriterionKind::robust_parametric ? RobustMode::parametric : RobustMode::nonparametric);
      locus = r.locus;
      d0 = r.delta0.delta;
    }
    const std::string path = o.output_prefix + (k > 0 ? "_kplus.csv" : "_kminus.csv");
    emit(path, out, [&](std::ostream& s) { write_locus_csv(locus, s, d0); });
    files.push_back({{"k", k}, {"path", path}, {"delta0", d0 ? json(*d0) : json(nullptr)}});
  }
  summary["loci"] = std::move(files);
  emit(o.output_prefix + "_summary.json", out, [&](std::ostream& s) { s << dump_json(summary); });
  out << dump_json(summary);
  return 0;
}

int cmd_simulate(const Options& o, const CLI::App& sub, std::ostream& out) {
  const DgpConfig c = dgp_config(o, sub);
  const Population pop = generate_population(c, 0);
  emit(o.output, out, [&](std::ostream& s) { write_csv(pop.data, s); });
  return 0;
}

int cmd_benchmark(const Options& o, const CLI::App& sub, std::ostream& out) {
  const DgpConfig c = dgp_config(o, sub);
  std::vector<Method> methods;
  std::stringstream ss(o.methods);
  for (std::string item; std::getline(ss, item, ',');) {
    methods.push_back(require_parsed(parse_method(item), "method", item));
  }
  SearchOptions search;
  search.grid.delta_min = o.delta_min;
  search.grid.min_corr = o.min_corr;
  search.grid.n_points = o.grid_points;
  search.grid.refine_rounds = o.refine_rounds;
  search.significance_z = o.significance_z;
  search.parametric_form =
      require_parsed(parse_parametric_form(o.parametric_form), "parametric form", o.parametric_form);
  const McSummary summary = run_monte_carlo(c, methods, o.threads, search);
  emit(o.output, out, [&](std::ostream& s) { write_mc_csv(summary, s); });
  if (!o.replications_output.empty()) {
    emit(o.replications_output, out, [&](std::ostream& s) { write_replications_csv(summary, s); });
  }
  return 0;
}

void add_search_flags(CLI::App* sub, Options& o) {
  sub->add_option("--delta-min", o.delta_min, "Smallest delta on the grid");
  sub->add_option("--min-corr", o.min_corr, "Lower bound on corr(s, x) that fixes the largest delta");
  sub->add_option("--grid-points", o.grid_points, "Number of log-spaced grid points");
  sub->add_option("--refine-rounds", o.refine_rounds, "Golden-section rounds for robust loci");
  sub->add_option("--significance-z", o.significance_z,
                  "|t| a DT moment must exceed on both sides of a crossing (0 = any crossing)");
  sub->add_option("--parametric-form", o.parametric_form, "RSIV-p locus: trace, difference or ratio");
}

void add_data_flags(CLI::App* sub, Options& o) {
  sub->add_option("--input", o.input, "CSV file with a header row")->required();
  sub->add_option("--outcome", o.outcome, "Outcome column")->required();
  sub->add_option("--endogenous", o.endogenous, "Endogenous regressor column(s)")
      ->required()
      ->delimiter(',');
  sub->add_option("--controls", o.controls, "Exogenous control columns")->delimiter(',');
  sub->add_option("--sign", o.sign, "Sign of cov(x, u): auto, positive or negative");
}

void add_dgp_flags(CLI::App* sub, Options& o) {
  sub->add_option("--scale", o.scale, "Preset: desk (20000, 10 x 5) or full (100000, 50 x 10)");
  sub->add_option("--population-size", o.population_size, "Population size N");
  sub->add_option("--sample-size", o.sample_size, "Rows per inner draw");
  sub->add_option("--generations", o.generations, "Number of populations");
  sub->add_option("--draws", o.draws, "Inner draws per population");
  sub->add_option("--endogeneity-sign", o.dgp_sign, "Sign of cov(x, u): positive or negative");
  sub->add_flag("--exogenous", o.exogenous, "Make x exogenous");
  sub->add_option("--heteroscedasticity", o.heteroscedasticity, "Error sd multiplier 1 + h|z|/sd(z)");
  sub->add_option("--nu-low", o.nu_low, "Lower end of the equally spaced sequence");
  sub->add_option("--nu-high", o.nu_high, "Upper end of the equally spaced sequence");
  sub->add_option("--target-bias", o.target_bias, "OLS bias magnitude in the population");
  sub->add_option("--construction", o.construction, "latent or literal");
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message, int code,
                  const Error* e = nullptr) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  if (e && e->kind() == ErrorKind::ParseError) {
    j["line"] = e->line();
    j["column"] = e->column();
  }
  if (e && e->kind() == ErrorKind::NoEndogeneityDetected) j["advice"] = "use OLS";
  err << j.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Synthetic instrumental variable estimation"};
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "Seed for every random stream")->envname("SIV_SEED");
  app.add_option("--threads", o.threads, "Worker thread cap")->envname("SIV_THREADS")->check(CLI::PositiveNumber);

  CLI::App* est = app.add_subcommand("estimate", "Estimate the causal effect and write JSON");
  add_data_flags(est, o);
  add_search_flags(est, o);
  est->add_option("--method", o.method, "OLS, SIV, RSIV_p, RSIV_n or ExternalIV");
  est->add_option("--instruments", o.instruments, "External instruments (ExternalIV)")->delimiter(',');
  est->add_option("--bootstrap", o.bootstrap, "Bootstrap replications (0 = none)");
  est->add_option("--output", o.output, "JSON output path (stdout when omitted)");

  CLI::App* loc = app.add_subcommand("locus", "Write the delta locus for both signs");
  add_data_flags(loc, o);
  add_search_flags(loc, o);
  loc->add_option("--criterion", o.criterion, "dt_moment, robust_parametric or robust_nonparametric");
  loc->add_option("--output-prefix", o.output_prefix, "Prefix for the locus CSV and summary files")->required();

  CLI::App* sim = app.add_subcommand("simulate", "Write one generated population as CSV");
  add_dgp_flags(sim, o);
  sim->add_option("--output", o.output, "CSV output path (stdout when omitted)");

  CLI::App* bench = app.add_subcommand("benchmark", "Run the Monte Carlo experiment");
  add_dgp_flags(bench, o);
  add_search_flags(bench, o);
  bench->add_option("--methods", o.methods, "Comma-separated methods");
  bench->add_option("--output", o.output, "Summary CSV path (stdout when omitted)");
  bench->add_option("--replications-output", o.replications_output, "Per-replication CSV path");

  for (auto* sub : {est, loc, sim, bench}) {
    sub->add_option("--seed", o.seed, "Seed for every random stream")->envname("SIV_SEED");
    sub->add_option("--threads", o.threads, "Worker thread cap")->envname("SIV_THREADS")->check(CLI::PositiveNumber);
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "UsageError", e.what(), 1);
    return 1;
  }

  try {
    if (est->parsed()) return cmd_estimate(o, out);
    if (loc->parsed()) return cmd_locus(o, out);
    if (sim->parsed()) return cmd_simulate(o, *sim, out);
    return cmd_benchmark(o, *bench, out);
  } catch (const Error& e) {
    const int code = exit_code(e.kind());
    report_error(err, std::string(error_name(e.kind())), e.what(), code, &e);
    return code;
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what(), 2);
    return 2;
  }
}

}  // namespace siv::cli
