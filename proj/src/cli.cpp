#include "redlab/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "redlab/alpha.hpp"
#include "redlab/closed_forms.hpp"
#include "redlab/design.hpp"
#include "redlab/errors.hpp"
#include "redlab/io.hpp"
#include "redlab/reports.hpp"
#include "redlab/version.hpp"

namespace redlab::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct OutputSink {
  std::string out_dir = ".";
  std::string subcommand;
  Json config = Json::object();
  std::uint64_t seed = kDefaultSeed;
  std::vector<std::string> written;
  Clock::time_point started = Clock::now();

  std::string path_for(const std::string& name) const {
    return (fs::path(out_dir) / name).string();
  }

  void emit(const std::string& name, const std::string& content) {
    fs::create_directories(out_dir);
    const std::string path = path_for(name);
    write_file_atomic(path, content);
    written.push_back(path);
  }

  // Every CSV ships with exactly one manifest describing how to rerun it.
  void finish(const Json& extra = Json::object()) {
    Json manifest;
    manifest["subcommand"] = subcommand;
    manifest["version"] = kVersion;
    manifest["seed"] = seed;
    manifest["config"] = config;
    manifest["outputs"] = written;
    manifest["duration_seconds"] =
        std::chrono::duration<double>(Clock::now() - started).count();
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = *it;
    fs::create_directories(out_dir);
    write_file_atomic(path_for(subcommand + ".manifest.json"), manifest.dump(2) + "\n");
  }
};

Json load_json_file(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& err) {
    throw invalid_parameter(path + ": malformed JSON (" + std::string(err.what()) + ")");
  }
}

struct GraphFlags {
  std::string config_path;
  std::string family;
  int n = 0;
  double epsilon = 0.5;
  bool epsilon_set = false;
};

void add_graph_flags(CLI::App* cmd, GraphFlags& flags, const std::string& prefix = "") {
  const std::string dash = prefix.empty() ? "--" : "--" + prefix + "-";
  cmd->add_option(dash + "config", flags.config_path, "graph config JSON file");
  cmd->add_option(dash + "family", flags.family,
                  "graph family: complete-uniform|ring|grid");
  cmd->add_option(dash + "n", flags.n, "number of servers");
  cmd->add_option(dash + "epsilon", flags.epsilon, "ring weight parameter")
      ->check(CLI::Range(0.0, 1.0));
}

std::pair<EdgeWeightedGraph, Json> resolve_graph(const GraphFlags& flags) {
  Json config;
  if (!flags.config_path.empty()) {
    config = load_json_file(flags.config_path);
  } else if (!flags.family.empty()) {
    config["family"] = flags.family;
    config["n"] = flags.n;
    if (flags.family == "ring") config["epsilon"] = flags.epsilon;
  } else {
    throw invalid_parameter("graph: pass --config FILE or --family with --n");
  }
  EdgeWeightedGraph graph = graph_from_json(config);
  Json echo = graph_to_json(graph, config);
  return {std::move(graph), std::move(echo)};
}

int run_alpha(const GraphFlags& flags, int qmax, ArithmeticMode mode,
              OutputSink& sink) {
  auto [graph, echo] = resolve_graph(flags);
  sink.config = echo;
  sink.config["qmax"] = qmax;

  const EdgeWeightedGraph uniform = build_complete_uniform(graph.n_servers());
  CsvBuilder csv({"q", "alpha", "alpha_ratio_vs_uniform"});
  if (use_rational(mode, graph.n_servers(), qmax)) {
    const auto table = alpha_dp<Rational>(graph, qmax);
    const auto reference = alpha_dp<Rational>(uniform, qmax);
    for (int q = 1; q <= qmax; ++q)
      csv.add_numeric_row({static_cast<double>(q), to_double(table.alpha(q)),
                           to_double(reference.alpha(q) / table.alpha(q))});
  } else {
    const auto table = alpha_dp<double>(graph, qmax);
    const auto reference = alpha_dp<double>(uniform, qmax);
    for (int q = 1; q <= qmax; ++q)
      csv.add_numeric_row({static_cast<double>(q), table.alpha(q),
                           reference.alpha(q) / table.alpha(q)});
  }
  sink.emit("alpha.csv", csv.str());
  sink.finish();
  return 0;
}

int run_closed_form(const std::string& law, double rho, double epsilon, int qmax,
                    OutputSink& sink) {
  sink.config = {{"law", law}, {"rho", rho}, {"qmax", qmax}};
  std::optional<SpectralDistribution> dist;
  if (law == "coc-complete4") {
    dist = coc_complete4_pmf(rho);
  } else if (law == "coc-hetring4") {
    sink.config["epsilon"] = epsilon;
    dist = coc_hetring4_pmf(rho, epsilon);
  } else if (law == "cos-complete4") {
    dist = cos_complete4_pmf(rho);
  } else if (law == "cos-homring4") {
    dist = cos_homring4_pmf(rho);
  } else if (law != "negbinom" && law != "pooled-mm1") {
    throw invalid_parameter(
        "closed-form --law: expected coc-complete4|coc-hetring4|cos-complete4|"
        "cos-homring4|negbinom|pooled-mm1, got '" + law + "'");
  }

  CsvBuilder csv({"q", "pmf", "cdf", "ccdf"});
  for (int q = 0; q <= qmax; ++q) {
    double pmf, cdf, ccdf;
    if (dist) {
      pmf = dist->pmf(q);
      cdf = dist->cdf(q);
      ccdf = dist->ccdf(q);
    } else if (law == "negbinom") {
      pmf = negbinom_pmf(rho, q);
      ccdf = negbinom_ccdf(rho, q);
      cdf = 1.0 - negbinom_ccdf(rho, q + 1);
    } else {
      pmf = pooled_mm1_pmf(rho, q);
      ccdf = pooled_mm1_ccdf(rho, q);
      cdf = 1.0 - pooled_mm1_ccdf(rho, q + 1);
    }
    csv.add_numeric_row({static_cast<double>(q), pmf, cdf, ccdf});
  }
  sink.emit("closed_form.csv", csv.str());
  sink.finish();
  return 0;
}

struct SimOverrides {
  std::optional<double> rho;
  std::optional<std::int64_t> events;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
};

int run_simulate(const std::string& config_path, const SimOverrides& overrides,
                 int max_threads, OutputSink& sink) {
  Json document = load_json_file(config_path);
  if (overrides.rho) {
    document.erase("lambda");
    document["rho"] = *overrides.rho;
  }
  if (overrides.events) document["events"] = *overrides.events;
  if (overrides.runs) document["runs"] = *overrides.runs;
  if (overrides.seed) document["seed"] = *overrides.seed;
  if (overrides.policy) document["policy"] = *overrides.policy;

  ResolvedSimConfig resolved = sim_config_from_json(document);
  resolved.config.max_threads = max_threads;
  sink.config = resolved.resolved;
  sink.seed = resolved.config.seed;

  const EmpiricalDistribution dist = simulate(resolved.config);
  sink.emit("simulate.csv", empirical_to_csv(dist));

  Json extra;
  extra["events_per_run"] = dist.events_per_run;
  extra["runs"] = dist.n_runs;
  extra["qmax"] = dist.qmax;
  extra["stability_check"] = dist.stability_partial ? "necessary-only" : "full";
  sink.finish(extra);
  return 0;
}

int run_compare(const std::string& path_a, const std::string& path_b, int qmax,
                OutputSink& sink) {
  sink.config = {{"a", path_a}, {"b", path_b}, {"qmax", qmax}};
  const ParsedCsv a = parse_numeric_csv(read_file(path_a));
  const ParsedCsv b = parse_numeric_csv(read_file(path_b));
  const std::size_t a_ccdf = a.column("ccdf_mean");
  const std::size_t a_se = a.column("ccdf_se");
  const std::size_t b_ccdf = b.column("ccdf_mean");
  const std::size_t b_se = b.column("ccdf_se");

  const int common = std::min({qmax, static_cast<int>(a.rows.size()) - 1,
                               static_cast<int>(b.rows.size()) - 1});
  CdfDifferenceSeries series;
  series.qmax = common;
  series.truncated = common < qmax;
  for (int q = 0; q <= common; ++q) {
    const auto& row_a = a.rows[static_cast<std::size_t>(q)];
    const auto& row_b = b.rows[static_cast<std::size_t>(q)];
    series.difference.push_back(row_b[b_ccdf] - row_a[a_ccdf]);
    const double se =
        std::sqrt(row_a[a_se] * row_a[a_se] + row_b[b_se] * row_b[b_se]);
    series.se.push_back(se);
    series.ci95.push_back(1.96 * se);
  }
  if (series.truncated)
    std::cerr << "compare: supports differ, truncated to q <= " << common << "\n";
  sink.emit("compare.csv", difference_to_csv(series));
  sink.finish();
  return 0;
}

int run_design_opt(const std::string& config_path, OutputSink& sink) {
  const Json document = load_json_file(config_path);
  sink.config = document;
  const DesignProblem problem = design_problem_from_json(document);
  const DesignSolution solution = optimize(problem);
  sink.emit("design_opt.json", design_solution_to_json(problem, solution).dump(2) + "\n");
  sink.finish();
  if (solution.status == SolveStatus::kInfeasible) {
    std::cerr << "design-opt: infeasible (" << solution.note << ")\n";
    return 3;
  }
  return 0;
}

int run_table1(ArithmeticMode mode, OutputSink& sink) {
  sink.config = {{"arithmetic", mode == ArithmeticMode::kRational  ? "rational"
                                : mode == ArithmeticMode::kDouble ? "double"
                                                                  : "auto"}};
  sink.emit("table1.csv", table1_csv(mode));
  sink.finish();
  return 0;
}

int run_figure2(OutputSink& sink) {
  sink.config = {{"rho", 0.8}, {"qmax", 25}};
  sink.emit("figure2.csv", figure2_csv());
  sink.finish();
  return 0;
}

int run_figure3(std::int64_t events, int runs, std::uint64_t seed, OutputSink& sink) {
  Figure3Params params;
  params.events = events;
  params.runs = runs;
  params.seed = seed;
  sink.config = {{"events", events}, {"runs", runs}, {"seed", seed},
                 {"qmax", params.qmax}};
  sink.emit("figure3.csv", figure3_csv(params));
  sink.finish();
  return 0;
}

int run_dominance(const GraphFlags& a_flags, const GraphFlags& b_flags, int qmax,
                  double rho, ArithmeticMode mode, OutputSink& sink) {
  auto [graph_a, echo_a] = resolve_graph(a_flags);
  auto [graph_b, echo_b] = resolve_graph(b_flags);
  sink.config = {{"graph_a", echo_a}, {"graph_b", echo_b}, {"qmax", qmax},
                 {"rho", rho}};

  const DominanceReport bd = use_rational(mode, graph_a.n_servers(), qmax)
                                 ? bd_dominance_check<Rational>(graph_a, graph_b, qmax)
                                 : bd_dominance_check<double>(graph_a, graph_b, qmax);

  const auto pmf_a = coc_pmf_from_alpha(graph_a, rho, qmax);
  const auto pmf_b = coc_pmf_from_alpha(graph_b, rho, qmax);
  const DominanceVerdict verdict =
      stochastic_dominance_compare(pmf_a, pmf_b, qmax, 1e-12);

  Json result;
  result["bd_ratio_condition"] = {{"holds", bd.holds}, {"qmax", bd.qmax}};
  if (bd.first_violation) result["bd_ratio_condition"]["first_violation"] = *bd.first_violation;
  result["stochastic_dominance"] = {{"a_le_b", verdict.a_le_b}, {"rho", rho}};
  if (verdict.first_violation)
    result["stochastic_dominance"]["first_violation"] = *verdict.first_violation;
  sink.emit("dominance.json", result.dump(2) + "\n");

  CsvBuilder csv({"q", "ratio_a", "ratio_b", "ccdf_margin"});
  for (int q = 1; q <= qmax; ++q)
    csv.add_numeric_row({static_cast<double>(q),
                         bd.ratios_a[static_cast<std::size_t>(q) - 1],
                         bd.ratios_b[static_cast<std::size_t>(q) - 1],
                         verdict.margins[static_cast<std::size_t>(q) - 1]});
  sink.emit("dominance_margins.csv", csv.str());
  sink.finish();
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"redlab: queue-length laws for weighted power-of-two redundancy"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  std::uint64_t seed = kDefaultSeed;
  std::string arithmetic = "auto";
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "base seed for anything random")
      ->capture_default_str();
  app.add_option("--arithmetic", arithmetic, "auto|rational|double")
      ->capture_default_str();

  GraphFlags alpha_graph;
  int alpha_qmax = 16;
  auto* alpha_cmd = app.add_subcommand("alpha", "coverage polynomials of a graph");
  add_graph_flags(alpha_cmd, alpha_graph);
  alpha_cmd->add_option("--qmax", alpha_qmax, "largest q")->capture_default_str();

  std::string law = "coc-complete4";
  double cf_rho = 0.8;
  double cf_epsilon = 0.7;
  int cf_qmax = 25;
  auto* cf_cmd = app.add_subcommand("closed-form", "evaluate a four-server law");
  cf_cmd->add_option("--law", law, "which law")->capture_default_str();
  cf_cmd->add_option("--rho", cf_rho, "offered load")->capture_default_str();
  cf_cmd->add_option("--epsilon", cf_epsilon, "ring parameter")->capture_default_str();
  cf_cmd->add_option("--qmax", cf_qmax, "largest q")->capture_default_str();

  std::string sim_config_path;
  SimOverrides overrides;
  double ov_rho;
  std::int64_t ov_events;
  int ov_runs;
  std::uint64_t ov_seed;
  std::string ov_policy;
  int max_threads = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "run the event-driven simulator");
  sim_cmd->add_option("--config", sim_config_path, "sim config JSON")->required();
  auto* rho_opt = sim_cmd->add_option("--rho", ov_rho, "override offered load");
  auto* events_opt = sim_cmd->add_option("--events", ov_events, "override events per run");
  auto* runs_opt = sim_cmd->add_option("--runs", ov_runs, "override run count");
  auto* seed_opt = sim_cmd->add_option("--sim-seed", ov_seed, "override seed");
  auto* policy_opt = sim_cmd->add_option("--policy", ov_policy, "override policy");
  sim_cmd->add_option("--threads", max_threads, "worker cap (0 = hardware)");

  std::string cmp_a, cmp_b;
  int cmp_qmax = 50;
  auto* cmp_cmd = app.add_subcommand("compare", "difference of two simulate CSVs");
  cmp_cmd->add_option("--a", cmp_a, "baseline result CSV")->required();
  cmp_cmd->add_option("--b", cmp_b, "comparison result CSV")->required();
  cmp_cmd->add_option("--qmax", cmp_qmax, "largest q")->capture_default_str();

  std::string design_config_path;
  auto* design_cmd = app.add_subcommand("design-opt", "job-type to server-pair design");
  design_cmd->add_option("--config", design_config_path, "problem JSON")->required();

  auto* table1_cmd = app.add_subcommand("table1", "light-traffic ratio table");

  auto* figure2_cmd = app.add_subcommand("figure2", "six-law tail comparison at rho 0.8");

  std::int64_t fig3_events = 100000;
  int fig3_runs = 20;
  auto* figure3_cmd =
      app.add_subcommand("figure3", "uniform vs homogeneous ring gaps: cos and JIQ");
  figure3_cmd->add_option("--events", fig3_events, "events per run")
      ->capture_default_str();
  figure3_cmd->add_option("--runs", fig3_runs, "runs per rho")->capture_default_str();

  GraphFlags dom_a, dom_b;
  int dom_qmax = 16;
  double dom_rho = 0.8;
  auto* dom_cmd = app.add_subcommand("dominance", "compare two graphs");
  add_graph_flags(dom_cmd, dom_a, "a");
  add_graph_flags(dom_cmd, dom_b, "b");
  dom_cmd->add_option("--qmax", dom_qmax, "largest q")->capture_default_str();
  dom_cmd->add_option("--rho", dom_rho, "load for the distribution comparison")
      ->capture_default_str();

  std::vector<const char*> argv_ptrs;
  argv_ptrs.reserve(args.size() + 1);
  argv_ptrs.push_back("redlab");
  for (const auto& arg : args) argv_ptrs.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv_ptrs.size()), argv_ptrs.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& err) {
    std::cerr << "redlab: " << err.what() << "\n";
    return 2;
  }

  OutputSink sink;
  sink.out_dir = out_dir;
  sink.seed = seed;
  const ArithmeticMode mode = arithmetic_from_name(arithmetic);

  try {
    if (*alpha_cmd) {
      sink.subcommand = "alpha";
      return run_alpha(alpha_graph, alpha_qmax, mode, sink);
    }
    if (*cf_cmd) {
      sink.subcommand = "closed_form";
      return run_closed_form(law, cf_rho, cf_epsilon, cf_qmax, sink);
    }
    if (*sim_cmd) {
      sink.subcommand = "simulate";
      if (*rho_opt) overrides.rho = ov_rho;
      if (*events_opt) overrides.events = ov_events;
      if (*runs_opt) overrides.runs = ov_runs;
      if (*seed_opt)
        overrides.seed = ov_seed;
      else
        overrides.seed = seed;
      if (*policy_opt) overrides.policy = ov_policy;
      return run_simulate(sim_config_path, overrides, max_threads, sink);
    }
    if (*cmp_cmd) {
      sink.subcommand = "compare";
      return run_compare(cmp_a, cmp_b, cmp_qmax, sink);
    }
    if (*design_cmd) {
      sink.subcommand = "design_opt";
      return run_design_opt(design_config_path, sink);
    }
    if (*table1_cmd) {
      sink.subcommand = "table1";
      return run_table1(mode, sink);
    }
    if (*figure2_cmd) {
      sink.subcommand = "figure2";
      return run_figure2(sink);
    }
    if (*figure3_cmd) {
      sink.subcommand = "figure3";
      return run_figure3(fig3_events, fig3_runs, seed, sink);
    }
    if (*dom_cmd) {
      sink.subcommand = "dominance";
      return run_dominance(dom_a, dom_b, dom_qmax, dom_rho, mode, sink);
    }
  } catch (const unstable_system& err) {
    std::cerr << "redlab: " << err.what() << "\n";
    return 3;
  } catch (const invalid_parameter& err) {
    std::cerr << "redlab: " << err.what() << "\n";
    return 2;
  } catch (const size_error& err) {
    std::cerr << "redlab: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "redlab: " << err.what() << "\n";
    return 2;
  }
  return 2;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace redlab::cli
