#include "bayesqa/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bayesqa/dataset.hpp"
#include "bayesqa/error.hpp"
#include "bayesqa/inference.hpp"
#include "bayesqa/io.hpp"
#include "bayesqa/metrics.hpp"
#include "bayesqa/network.hpp"
#include "bayesqa/problog.hpp"
#include "bayesqa/subset.hpp"
#include "bayesqa/wep.hpp"

namespace bayesqa {

namespace {

using json = nlohmann::ordered_json;

struct GlobalConfig {
  std::uint64_t seed = 0;
  std::string format = "human";
  int precision = 9;
  int threads = 0;

  bool machine() const { return format == "machine"; }
  std::string num(double v) const { return fmt::format("{:.{}f}", v, precision); }
};

// Writes to `path`, or to `out` when no path (or "-") is given.
void emit(const std::string& path, std::string_view text, std::ostream& out) {
  if (path.empty() || path == "-") out << text;
  else write_text_file(path, text);
}

void print_json(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

Assignment parse_bindings(const std::vector<std::string>& items) {
  Assignment a;
  for (const auto& item : items) {
    auto [var, state] = parse_binding(item);
    if (!a.bindings.emplace(var, state).second) {
      throw Error(ErrorKind::OverlappingBindings, fmt::format("variable '{}' is bound twice", var));
    }
  }
  return a;
}

Method parse_method(const std::string& name) {
  return name == "enumeration" ? Method::Enumeration : Method::Elimination;
}

json bindings_json(const Assignment& a) {
  json j = json::object();
  for (const auto& [k, v] : a.bindings) j[k] = v;
  return j;
}

std::vector<DatasetInstance> load_instances(const std::string& path) {
  return instances_from_jsonl(read_text_file(path));
}

json metrics_json(const metrics::Metrics& m) {
  json j;
  j["count"] = m.count;
  j["pct_correct"] = m.pct_correct;
  j["pct_wrong"] = m.pct_wrong;
  j["pct_error"] = m.pct_error;
  j["rmse_50"] = m.rmse_50;
  j["rmse_nonerror"] = m.rmse_nonerror ? json(*m.rmse_nonerror) : json(nullptr);
  return j;
}

void print_metrics_table(std::ostream& out, const metrics::MetricsReport& report, const GlobalConfig& cfg) {
  auto row = [&](std::string_view group, std::string_view key, const metrics::Metrics& m) {
    fmt::print(out, "{:<10} {:<24} {:>6} {:>9.2f} {:>9.2f} {:>9.2f} {:>12} {:>14}\n", group, key, m.count,
               m.pct_correct, m.pct_wrong, m.pct_error, cfg.num(m.rmse_50),
               m.rmse_nonerror ? cfg.num(*m.rmse_nonerror) : std::string("n/a"));
  };
  fmt::print(out, "{:<10} {:<24} {:>6} {:>9} {:>9} {:>9} {:>12} {:>14}\n", "group", "key", "n", "%correct", "%wrong",
             "%error", "rmse_50", "rmse_nonerror");
  row("overall", "all", report.overall);
  for (const auto& [k, m] : report.by_type) row("type", k, m);
  for (const auto& [k, m] : report.by_network) row("network", k, m);
  for (const auto& [k, m] : report.by_premises) row("premises", k, m);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian network question answering toolkit", "bayesqa"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalConfig cfg;
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--format", cfg.format, "Output format")
      ->check(CLI::IsMember({"human", "machine"}))
      ->capture_default_str();
  app.add_option("--precision", cfg.precision, "Digits after the decimal point")
      ->check(CLI::Range(0, 17))
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);

  std::function<void()> action;

  // validate
  std::vector<std::string> validate_files;
  auto* validate_cmd = app.add_subcommand("validate", "Check network files");
  validate_cmd->add_option("networks", validate_files, "Network files")->required()->check(CLI::ExistingFile);
  validate_cmd->callback([&] {
    action = [&] {
      for (const auto& path : validate_files) {
        const BayesianNetwork net = load_network(path);
        if (cfg.machine()) {
          print_json(out, {{"file", path}, {"valid", true}, {"variables", net.size()}, {"cpt_rows", cpt_row_count(net)}});
        } else {
          fmt::print(out, "{}: valid ({} variables, {} CPT rows)\n", path, net.size(), cpt_row_count(net));
        }
      }
    };
  });

  // infer
  std::string infer_network, infer_query, infer_method = "elimination";
  std::vector<std::string> infer_evidence;
  auto* infer_cmd = app.add_subcommand("infer", "Conditional query on a network");
  infer_cmd->add_option("--network", infer_network, "Network file")->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--query", infer_query, "var=state, or var for the whole distribution")->required();
  infer_cmd->add_option("--evidence", infer_evidence, "var=state (repeatable)");
  infer_cmd->add_option("--method", infer_method)
      ->check(CLI::IsMember({"enumeration", "elimination"}))
      ->capture_default_str();
  infer_cmd->callback([&] {
    action = [&] {
      const TabularNetwork net(load_network(infer_network));
      const Assignment evidence = parse_bindings(infer_evidence);
      const Method method = parse_method(infer_method);
      if (infer_query.find('=') == std::string::npos) {
        const std::size_t v = net.var_index(infer_query);
        const auto dist = posterior(net, v, Evidence(net, evidence), method);
        const auto& states = net.network().variables()[v].states;
        if (cfg.machine()) {
          json d = json::object();
          for (std::size_t s = 0; s < states.size(); ++s) d[states[s]] = dist[s];
          print_json(out, {{"variable", infer_query}, {"evidence", bindings_json(evidence)}, {"distribution", d}});
        } else {
          for (std::size_t s = 0; s < states.size(); ++s) fmt::print(out, "{}={}\t{}\n", infer_query, states[s], cfg.num(dist[s]));
        }
        return;
      }
      const auto [var, state] = parse_binding(infer_query);
      const Assignment query{{var, state}};
      const QueryResult r = method == Method::Enumeration ? conditional_query(net, query, evidence)
                                                          : eliminate(net, query, evidence);
      if (cfg.machine()) {
        print_json(out, {{"query", {{var, state}}},
                         {"evidence", bindings_json(evidence)},
                         {"probability", r.probability},
                         {"method", to_string(r.method)}});
      } else {
        fmt::print(out, "{}\n", cfg.num(r.probability));
      }
    };
  });

  // solve
  std::string solve_file, solve_method = "elimination";
  auto* solve_cmd = app.add_subcommand("solve", "Evaluate the queries of a ProbLog program");
  solve_cmd->add_option("program", solve_file, "Program file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--method", solve_method, "Engine: compiled network or possible worlds")
      ->check(CLI::IsMember({"enumeration", "elimination", "worlds"}))
      ->capture_default_str();
  solve_cmd->callback([&] {
    action = [&] {
      const problog::Program program = problog::parse(read_text_file(solve_file));
      const auto answers = solve_method == "worlds" ? problog::enumerate_worlds(program)
                                                    : problog::evaluate(program, parse_method(solve_method));
      for (const auto& a : answers) {
        if (cfg.machine()) {
          print_json(out, {{"query", problog::to_compact_string(a.atom)}, {"probability", a.probability}});
        } else {
          fmt::print(out, "{}:\t{}\n", problog::to_compact_string(a.atom), cfg.num(a.probability));
        }
      }
    };
  });

  // to-problog
  std::string tp_network, tp_out, tp_entity, tp_query;
  std::vector<std::string> tp_evidence;
  auto* tp_cmd = app.add_subcommand("to-problog", "Translate a network into a ProbLog program");
  tp_cmd->add_option("--network", tp_network, "Network file")->required()->check(CLI::ExistingFile);
  tp_cmd->add_option("-o,--out", tp_out, "Output file (default: stdout)");
  tp_cmd->add_option("--entity", tp_entity, "Constant used as the atoms' argument");
  tp_cmd->add_option("--evidence", tp_evidence, "var=state (repeatable)");
  tp_cmd->add_option("--query", tp_query, "var=state");
  tp_cmd->callback([&] {
    action = [&] {
      BayesianNetwork net = load_network(tp_network);
      if (!tp_entity.empty()) {
        NetworkMetadata meta = net.metadata();
        meta.entity = tp_entity;
        net = BayesianNetwork(meta, net.variables(), net.cpts());
      }
      problog::Program program;
      if (!tp_query.empty()) {
        program = problog::query_program(net, parse_bindings(tp_evidence), parse_binding(tp_query));
      } else {
        if (!tp_evidence.empty()) throw Error(ErrorKind::InvalidArgument, "--evidence requires --query");
        program = problog::bn_to_problog(net);
      }
      emit(tp_out, problog::serialize(program), out);
    };
  });

  // from-problog
  std::string fp_file, fp_out;
  auto* fp_cmd = app.add_subcommand("from-problog", "Compile a ProbLog program into a network");
  fp_cmd->add_option("program", fp_file, "Program file")->required()->check(CLI::ExistingFile);
  fp_cmd->add_option("-o,--out", fp_out, "Output file (default: stdout)");
  fp_cmd->callback([&] {
    action = [&] { emit(fp_out, to_json_text(problog::problog_to_bn(problog::parse(read_text_file(fp_file)))), out); };
  });

  // subset
  std::string sub_network, sub_out;
  std::vector<std::string> sub_keep;
  auto* sub_cmd = app.add_subcommand("subset", "Keep a subset of the variables");
  sub_cmd->add_option("--network", sub_network, "Network file")->required()->check(CLI::ExistingFile);
  sub_cmd->add_option("--keep", sub_keep, "Variable ids to keep")->required()->delimiter(',');
  sub_cmd->add_option("-o,--out", sub_out, "Output file (default: stdout)");
  sub_cmd->callback([&] {
    action = [&] {
      const SubsetSpec spec{{sub_keep.begin(), sub_keep.end()}};
      const SubsetResult result = subset(load_network(sub_network), spec);
      for (const auto& w : result.warnings) fmt::print(err, "warning: {}\n", w);
      emit(sub_out, to_json_text(result.network), out);
    };
  });

  // gen-dataset
  std::vector<std::string> gen_networks, gen_kinds{"numeric", "wep"};
  std::size_t gen_count = 10;
  std::string gen_out, gen_problog_dir, gen_manifest;
  double gen_second = wep::kDefaultSecondClosestRate;
  auto* gen_cmd = app.add_subcommand("gen-dataset", "Generate question/evidence instances");
  gen_cmd->add_option("--network", gen_networks, "Network files")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--count", gen_count, "Instances per network")->capture_default_str();
  gen_cmd->add_option("--kinds", gen_kinds, "Premise kinds")
      ->delimiter(',')
      ->check(CLI::IsMember({"numeric", "wep"}))
      ->capture_default_str();
  gen_cmd->add_option("--second-closest-rate", gen_second, "WEP second-closest rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen_cmd->add_option("-o,--out", gen_out, "Dataset file (default: stdout)");
  gen_cmd->add_option("--problog-dir", gen_problog_dir, "Also write one ProbLog program per instance here");
  gen_cmd->add_option("--manifest", gen_manifest, "Run manifest (default: <out>.manifest.json when --out is set)");
  gen_cmd->callback([&] {
    action = [&] {
      GenerationOptions options;
      options.kinds.clear();
      for (const auto& k : gen_kinds) options.kinds.push_back(premise_kind_from(k));
      options.wep.second_closest_rate = gen_second;
      std::vector<DatasetInstance> all;
      std::vector<BayesianNetwork> networks;
      for (const auto& path : gen_networks) {
        networks.push_back(load_network(path));
        auto part = generate_dataset(networks.back(), gen_count, cfg.seed, options);
        if (!gen_problog_dir.empty()) {
          std::filesystem::create_directories(gen_problog_dir);
          for (const auto& inst : part) {
            const auto program = problog::query_program(networks.back(), inst.qe.evidence, inst.qe.query);
            write_text_file(std::filesystem::path(gen_problog_dir) / (inst.id + ".pl"), problog::serialize(program));
          }
        }
        std::move(part.begin(), part.end(), std::back_inserter(all));
      }
      emit(gen_out, to_jsonl(all), out);

      std::string manifest_path = gen_manifest;
      if (manifest_path.empty() && !gen_out.empty() && gen_out != "-") manifest_path = gen_out + ".manifest.json";
      if (!manifest_path.empty()) {
        json m;
        m["seed"] = cfg.seed;
        m["count_per_network"] = gen_count;
        m["networks"] = gen_networks;
        json ids = json::array();
        for (const auto& n : networks) ids.push_back(n.metadata().name);
        m["network_ids"] = ids;
        m["kinds"] = gen_kinds;
        m["second_closest_rate"] = gen_second;
        m["instances"] = all.size();
        write_text_file(manifest_path, m.dump(2) + "\n");
      }
    };
  });

  // wep
  std::optional<double> wep_prob;
  std::string wep_phrase;
  std::vector<double> wep_dist;
  std::size_t wep_draws = 1;
  double wep_second = wep::kDefaultSecondClosestRate;
  auto* wep_cmd = app.add_subcommand("wep", "Words of estimative probability");
  auto* wep_prob_opt = wep_cmd->add_option("--prob", wep_prob, "Probability to verbalize");
  auto* wep_phrase_opt = wep_cmd->add_option("--phrase", wep_phrase, "Phrase to look up");
  auto* wep_dist_opt = wep_cmd->add_option("--distribution", wep_dist, "Distribution to verbalize")->delimiter(',');
  wep_cmd->add_option("--draws", wep_draws, "Number of draws for --prob")->check(CLI::PositiveNumber)->capture_default_str();
  wep_cmd->add_option("--second-closest-rate", wep_second)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  wep_prob_opt->excludes(wep_phrase_opt)->excludes(wep_dist_opt);
  wep_phrase_opt->excludes(wep_dist_opt);
  wep_cmd->callback([&] {
    action = [&] {
      Rng rng(cfg.seed);
      const wep::WepOptions options{wep_second};
      if (!wep_prob && wep_phrase.empty() && wep_dist.empty()) {
        throw Error(ErrorKind::InvalidArgument, "one of --prob, --phrase, --distribution is required");
      }
      if (!wep_phrase.empty()) {
        const double p = wep::wep_to_prob(wep_phrase);
        if (cfg.machine()) print_json(out, {{"phrase", wep_phrase}, {"probability", p}});
        else fmt::print(out, "{}\n", cfg.num(p));
      } else if (wep_prob) {
        for (std::size_t i = 0; i < wep_draws; ++i) {
          const auto sel = wep::prob_to_wep(*wep_prob, rng, options);
          if (cfg.machine()) print_json(out, {{"phrase", sel.phrase}, {"second_closest", sel.used_second_closest}});
          else fmt::print(out, "{}\n", sel.phrase);
        }
      } else {
        const auto v = wep::verbalize_distribution(wep_dist, rng, options);
        if (cfg.machine()) {
          json phrases = json::array();
          for (const auto& p : v.phrases) phrases.push_back(p.phrase);
          print_json(out, {{"equally_likely", v.equally_likely}, {"phrases", phrases}, {"most_likely", v.most_likely}});
        } else if (v.equally_likely) {
          fmt::print(out, "equally likely\n");
        } else {
          for (std::size_t i = 0; i < v.phrases.size(); ++i) fmt::print(out, "{}\t{}\n", i, v.phrases[i].phrase);
          if (!v.most_likely.empty()) fmt::print(out, "most likely: {}\n", fmt::join(v.most_likely, ", "));
        }
      }
    };
  });

  // classify
  std::string cls_network, cls_query;
  std::vector<std::string> cls_evidence;
  auto* cls_cmd = app.add_subcommand("classify", "Reasoning type of a query");
  cls_cmd->add_option("--network", cls_network, "Network file")->required()->check(CLI::ExistingFile);
  cls_cmd->add_option("--query", cls_query, "Query variable (var or var=state)")->required();
  cls_cmd->add_option("--evidence", cls_evidence, "var=state (repeatable)")->required();
  cls_cmd->callback([&] {
    action = [&] {
      const BayesianNetwork net = load_network(cls_network);
      const Assignment evidence = parse_bindings(cls_evidence);
      const std::string var = cls_query.substr(0, cls_query.find('='));
      net.variable(var);
      for (const auto& [v, s] : evidence.bindings) {
        if (net.variable(v).state_index(s) == std::nullopt) {
          throw Error(ErrorKind::UnknownState, fmt::format("variable '{}' has no state '{}'", v, s));
        }
      }
      if (evidence.binds(var)) throw Error(ErrorKind::OverlappingBindings, fmt::format("'{}' is also evidence", var));
      const ReasoningLabels labels = classify_reasoning(net, evidence, var);
      std::vector<std::string> types;
      for (auto t : labels.types) types.emplace_back(to_string(t));
      const std::string primary = labels.primary ? std::string(to_string(*labels.primary)) : "none";
      if (cfg.machine()) {
        print_json(out, {{"types", types}, {"primary", labels.primary ? json(primary) : json(nullptr)}});
      } else {
        fmt::print(out, "types: {}\nprimary: {}\n", types.empty() ? "none" : fmt::format("{}", fmt::join(types, ", ")), primary);
      }
    };
  });

  // score
  std::string score_dataset, score_predictions;
  std::vector<std::size_t> score_edges;
  auto* score_cmd = app.add_subcommand("score", "Score predictions against gold answers");
  score_cmd->add_option("--dataset", score_dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--predictions", score_predictions, "Prediction file")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--premise-buckets", score_edges, "Bucket edges over premise counts")->delimiter(',');
  score_cmd->callback([&] {
    action = [&] {
      const auto instances = load_instances(score_dataset);
      const auto predictions = metrics::predictions_from_jsonl(read_text_file(score_predictions));
      metrics::ScoreOptions options;
      options.premise_edges = score_edges;
      const auto report = metrics::score(instances, predictions, options);
      if (cfg.machine()) {
        auto groups = [](const std::map<std::string, metrics::Metrics>& g) {
          json j = json::object();
          for (const auto& [k, m] : g) j[k] = metrics_json(m);
          return j;
        };
        print_json(out, {{"overall", metrics_json(report.overall)},
                         {"by_type", groups(report.by_type)},
                         {"by_network", groups(report.by_network)},
                         {"by_premises", groups(report.by_premises)}});
      } else {
        print_metrics_table(out, report, cfg);
      }
    };
  });

  // baseline
  std::string base_dataset, base_out;
  auto* base_cmd = app.add_subcommand("baseline", "Predict 0.5 for every instance");
  base_cmd->add_option("--dataset", base_dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  base_cmd->add_option("-o,--out", base_out, "Prediction file (default: stdout)");
  base_cmd->callback([&] {
    action = [&] { emit(base_out, metrics::predictions_to_jsonl(metrics::baseline_fifty(load_instances(base_dataset))), out); };
  });

  // stats
  std::vector<std::string> stats_networks;
  std::string stats_dataset;
  auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics");
  stats_cmd->add_option("--network", stats_networks, "Network files")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--dataset", stats_dataset, "Dataset file")->check(CLI::ExistingFile);
  stats_cmd->callback([&] {
    action = [&] {
      std::vector<BayesianNetwork> networks;
      for (const auto& path : stats_networks) networks.push_back(load_network(path));
      std::vector<DatasetInstance> instances;
      if (!stats_dataset.empty()) instances = load_instances(stats_dataset);
      const DatasetStats s = dataset_stats(networks, instances);
      auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.stddev}}; };
      if (cfg.machine()) {
        print_json(out, {{"networks", s.networks},
                         {"variables", s.variables},
                         {"premises_numeric", s.premises_numeric},
                         {"premises_wep", s.premises_wep},
                         {"instances", s.instances},
                         {"evidence_statements", s.evidence_statements},
                         {"queries", s.queries},
                         {"causal", s.causal},
                         {"evidential", s.evidential},
                         {"explaining_away", s.explaining_away},
                         {"unlabeled", s.unlabeled},
                         {"states_per_variable", ms(s.states_per_variable)},
                         {"variables_per_network", ms(s.variables_per_network)},
                         {"premises_per_network", ms(s.premises_per_network)}});
      } else {
        auto pm = [&](const MeanStd& m) { return fmt::format("{} ± {}", cfg.num(m.mean), cfg.num(m.stddev)); };
        fmt::print(out,
                   "networks               {}\nvariables              {}\npremises (numeric)     {}\n"
                   "premises (wep)         {}\ninstances              {}\nevidence statements    {}\n"
                   "queries                {}\ncausal                 {}\nevidential             {}\n"
                   "explaining away        {}\nunlabeled              {}\nstates / variable      {}\n"
                   "variables / network    {}\npremises / network     {}\n",
                   s.networks, s.variables, s.premises_numeric, s.premises_wep, s.instances, s.evidence_statements,
                   s.queries, s.causal, s.evidential, s.explaining_away, s.unlabeled, pm(s.states_per_variable),
                   pm(s.variables_per_network), pm(s.premises_per_network));
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "error: IoError: {}\n", e.what());
  }
  return 1;
}

}  // namespace bayesqa
