#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shapdb/shapdb.hpp"

namespace shapdb::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, input_error = 1, budget_exceeded = 2, checksum_failure = 3 };

struct RunConfig {
  std::string mode;  // shapq | shapi | classify
  std::string db_path, query_path, fd_path, out_path;
  std::string engine = "auto";
  std::string approx = "additive";
  std::string measure;
  std::string gap;
  std::vector<FactId> facts;
  double epsilon = 0.05;
  double delta = 0.1;
  std::optional<double> range;
  std::uint64_t seed = 0;
  std::uint64_t budget = kDefaultBudget;
  std::size_t permutation_cap = 9;
  std::size_t subset_cap = 20;
  std::size_t workers = 1;
  bool no_zero_certification = false;
  bool timing = false;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "3", "1/6" or a finite decimal such as "0.05", converted exactly.
inline Rational parse_rational(const std::string& text) {
  auto bad = [&] { return Error("invalid rational '" + text + "'"); };
  try {
    if (auto slash = text.find('/'); slash != std::string::npos) {
      Integer num(text.substr(0, slash)), den(text.substr(slash + 1));
      if (den == 0) throw bad();
      return Rational(num, den);
    }
    if (auto dot = text.find('.'); dot != std::string::npos) {
      std::string digits = text.substr(0, dot) + text.substr(dot + 1);
      Integer scale = 1;
      for (std::size_t i = dot + 1; i < text.size(); ++i) scale *= 10;
      return Rational(Integer(digits.empty() ? "0" : digits), scale);
    }
    return Rational(Integer(text));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
}

inline Json rational_json(const Rational& q) {
  return Json{{"num", numerator(q).str()}, {"den", denominator(q).str()}};
}

inline Engine parse_engine(const std::string& s) {
  if (s == "auto") return Engine::automatic;
  if (s == "brute-perm") return Engine::brute_perm;
  if (s == "brute-subset") return Engine::brute_subset;
  if (s == "hierarchical") return Engine::hierarchical;
  if (s == "closed-form") return Engine::closed_form;
  if (s == "sample") return Engine::sample;
  throw Error("unknown engine '" + s + "'");
}

inline AttributionConfig attribution_config(const RunConfig& rc) {
  AttributionConfig c;
  c.engine = parse_engine(rc.engine);
  if (rc.approx == "additive") c.approx = ApproxMode::additive;
  else if (rc.approx == "multiplicative") c.approx = ApproxMode::multiplicative;
  else throw Error("unknown approximation mode '" + rc.approx + "'");
  if (c.engine == Engine::sample || c.engine == Engine::automatic) {
    if (!(rc.epsilon > 0)) throw Error("--epsilon must be positive");
    if (!(rc.delta > 0 && rc.delta < 1)) throw Error("--delta must lie in (0,1)");
  }
  c.epsilon = rc.epsilon;
  c.delta = rc.delta;
  c.seed = rc.seed;
  c.range = rc.range;
  if (!rc.gap.empty()) {
    c.gap = parse_rational(rc.gap);
    if (*c.gap <= 0) throw Error("--gap must be positive");
  }
  c.zero_certification = !rc.no_zero_certification;
  c.permutation_cap = rc.permutation_cap;
  c.subset_cap = rc.subset_cap;
  c.budget = rc.budget;
  c.workers = rc.workers;
  return c;
}

inline Json fact_entry(const Database& db, const Attribution& a) {
  const Fact& f = db.fact(a.fact);
  Json e{{"id", a.fact}, {"fact", Database::describe(f)}, {"provenance", f.endogenous() ? "endo" : "exo"}};
  e["engine"] = a.engine;
  if (const auto* r = std::get_if<Rational>(&a.value)) {
    e["exact"] = true;
    e["value"] = rational_json(*r);
    if (a.certified_zero) e["certified_zero"] = true;
    return e;
  }
  e["exact"] = false;
  if (const auto* est = std::get_if<Estimate>(&a.value)) {
    e["value"] = est->value;
    e["guarantee"] = Json{{"mode", "additive"},   {"epsilon", est->epsilon}, {"delta", est->delta},
                          {"samples", est->samples}, {"range", est->range},   {"seed", est->seed}};
  } else {
    const auto& m = std::get<MultiplicativeEstimate>(a.value);
    e["value"] = m.value;
    e["guarantee"] = Json{{"mode", "multiplicative"},
                          {"epsilon", m.epsilon},
                          {"delta", m.delta},
                          {"samples", m.samples},
                          {"range", m.range},
                          {"seed", m.seed},
                          {"gap", m.gap},
                          {"additive_epsilon", m.additive_epsilon},
                          {"raw_estimate", m.raw},
                          {"thresholded", m.thresholded}};
  }
  return e;
}

// Sum of the reported values against the grand-coalition utility. Exact only
// when every player was attributed exactly.
inline Json checksum(const std::vector<Attribution>& values, std::size_t player_count, const Rational& target,
                     bool target_known, bool& failed) {
  const bool complete = values.size() == player_count;
  const bool exact = std::all_of(values.begin(), values.end(), [](const auto& a) { return a.exact(); });
  Json c{{"complete", complete}, {"exact", exact}};
  if (target_known) c["target"] = rational_json(target);
  else c["target"] = nullptr;
  if (exact) {
    Rational sum = 0;
    for (const auto& a : values) sum += std::get<Rational>(a.value);
    c["sum"] = rational_json(sum);
    if (complete && target_known) {
      c["matches"] = sum == target;
      failed = sum != target;
    } else {
      c["matches"] = nullptr;
    }
  } else {
    double sum = 0;
    for (const auto& a : values) sum += a.approx();
    c["sum"] = sum;
    c["matches"] = nullptr;
  }
  return c;
}

inline Json classification_json(const QueryClassification& c) {
  Json ds = Json::array();
  for (const auto& d : c.disjuncts) ds.push_back(Json{{"self_join_free", d.self_join_free}, {"hierarchical", d.hierarchical}});
  return Json{{"disjuncts", ds},
              {"read_once_path", c.read_once_path},
              {"exact_complexity", c.exact_complexity},
              {"approximation", c.approximation}};
}

inline Json tractability_json(const TractabilityReport& r) {
  Json cites = Json::array();
  for (const auto& c : r.citations) cites.push_back(Json{{"key", c.key}, {"statement", c.statement}});
  Json norm = Json::array();
  for (const auto& fd : r.normalized) norm.push_back(to_string(fd));
  return Json{{"measure", to_string(r.measure)}, {"lhs_chain", r.lhs_chain},       {"column", r.column},
              {"exact", r.exact},                {"approximation", r.approximation}, {"verdict", r.verdict()},
              {"citations", cites},              {"normalized_fds", norm}};
}

struct Outcome {
  Json report;
  int code = ok;
};

inline Outcome run_shapq(const RunConfig& rc) {
  const Database db = parse_database(read_file(rc.db_path));
  const UCQ q = parse_query(read_file(rc.query_path));
  const auto config = attribution_config(rc);
  const auto r = shapq_dispatch(q, db, rc.facts, config);

  Outcome out;
  Json& j = out.report;
  j["command"] = "shapq";
  j["engine"] = r.engine;
  j["classification"] = classification_json(r.classification);
  j["query"] = Json{{"true_on_database", r.query_true}, {"true_on_exogenous", r.query_true_on_exogenous}};
  if (r.gap) j["gap"] = Json{{"value", rational_json(*r.gap)}, {"heuristic_default", r.gap_is_default}};
  Json facts = Json::array();
  for (const auto& a : r.values) facts.push_back(fact_entry(db, a));
  j["facts"] = facts;
  bool failed = false;
  const Rational target = Rational((r.query_true ? 1 : 0) - (r.query_true_on_exogenous ? 1 : 0));
  j["checksum"] = checksum(r.values, db.endogenous_indices().size(), target, true, failed);
  j["seed"] = rc.seed;
  if (failed) out.code = checksum_failure;
  return out;
}

inline Outcome run_shapi(const RunConfig& rc) {
  const Database db = parse_database(read_file(rc.db_path));
  const auto fds = parse_fds(read_file(rc.fd_path), &db.schema());
  const auto kind = parse_measure(rc.measure);
  if (!kind) throw Error("--measure must be one of drastic, MI, P, R, MC");
  const auto config = attribution_config(rc);
  const auto r = shapi_dispatch(db, fds, *kind, rc.facts, config);

  Outcome out;
  Json& j = out.report;
  j["command"] = "shapi";
  j["measure"] = to_string(*kind);
  j["engine"] = r.engine;
  j["classification"] = tractability_json(tractability_report(fds, *kind));
  j["measure_value"] = r.measure_known ? rational_json(r.measure_value) : Json(nullptr);
  if (r.gap) j["gap"] = Json{{"value", rational_json(*r.gap)}, {"heuristic_default", false}};
  Json facts = Json::array();
  for (const auto& a : r.values) facts.push_back(fact_entry(db, a));
  j["facts"] = facts;
  bool failed = false;
  j["checksum"] = checksum(r.values, db.size(), r.measure_value, r.measure_known, failed);
  j["seed"] = rc.seed;
  if (failed) out.code = checksum_failure;
  return out;
}

inline Outcome run_classify(const RunConfig& rc) {
  if (rc.query_path.empty() && rc.fd_path.empty()) throw Error("classify needs --query and/or --fds");
  Outcome out;
  Json& j = out.report;
  j["command"] = "classify";
  if (!rc.query_path.empty()) j["query"] = classification_json(classify_ucq(parse_query(read_file(rc.query_path))));
  if (!rc.fd_path.empty()) {
    const auto fds = parse_fds(read_file(rc.fd_path));
    std::vector<MeasureKind> kinds;
    if (rc.measure.empty()) {
      kinds = {MeasureKind::drastic, MeasureKind::MI, MeasureKind::P, MeasureKind::R, MeasureKind::MC};
    } else if (auto k = parse_measure(rc.measure)) {
      kinds = {*k};
    } else {
      throw Error("--measure must be one of drastic, MI, P, R, MC");
    }
    Json reports = Json::array();
    for (auto k : kinds) reports.push_back(tractability_json(tractability_report(fds, k)));
    const auto chain = lhs_chain_classify(fds);
    j["fds"] = Json{{"lhs_chain_after_normalization", chain.chain_after_normalization}, {"reports", reports}};
    if (kinds.size() == 1) j["verdict"] = reports[0]["verdict"];
  }
  return out;
}

inline std::uint64_t budget_from_env() {
  if (const char* env = std::getenv("SHAPDB_BUDGET"); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error("SHAPDB_BUDGET must be a positive integer");
    }
  }
  return kDefaultBudget;
}

// Entry point shared by the executable and the tests. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Shapley-value attribution for query answers and database inconsistency", "shapdb"};
  app.require_subcommand(1);

  auto add_engine_options = [&](CLI::App* sub) {
    sub->add_option("--db", rc.db_path, "fact file")->required();
    sub->add_option("--engine", rc.engine, "auto|brute-perm|brute-subset|hierarchical|closed-form|sample");
    sub->add_option("--approx", rc.approx, "sampling mode: additive|multiplicative");
    sub->add_option("--epsilon", rc.epsilon, "sampling error (additive, or relative when multiplicative)");
    sub->add_option("--delta", rc.delta, "sampling failure probability");
    sub->add_option("--seed", rc.seed, "random seed");
    sub->add_option("--gap", rc.gap, "lower bound on nonzero values, e.g. 1/30");
    sub->add_option("--range", rc.range, "width of the marginal-contribution interval");
    sub->add_option("--facts", rc.facts, "fact ids to attribute (default: all)")->delimiter(',');
    sub->add_option("--perm-cap", rc.permutation_cap, "player cap of the permutation engine");
    sub->add_option("--subset-cap", rc.subset_cap, "player cap of the subset engine");
    sub->add_option("--budget", rc.budget, "work budget for exact graph measures (default: $SHAPDB_BUDGET)");
    sub->add_option("--workers", rc.workers, "threads used by the sampler");
    sub->add_flag("--no-zero-cert", rc.no_zero_certification, "skip exact zero certification before sampling");
    sub->add_flag("--timing", rc.timing, "include wall-clock timing in the report");
    sub->add_option("--out", rc.out_path, "write the JSON report to this file");
  };

  auto* shapq = app.add_subcommand("shapq", "contribution of endogenous facts to a Boolean UCQ");
  add_engine_options(shapq);
  shapq->add_option("--query", rc.query_path, "query file")->required();

  auto* shapi = app.add_subcommand("shapi", "contribution of facts to inconsistency under FDs");
  add_engine_options(shapi);
  shapi->add_option("--fds", rc.fd_path, "FD file")->required();
  shapi->add_option("--measure", rc.measure, "drastic|MI|P|R|MC")->required();

  auto* classify = app.add_subcommand("classify", "tractability classification only");
  classify->add_option("--query", rc.query_path, "query file");
  classify->add_option("--fds", rc.fd_path, "FD file");
  classify->add_option("--measure", rc.measure, "drastic|MI|P|R|MC");
  classify->add_option("--out", rc.out_path, "write the JSON report to this file");

  try {
    rc.budget = budget_from_env();
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "shapdb: " << e.what() << "\n";
    return input_error;
  } catch (const Error& e) {
    err << "shapdb: " << e.what() << "\n";
    return input_error;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    Outcome result;
    if (shapq->parsed()) result = run_shapq(rc);
    else if (shapi->parsed()) result = run_shapi(rc);
    else result = run_classify(rc);
    if (rc.timing)
      result.report["timing_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::string text = result.report.dump(2) + "\n";
    if (rc.out_path.empty()) {
      out << text;
    } else {
      std::ofstream file(rc.out_path, std::ios::binary);
      if (!file) throw Error("cannot write " + rc.out_path);
      file << text;
    }
    if (result.code == checksum_failure) err << "shapdb: efficiency checksum failed\n";
    return result.code;
  } catch (const BudgetExceeded& e) {
    err << "shapdb: " << e.what() << "\n";
    return budget_exceeded;
  } catch (const Error& e) {
    err << "shapdb: " << e.what() << "\n";
    return input_error;
  }
}

}  // namespace shapdb::cli
