// Command-line driver: load, attach, analyze, run, oracle, generate, sweep,
// insert-bench.
#include "parachute/attach.hpp"
#include "parachute/bench.hpp"
#include "parachute/database.hpp"
#include "parachute/engine.hpp"
#include "parachute/oracle.hpp"
#include "parachute/planner.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <fmt/ranges.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

using namespace parachute;
namespace fs = std::filesystem;

namespace {

void configure_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_st("parachute"));
  spdlog::set_level(spdlog::level::warn);
  if (const char *env = std::getenv("PARACHUTE_LOG")) {
    const std::string level = env;
    if (level == "error")
      spdlog::set_level(spdlog::level::err);
    else if (level == "info")
      spdlog::set_level(spdlog::level::info);
    else if (level == "debug")
      spdlog::set_level(spdlog::level::debug);
    else
      spdlog::warn("ignoring PARACHUTE_LOG={} (expected error, info or debug)", level);
  }
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw LookupError("cannot write " + path);
  out << text;
}

std::vector<std::string> split(const std::string &s) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == ',') {
      if (i > start)
        out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

std::string csv_field(const std::optional<Datum> &v) {
  if (!v)
    return "";
  if (is_int(*v))
    return std::to_string(as_int(*v));
  const auto &s = as_string(*v);
  if (s.find_first_of(",\"\n") == std::string::npos && !s.empty())
    return s;
  std::string q = "\"";
  for (char c : s)
    q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

struct QueryInput {
  Query query;
  QueryPlan plan;
  bool plan_supplied = false;
};

QueryInput read_query(const Database &db, const std::string &query_path, const std::string &plan_path) {
  QueryInput in;
  in.query = load_query(query_path);
  validate_query(in.query, db.schema());
  if (!plan_path.empty()) {
    in.plan = load_plan(plan_path);
    in.plan_supplied = true;
  } else {
    in.plan = plan_for(db, in.query);
    in.plan_supplied = in.query.plan.has_value();
  }
  complete_plan(in.plan, in.query);
  return in;
}

// ---------------------------------------------------------------------------

int cmd_load(const std::string &schema_path, const std::string &data_dir, const std::string &out) {
  const auto schema = load_schema(schema_path);
  auto db = load_csv_directory(schema, data_dir);
  save_bundle(db, out);
  for (const auto &[name, t] : db.tables())
    fmt::print("{}: {} rows\n", name, t.row_count());
  return 0;
}

int cmd_attach(const std::string &bundle, const std::string &spec_path, unsigned pbw, bool relaxed,
               size_t sample_size, uint64_t seed, bool serial) {
  auto db = load_bundle(bundle);
  const auto spec = load_attach_spec(spec_path);
  AttachOptions o;
  o.pbw = pbw;
  o.relaxed = relaxed;
  o.sample_size = sample_size;
  o.seed = seed;
  o.parallel = !serial;
  const auto stats = attach_all(db, spec, o);
  save_bundle(db, bundle);
  fmt::print("{:<16} {:<44} {:>4} {:>10} {:>12} {:>9}\n", "fk_table", "parachute column", "pbw", "seconds",
             "extra_bytes", "overhead");
  for (const auto &s : stats) {
    size_t base_bytes = 0;
    const auto &t = db.table(s.fk_table);
    for (const auto &c : t.column_names()) {
      const auto &col = t.column(c);
      if (col.type() == LogicalType::Int64)
        base_bytes += col.size() * sizeof(int64_t);
      else
        for (const auto &str : col.strings())
          base_bytes += str.size();
    }
    for (const auto &d : s.descriptors)
      fmt::print("{:<16} {:<44} {:>4} {:>10.4f} {:>12} {:>8.2f}%\n", s.fk_table, d.column, d.pbw, s.seconds,
                 d.extra_space_bytes,
                 base_bytes ? 100.0 * static_cast<double>(d.extra_space_bytes) / static_cast<double>(base_bytes) : 0.0);
  }
  return 0;
}

void print_matrix(const FlowAnalysis &f) {
  if (f.aliases.size() < 2) {
    fmt::print("flow matrix: empty (fewer than two aliases)\n");
    return;
  }
  size_t w = 6;
  for (const auto &a : f.aliases)
    w = std::max(w, a.size() + 1);
  fmt::print("flow matrix (row flows to column, transitive):\n{:<{}}", "", w);
  for (const auto &a : f.aliases)
    fmt::print("{:>{}}", a, w);
  fmt::print("\n");
  for (size_t i = 0; i < f.aliases.size(); ++i) {
    fmt::print("{:<{}}", f.aliases[i], w);
    for (size_t j = 0; j < f.aliases.size(); ++j)
      fmt::print("{:>{}}", i == j ? "-" : (f.closure[i][j] ? "1" : "0"), w);
    fmt::print("\n");
  }
}

int cmd_analyze(const std::string &bundle, const std::string &query_path, const std::string &plan_path,
                const std::string &flow_mode) {
  const auto db = load_bundle(bundle);
  const auto in = read_query(db, query_path, plan_path);
  const auto mode = flow_mode_from_string(flow_mode);
  const auto pipes = decompose_pipelines(in.plan);
  fmt::print("pipelines:\n");
  for (int p = 0; p < pipes.count; ++p) {
    std::vector<std::string> members;
    for (const auto &a : pipes.aliases)
      if (pipes.of(a) == p)
        members.push_back(a + (pipes.probe(a) ? "*" : ""));
    fmt::print("  {}: {}\n", p, fmt::join(members, " "));
  }
  const auto flow = analyze_flows(pipes, QueryClasses(in.query), mode);
  print_matrix(flow);
  const auto pairs = blocked_pairs(in.query, in.plan, db.catalog(), mode);
  fmt::print("blocked pairs ({}):\n", pairs.size());
  for (const auto &p : pairs)
    fmt::print("  {} -> {} via descriptor {} on {} (target pipeline {})\n", p.source, p.target, p.descriptor,
               p.source_column, pipes.of(p.target));
  return 0;
}

int cmd_run(const std::string &bundle, const std::string &query_path, const std::string &plan_path,
            const std::string &mode_name, const std::string &oracle_path, const std::string &metrics_path,
            const std::string &out_path, uint64_t seed) {
  const auto db = load_bundle(bundle);
  const auto in = read_query(db, query_path, plan_path);
  const auto mode = exec_mode_from_string(mode_name);

  std::optional<OracleSets> oracle;
  if (!oracle_path.empty()) {
    if (fs::exists(oracle_path)) {
      std::ifstream f(oracle_path);
      oracle = oracle_sets_from_json(nlohmann::json::parse(f));
      if (oracle->query_id != in.query.id)
        oracle.reset();
    }
    if (!oracle) {
      oracle = semijoin_reduce(db, in.query);
      write_text(oracle_path, nlohmann::json(*oracle).dump() + "\n");
    }
  }

  Query q = in.query;
  std::vector<BlockedPair> pairs;
  std::vector<std::string> warnings;
  if (uses_parachutes(mode)) {
    pairs = blocked_pairs(in.query, in.plan, db.catalog());
    auto rewritten = drop_parachutes(in.query, pairs, db.catalog());
    q = std::move(rewritten.query);
    warnings = std::move(rewritten.warnings);
  }
  ExecOptions eo;
  eo.hash_seed = seed;
  auto res = execute(db, in.plan, q, mode, eo);
  if (oracle)
    res.metrics.dangling_fraction = dangling_report(res.metrics, *oracle);

  std::string text;
  for (size_t i = 0; i < q.projection.size(); ++i)
    text += (i ? "," : "") + to_string(q.projection[i]);
  text += "\n";
  for (size_t r = 0; r < res.rows.size(); ++r) {
    const auto row = project_row(db, q, res.rows, r);
    for (size_t i = 0; i < row.size(); ++i)
      text += (i ? "," : "") + csv_field(row[i]);
    text += "\n";
  }
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);

  auto j = metrics_summary_json(res.metrics);
  j["plan"] = in.plan;
  j["plan_supplied"] = in.plan_supplied;
  j["checksum"] = fmt::format("{:016x}", result_checksum(db, q, res.rows));
  auto &jp = j["blocked_pairs"] = nlohmann::json::array();
  for (const auto &p : pairs)
    jp.push_back({{"source", p.source}, {"target", p.target}, {"descriptor", p.descriptor}});
  j["injected"] = nlohmann::json::object();
  for (const auto &[alias, preds] : q.parachute_predicates) {
    auto &arr = j["injected"][alias] = nlohmann::json::array();
    for (const auto &p : preds)
      arr.push_back({{"descriptor", p.descriptor}, {"source", p.source}, {"predicate", p.predicate}});
  }
  j["warnings"] = warnings;
  if (!metrics_path.empty())
    write_text(metrics_path, j.dump(2) + "\n");
  spdlog::info("{} rows, checksum {}", res.rows.size(), j["checksum"].get<std::string>());
  return 0;
}

int cmd_oracle(const std::string &bundle, const std::string &query_path, const std::string &out) {
  const auto db = load_bundle(bundle);
  const auto q = load_query(query_path);
  validate_query(q, db.schema());
  const auto sets = semijoin_reduce(db, q);
  const std::string text = nlohmann::json(sets).dump() + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
  for (const auto &[alias, rows] : sets.rows)
    spdlog::info("{}: {} of {} rows non-dangling", alias, rows.size(), sets.table_rows.at(alias));
  return 0;
}

int cmd_generate(uint64_t seed, unsigned scale, const std::string &out) {
  const auto data = generate_snowflake(seed, scale);
  write_snowflake(data, out);
  for (const auto &t : data.tables)
    fmt::print("{}: {} rows\n", t.name(), t.row_count());
  fmt::print("{} queries over {} templates\n", data.queries.size(), snowflake_template_count());
  return 0;
}

SnowflakeData workload(const std::string &data_dir, uint64_t seed, unsigned scale) {
  return data_dir.empty() ? generate_snowflake(seed, scale) : load_snowflake(data_dir);
}

int cmd_sweep(const std::string &data_dir, uint64_t seed, unsigned scale, const std::string &pbw_list,
              const std::string &mode_list, const std::string &out, const std::string &csv, unsigned repeats) {
  const auto data = workload(data_dir, seed, scale);
  std::vector<unsigned> pbws;
  for (const auto &p : split(pbw_list))
    pbws.push_back(static_cast<unsigned>(std::stoul(p)));
  std::vector<ExecMode> modes;
  for (const auto &m : split(mode_list))
    modes.push_back(exec_mode_from_string(m));
  SweepOptions so;
  so.seed = seed;
  so.repeats = repeats;
  const auto report = sweep(data, pbws, modes, so);
  const std::string text = nlohmann::json(report.rows).dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
  if (!csv.empty())
    write_text(csv, sweep_csv(report));
  if (!report.results_consistent || !report.sound) {
    spdlog::error("sweep found {}", !report.sound ? "a false negative" : "differing results across modes");
    return 1;
  }
  return 0;
}

int cmd_insert_bench(const std::string &data_dir, uint64_t seed, unsigned scale, const std::string &fractions,
                     unsigned pbw, const std::string &out) {
  const auto data = workload(data_dir, seed, scale);
  std::vector<double> fr;
  for (const auto &f : split(fractions))
    fr.push_back(std::stod(f));
  const auto rows = insert_bench(data, fr, pbw, seed);
  const std::string text = nlohmann::json(rows).dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  configure_logging();
  CLI::App app{"Parachute columns: attach, analyze and run pipelined join plans"};
  app.require_subcommand(1);
  uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for sampling, hashing and generation")->capture_default_str();

  std::string schema, data, out, bundle, spec, query, plan, mode = "both", oracle, metrics, flow_mode = "psf";
  std::string pbw_list = "2,4,8,16", modes = "off,psf,parachute,both", csv, fractions = "0.001,0.005,0.01";
  unsigned pbw = 8, scale = 1, repeats = 1;
  size_t sample_size = 10000;
  bool relaxed = false, serial = false;

  auto *load = app.add_subcommand("load", "Ingest CSVs into a bundle");
  load->add_option("--schema", schema)->required();
  load->add_option("--data", data)->required();
  load->add_option("--out", out)->required();

  auto *attach = app.add_subcommand("attach", "Build and attach parachute columns");
  attach->add_option("--bundle", bundle)->required();
  attach->add_option("--spec", spec)->required();
  attach->add_option("--pbw", pbw)->check(CLI::Range(1, 32))->capture_default_str();
  attach->add_flag("--relaxed", relaxed, "Tolerate dangling and duplicate keys");
  attach->add_option("--sample-size", sample_size)->capture_default_str();
  attach->add_flag("--serial", serial, "Use the serial kernels");

  auto *analyze = app.add_subcommand("analyze", "Print the flow matrix and blocked pairs");
  analyze->add_option("--bundle", bundle)->required();
  analyze->add_option("--query", query)->required();
  analyze->add_option("--plan", plan);
  analyze->add_option("--flow-mode", flow_mode)->check(CLI::IsMember({"psf", "lip", "psf-build", "none"}));

  auto *run = app.add_subcommand("run", "Execute a query");
  run->add_option("--bundle", bundle)->required();
  run->add_option("--query", query)->required();
  run->add_option("--plan", plan);
  run->add_option("--mode", mode)->check(CLI::IsMember({"off", "psf", "parachute", "both"}))->capture_default_str();
  run->add_option("--oracle", oracle, "Oracle sets file, computed when absent");
  run->add_option("--metrics", metrics);
  run->add_option("--out", out, "Result CSV (default stdout)");

  auto *orc = app.add_subcommand("oracle", "Compute non-dangling row sets");
  orc->add_option("--bundle", bundle)->required();
  orc->add_option("--query", query)->required();
  orc->add_option("--out", out);

  auto *gen = app.add_subcommand("generate", "Write the synthetic snowflake workload");
  gen->add_option("--scale", scale)->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--out", out)->required();

  auto *sw = app.add_subcommand("sweep", "Dangling fraction, time and space per (pbw, mode)");
  sw->add_option("--data", data, "Workload directory (default: generate from --seed/--scale)");
  sw->add_option("--scale", scale)->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("--pbw", pbw_list)->capture_default_str();
  sw->add_option("--modes", modes)->capture_default_str();
  sw->add_option("--repeats", repeats)->capture_default_str();
  sw->add_option("--out", out, "JSON report (default stdout)");
  sw->add_option("--csv", csv);

  auto *ib = app.add_subcommand("insert-bench", "Time parachute maintenance on inserts");
  ib->add_option("--data", data);
  ib->add_option("--scale", scale)->check(CLI::PositiveNumber)->capture_default_str();
  ib->add_option("--fractions", fractions)->capture_default_str();
  ib->add_option("--pbw", pbw)->check(CLI::Range(1, 32))->capture_default_str();
  ib->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*load)
      return cmd_load(schema, data, out);
    if (*attach)
      return cmd_attach(bundle, spec, pbw, relaxed, sample_size, seed, serial);
    if (*analyze)
      return cmd_analyze(bundle, query, plan, flow_mode);
    if (*run)
      return cmd_run(bundle, query, plan, mode, oracle, metrics, out, seed);
    if (*orc)
      return cmd_oracle(bundle, query, out);
    if (*gen)
      return cmd_generate(seed, scale, out);
    if (*sw)
      return cmd_sweep(data, seed, scale, pbw_list, modes, out, csv, repeats);
    if (*ib)
      return cmd_insert_bench(data, seed, scale, fractions, pbw, out);
  } catch (const CyclicError &e) {
    spdlog::error("oracle unavailable: {}", e.what());
    return 1;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
