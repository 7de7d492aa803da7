#include "marlaudit/cli.hpp"

#include <algorithm>
#include <exception>

#include <CLI11.hpp>
#include <json.hpp>

#include "marlaudit/errors.hpp"
#include "marlaudit/parallel.hpp"
#include "marlaudit/perturb.hpp"
#include "marlaudit/synthetic.hpp"
#include "marlaudit/wire_format.hpp"

namespace marlaudit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": missing or malformed '" + key + "'");
  }
}

template <typename T>
std::optional<T> get_opt(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  return get<T>(obj, key, where);
}

RunSpec parse_run(const json& r, const fs::path& base, const std::string& where) {
  if (!r.is_object()) throw ConfigError(where + ": run must be an object");
  RunSpec run;
  if (r.contains("dataset")) {
    reject_unknown(r, {"dataset", "returns"}, where);
    run.dataset = base / get<std::string>(r, "dataset", where);
  } else {
    reject_unknown(r, {"algorithm", "architecture", "seed", "returns"}, where);
    run.algorithm = get<std::string>(r, "algorithm", where);
    run.architecture = get<std::string>(r, "architecture", where);
    run.seed = get<std::int64_t>(r, "seed", where);
    if (!r.contains("returns")) throw ConfigError(where + ": a run without a dataset needs 'returns'");
  }
  if (r.contains("returns")) run.returns = get<std::vector<double>>(r, "returns", where);
  for (double x : run.returns)
    if (!std::isfinite(x)) throw ConfigError(where + ": returns must be finite");
  return run;
}

}  // namespace

AuditConfig parse_audit_config(std::string_view text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const std::string where = "config";
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, {"seed", "output_dir", "history", "neighbors", "perms", "sample_cap", "n_boot", "format",
                     "quantile_null", "scenarios"},
                 where);
  AuditConfig cfg;
  if (auto s = get_opt<std::int64_t>(j, "seed", where)) {
    if (*s < 0) throw ConfigError("config: seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(*s);
  }
  cfg.output_dir = base_dir / get_opt<std::string>(j, "output_dir", where).value_or("audit");
  if (auto h = get_opt<std::string>(j, "history", where)) cfg.settings.history = parse_history(*h);
  if (auto k = get_opt<int>(j, "neighbors", where)) cfg.settings.k_neighbors = *k;
  if (auto p = get_opt<std::int64_t>(j, "perms", where)) {
    if (*p < 1) throw ConfigError("config: perms must be >= 1");
    cfg.settings.n_permutations = static_cast<std::size_t>(*p);
  }
  if (auto c = get_opt<std::int64_t>(j, "sample_cap", where)) {
    if (*c < 1) throw ConfigError("config: sample_cap must be >= 1");
    cfg.settings.sample_cap = static_cast<std::size_t>(*c);
  }
  if (auto b = get_opt<std::int64_t>(j, "n_boot", where)) {
    if (*b < 1) throw ConfigError("config: n_boot must be >= 1");
    cfg.settings.n_boot = static_cast<std::size_t>(*b);
  }
  if (auto f = get_opt<std::string>(j, "format", where)) cfg.format = parse_report_format(*f);
  if (get_opt<bool>(j, "quantile_null", where).value_or(false)) cfg.settings.rule = FlagRule::Quantile95;
  if (cfg.settings.k_neighbors < 1) throw ConfigError("config: neighbors must be >= 1");

  if (!j.contains("scenarios") || !j["scenarios"].is_array() || j["scenarios"].empty())
    throw ConfigError("config: 'scenarios' must be a nonempty array");
  for (std::size_t s = 0; s < j["scenarios"].size(); ++s) {
    const auto& sj = j["scenarios"][s];
    const std::string sw = "config scenario " + std::to_string(s);
    if (!sj.is_object()) throw ConfigError(sw + ": must be an object");
    reject_unknown(sj, {"name", "group", "runs"}, sw);
    ScenarioSpec spec;
    spec.name = get<std::string>(sj, "name", sw);
    if (spec.name.empty()) throw ConfigError(sw + ": empty name");
    spec.group = get_opt<std::string>(sj, "group", sw).value_or(spec.name);
    if (!sj.contains("runs") || !sj["runs"].is_array() || sj["runs"].empty())
      throw ConfigError(sw + " (" + spec.name + "): 'runs' must be a nonempty array");
    for (std::size_t r = 0; r < sj["runs"].size(); ++r)
      spec.runs.push_back(parse_run(sj["runs"][r], base_dir, sw + " run " + std::to_string(r)));
    for (const auto& other : cfg.scenarios)
      if (other.name == spec.name) throw ConfigError("config: duplicate scenario name '" + spec.name + "'");
    cfg.scenarios.push_back(std::move(spec));
  }
  return cfg;
}

namespace {

std::string file_stem(std::string_view name) {
  std::string out(name);
  for (auto& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  return out;
}

bool is_validation_error(const std::exception& e) {
  return dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
         dynamic_cast<const ConfigError*>(&e);
}

}  // namespace

int run_audit(const AuditConfig& cfg, unsigned jobs, std::ostream& log) {
  if (!cfg.seed) {
    log << "error: a seed is required (config 'seed' or --seed)\n";
    return kExitValidation;
  }
  for (const auto& s : cfg.scenarios)
    for (const auto& r : s.runs) {
      if (!r.dataset) continue;
      for (const char* f : {kManifestFile, kEpisodesFile}) {
        if (!fs::exists(*r.dataset / f)) {
          log << "error: scenario " << s.name << ": missing file " << (*r.dataset / f).string() << '\n';
          return kExitValidation;
        }
      }
    }

  ReportContext ctx;
  ctx.settings = cfg.settings;
  ctx.settings.seed = *cfg.seed;
  fs::create_directories(cfg.output_dir);

  std::vector<ScenarioVerdict> verdicts;
  bool internal_failure = false;
  for (const auto& s : cfg.scenarios) {
    try {
      std::vector<RunRecord> runs;
      for (const auto& r : s.runs) {
        if (r.dataset) {
          const auto d = load_dataset(*r.dataset);
          runs.push_back(audit_dataset(d, r.returns, ctx.settings, jobs));
        } else {
          RunRecord rec;
          rec.manifest.scenario = s.name;
          rec.manifest.algorithm = r.algorithm;
          rec.manifest.architecture = r.architecture;
          rec.manifest.seed = r.seed;
          rec.label = r.algorithm + "-" + r.architecture + " seed " + std::to_string(r.seed);
          rec.returns = r.returns;
          runs.push_back(std::move(rec));
        }
      }
      auto v = aggregate_scenario(s.name, s.group, std::move(runs));
      write_text_file(cfg.output_dir / (file_stem(s.name) + ".verdict.json"), verdict_json(v, ctx));
      log << "scenario " << s.name << ": memory " << verdict_name(v.memory_benefit) << ", private info "
          << verdict_name(v.uses_private_info) << ", synchronous " << verdict_name(v.synchronous_coordination)
          << ", temporal " << verdict_name(v.temporal_coordination) << '\n';
      verdicts.push_back(std::move(v));
    } catch (const std::exception& e) {
      if (!is_validation_error(e)) internal_failure = true;
      log << "error: scenario " << s.name << ": " << e.what() << '\n';
      ctx.failures.emplace_back(s.name, e.what());
    }
  }
  if (verdicts.empty()) {
    log << "error: no scenario could be audited\n";
    return internal_failure ? kExitInternal : kExitValidation;
  }
  const bool json_report = cfg.format == ReportFormat::Json;
  const auto report_path = cfg.output_dir / (json_report ? "audit_report.json" : "audit_report.md");
  write_text_file(report_path, emit_report(verdicts, cfg.format, ctx));
  log << "wrote " << report_path.string() << '\n';
  if (ctx.failures.empty()) return kExitOk;
  return internal_failure ? kExitInternal : kExitValidation;
}

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Information-theoretic audit of recorded multi-agent trajectories", "marl_audit"};
  app.require_subcommand(1);

  auto* audit = app.add_subcommand("audit", "Compute diagnostics, calibrate against permutation nulls, report verdicts");
  std::string config_path;
  unsigned jobs = default_jobs();
  std::optional<std::int64_t> seed_flag;
  std::optional<std::string> format_flag, history_flag, out_flag;
  std::optional<int> neighbors_flag;
  std::optional<std::int64_t> perms_flag;
  bool quantile_flag = false;
  audit->add_option("--config", config_path, "Audit config (JSON)")->required();
  audit->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  audit->add_option("--seed", seed_flag, "Master seed (overrides the config)");
  audit->add_option("--format", format_flag, "Report format: json or markdown");
  audit->add_flag("--quantile-null", quantile_flag, "Flag only above the 95th percentile of the null");
  audit->add_option("--history", history_flag, "hidden or window:K");
  audit->add_option("--neighbors", neighbors_flag, "k for nearest-neighbour estimators");
  audit->add_option("--perms", perms_flag, "Permutations per null");
  audit->add_option("--out", out_flag, "Output directory (overrides the config)");

  auto* gen = app.add_subcommand("gen", "Write a planted synthetic dataset");
  std::string kind_name, gen_out;
  PlantedScenario ps;
  std::optional<std::int64_t> gen_seed;
  gen->add_option("kind", kind_name, "reactive-copy, memory-copy, private-goal, convention-pair, lagged-follower, independent")
      ->required();
  gen->add_option("--lag", ps.lag, "Lag for memory-copy and lagged-follower");
  gen->add_option("--episodes", ps.n_episodes, "Number of episodes");
  gen->add_option("-T,--horizon", ps.T, "Episode length");
  gen->add_option("--seed", gen_seed, "Seed")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--agents", ps.num_agents, "Number of agents");
  gen->add_option("--arity", ps.arity, "Observation and action alphabet size");
  gen->add_option("--architecture", ps.architecture, "Architecture label for the manifest");
  gen->add_option("--algorithm", ps.algorithm, "Algorithm label for the manifest");

  auto* perturb = app.add_subcommand("perturb", "Add feature-scaled Gaussian noise to observations");
  std::string perturb_in, perturb_out;
  double scale = 0.0;
  std::optional<std::int64_t> perturb_seed;
  perturb->add_option("dataset", perturb_in, "Dataset directory")->required();
  perturb->add_option("--scale", scale, "Noise scale in [0, 0.5]")->required();
  perturb->add_option("--seed", perturb_seed, "Seed")->required();
  perturb->add_option("--out", perturb_out, "Output directory")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  auto nonneg_seed = [](std::int64_t s) {
    if (s < 0) throw ConfigError("seed must be nonnegative");
    return static_cast<std::uint64_t>(s);
  };

  try {
    if (*audit) {
      const fs::path path(config_path);
      if (!fs::exists(path)) {
        err << "error: config file not found: " << path.string() << '\n';
        return kExitValidation;
      }
      auto cfg = parse_audit_config(read_text_file(path), path.parent_path());
      if (seed_flag) cfg.seed = nonneg_seed(*seed_flag);
      if (format_flag) cfg.format = parse_report_format(*format_flag);
      if (quantile_flag) cfg.settings.rule = FlagRule::Quantile95;
      if (history_flag) cfg.settings.history = parse_history(*history_flag);
      if (neighbors_flag) {
        if (*neighbors_flag < 1) throw ConfigError("--neighbors must be >= 1");
        cfg.settings.k_neighbors = *neighbors_flag;
      }
      if (perms_flag) {
        if (*perms_flag < 1) throw ConfigError("--perms must be >= 1");
        cfg.settings.n_permutations = static_cast<std::size_t>(*perms_flag);
      }
      if (out_flag) cfg.output_dir = *out_flag;
      return run_audit(cfg, jobs, err);
    }
    if (*gen) {
      ps.kind = parse_planted(kind_name);
      ps.seed = nonneg_seed(*gen_seed);
      const auto d = generate(ps);
      write_dataset(d, gen_out);
      out << "wrote " << d.episodes.size() << " episodes to " << gen_out << '\n';
      return kExitOk;
    }
    if (*perturb) {
      const auto d = load_dataset(perturb_in);
      write_dataset(perturb_observations(d, scale, nonneg_seed(*perturb_seed)), perturb_out);
      out << "wrote perturbed dataset to " << perturb_out << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return is_validation_error(e) ? kExitValidation : kExitInternal;
  }
  return kExitInternal;
}

}  // namespace marlaudit
