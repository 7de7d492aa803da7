#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "marlaudit/audit.hpp"

namespace marlaudit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;

// One training run: a recorded dataset, or just the returns of a run whose
// trajectories were not recorded (identified by algorithm/architecture/seed).
struct RunSpec {
  std::optional<std::filesystem::path> dataset;
  std::string algorithm;
  std::string architecture;
  std::int64_t seed = 0;
  std::vector<double> returns;
};

struct ScenarioSpec {
  std::string name;
  std::string group;
  std::vector<RunSpec> runs;
};

struct AuditConfig {
  std::optional<std::uint64_t> seed;
  AuditSettings settings;  // settings.seed is filled from `seed` when the audit starts
  std::filesystem::path output_dir;
  ReportFormat format = ReportFormat::Markdown;
  std::vector<ScenarioSpec> scenarios;
};

// Relative paths resolve against base_dir. Unknown keys are rejected.
AuditConfig parse_audit_config(std::string_view text, const std::filesystem::path& base_dir);

// Runs every scenario, writes <scenario>.verdict.json files and the report
// (audit_report.md or audit_report.json) into cfg.output_dir. Scenario
// failures are isolated; returns the process exit code.
int run_audit(const AuditConfig& cfg, unsigned jobs, std::ostream& log);

// Full command line without the program name, e.g. {"gen", "memory-copy", ...}.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace marlaudit
