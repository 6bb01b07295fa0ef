#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cohspace {

// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitConfig = 2;

// Entry point of the cohspace tool. Payloads go to --out (atomically) or to
// `out`; the run report goes to --report, <out>.report.json, or `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Executes one command on an already merged config and returns
// {"payload": json, "csv": string, "warnings": [...], "summary": {...}}.
nlohmann::json run_command(const std::string& command, const nlohmann::json& config, int threads);

std::vector<std::string> cli_commands();

// Shortest round-trip decimal form, independent of the global locale.
std::string format_number(double v);

}  // namespace cohspace
