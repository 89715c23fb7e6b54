#pragma once

// Line-oriented scenario scripts driving the ledger, the authorities and the
// proof protocols end to end. One command per line, `#` starts a comment,
// options are key=value and every step may carry `expect=<Outcome>`
// (default OK). See README.md for the command reference.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taxledger/authority.hpp"
#include "taxledger/ledger.hpp"

namespace taxledger {

/// Parse errors and references to entities the script never introduced.
class ScenarioError : public Error {
 public:
  ScenarioError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ScenarioStep {
  std::size_t line = 0;
  std::string command;
  std::vector<std::string> args;
  std::map<std::string, std::string> options;
  std::string expected = "OK";
  std::string text;  // the original line, trimmed
};

struct Scenario {
  std::vector<ScenarioStep> steps;

  /// Throws ScenarioError with the offending line number.
  static Scenario parse(std::string_view text);
};

struct StepResult {
  std::size_t line = 0;
  std::string text;
  std::string outcome;
  std::string expected;
  std::string detail;
  bool matched() const { return outcome == expected; }
};

struct ScenarioOptions {
  Bytes seed = {'t', 'a', 'x', 'l', 'e', 'd', 'g', 'e', 'r'};
  TaxPeriodConfig period;
};

struct ScenarioReport {
  std::vector<StepResult> steps;
  LedgerState final_state;
  Digest state_digest{};
  Digest authority_digest{};  // over every authority snapshot, by name
  std::size_t mismatches = 0;

  bool passed() const { return mismatches == 0; }
  /// Deterministic text report: one line per step, then the digests.
  std::string to_text() const;
};

/// Runs the script against a fresh state. Step failures become outcomes;
/// only malformed scripts throw (ScenarioError).
ScenarioReport run_scenario(const Scenario& scenario, const ScenarioOptions& options);
ScenarioReport run_scenario_file(const std::string& path, const ScenarioOptions& options);

}  // namespace taxledger
