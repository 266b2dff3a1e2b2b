#pragma once

#include <string>
#include <vector>

namespace bergamot {

struct RunResult {
  int exit_code = 0;            // 0 ok, 2 hypothesis/psh failure, 1 anything else
  std::string out;              // stdout payload; summary line last
  std::string error;            // diagnostic when exit_code came from a thrown error
  std::vector<std::string> files;  // paths written, manifest last
};

// Executes one pipeline command from a request of the form
//   {"command": "...", "config": "<path or empty>", "overrides": { partial config }}
// with precedence flags (overrides) > config file > built-in defaults. The effective
// config, input hash, artifact hashes, versions, and wall time land in manifest.json;
// every other artifact is deterministic byte-for-byte for a fixed config.
RunResult run_request(const std::string& request_json);

struct HypothesisReport;
std::string hypothesis_report_json(const HypothesisReport& rep);

}  // namespace bergamot
