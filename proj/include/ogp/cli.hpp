#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace ogp::cli {

// Fully resolved invocation: subcommand name plus the flat parameter object
// that a run manifest records under "config". Feeding that object back via
// --config reproduces the run.
struct ExperimentConfig {
  std::string command;
  nlohmann::json params;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
};

// Entry point for the ogp tool; args excludes the program name.
// Returns 0 on success, 2 on usage or validation errors, 3 when a request
// exceeds a resource cap.
int run_cli(std::vector<std::string> args);

}  // namespace ogp::cli
