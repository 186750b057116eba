#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace pinning::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitTruncation = 4;

/// Effective option values of one command, keyed by flag name without "--".
using Params = std::map<std::string, std::string>;

struct CommandOutput {
  std::string text;
  /// Extra fields merged into the run manifest (fit parameters and the like).
  nlohmann::ordered_json manifest_extra = nlohmann::ordered_json::object();
  int exit_code = kExitOk;
  std::string message;
};

CommandOutput cmd_curves(const Params& p);
CommandOutput cmd_free_energy(const Params& p);
CommandOutput cmd_phase_bracket(const Params& p);
CommandOutput cmd_tilt_audit(const Params& p);
CommandOutput cmd_dominance(const Params& p);
CommandOutput cmd_path(const Params& p);

/// Default option values of a subcommand; throws std::invalid_argument for
/// an unknown command.
Params default_params(const std::string& command);

/// Full command line front end. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pinning::cli
