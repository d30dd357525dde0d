#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scorelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  // bound violations or failed checks
inline constexpr int kExitConfig = 2;  // bad config; partial outputs removed

/// Commands: verify-bounds, counterexample, manifold, sample, converge.
std::vector<std::string> commands();

/// Runs one command from a JSON config text with flat `key value` overrides
/// (dotted keys address nested objects). Log lines go to `log`.
int run(const std::string& command, const std::string& config_text,
        const std::vector<std::pair<std::string, std::string>>& overrides, std::ostream& log);

/// Entry point for the score-lab executable.
int main(int argc, char** argv);

}  // namespace scorelab::cli
