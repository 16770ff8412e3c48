#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssgm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitNumerical = 3;

/// Runs `ssgm <subcommand> [options]`; args excludes the program name.
/// Subcommands: kernel-eval, posdef, markov-test, sample, variation, asym.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssgm::cli
