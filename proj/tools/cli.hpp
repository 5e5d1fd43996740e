#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pathphase::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kDomain = 3,
  kParse = 4,
};

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

/// Runs one invocation.  `args` excludes the program name.  `seed_env` is
/// the raw value of PATHPHASE_SEED, if set.
int run(const std::vector<std::string>& args, Streams streams,
        const std::optional<std::string>& seed_env = std::nullopt);

}  // namespace pathphase::cli
