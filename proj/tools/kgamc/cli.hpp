#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "kgamc/error.hpp"

namespace kgamc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitRuntime = 3,
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// "start:stop:step" (inclusive), a single value, or a comma list of either.
// Throws UsageError on malformed input.
std::vector<int> parse_snr_range(std::string_view text);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kgamc::cli
