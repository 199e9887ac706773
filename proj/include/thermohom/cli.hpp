#pragma once

#include "thermohom/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace thermohom {

const std::vector<std::string>& subcommands();

struct DispatchResult {
  int status = 0;  // 0 ok, 2 a reported check failed
  std::vector<std::string> artifacts;  // file names inside the output directory
};

// Runs one subcommand and writes its artifacts plus `<subcommand>_manifest.txt`
// into out_dir. Progress lines go to log.
DispatchResult dispatch(const std::string& subcommand, const RunConfig& config, const std::string& out_dir,
                        std::ostream& log);

}  // namespace thermohom
