#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace thermohom {

// 17 significant digits, "C" formatting.
std::string format_double(double v);

class CsvWriter {
public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  // Leading text columns followed by numbers.
  void row(const std::vector<std::string>& labels, const std::vector<double>& values);

private:
  std::ostream& out_;
  std::size_t columns_;
};

std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

// Written next to every artifact: config hash, version and tolerances.
struct Manifest {
  std::string subcommand;
  std::string config_text;  // canonical echo of the parsed configuration
  std::vector<std::string> artifacts;
  std::map<std::string, std::string> entries;
};

void write_manifest(const std::string& path, const Manifest& m);

const char* library_version();

}  // namespace thermohom
