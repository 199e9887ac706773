#include "thermohom/output.hpp"
#include "thermohom/tensor.hpp"

#include <Eigen/Core>

#include <cstdio>
#include <fstream>
#include <ostream>

namespace thermohom {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) { row({}, values); }

void CsvWriter::row(const std::vector<std::string>& labels, const std::vector<double>& values) {
  if (labels.size() + values.size() != columns_)
    throw Error("CSV row has " + std::to_string(labels.size() + values.size()) + " columns, header has " +
                std::to_string(columns_));
  bool first = true;
  for (const auto& l : labels) {
    out_ << (first ? "" : ",") << l;
    first = false;
  }
  for (double v : values) {
    out_ << (first ? "" : ",") << format_double(v);
    first = false;
  }
  out_ << '\n';
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const char* library_version() { return "1.0.0"; }

void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path);
  out << "subcommand = " << m.subcommand << '\n';
  out << "version = " << library_version() << '\n';
  out << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
  out << "config_hash = " << hex64(fnv1a64(m.config_text)) << '\n';
  for (const auto& [k, v] : m.entries) out << k << " = " << v << '\n';
  for (const auto& a : m.artifacts) out << "artifact = " << a << '\n';
  out << "\n# configuration\n" << m.config_text;
}

}  // namespace thermohom
