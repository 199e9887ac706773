#pragma once

#include "thermohom/problem.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace thermohom {

class ConfigError : public Error {
public:
  using Error::Error;
};

// Everything a run needs. The model part is shared by every subcommand; the
// remaining fields select sample points, eps values and outputs.
struct RunConfig {
  ModelSetup model;
  std::string transformation_table;  // path, family = tabulated
  std::string source_table;          // path, optional time table of sources
  std::array<double, 2> lambda{1.0, 1.0};  // isotropic stiffness per phase
  std::array<double, 2> mu{1.0, 1.0};
  std::vector<double> eps_list{0.5, 0.25, 0.125};
  std::vector<double> check_eps{0.5, 0.25};  // operator checks
  std::vector<double> t_samples;       // operator checks; empty: {0, T/2, T}
  int probes = 100;
  std::vector<double> effective_times;  // empty: {0, T/2, T}
  std::vector<Vec> effective_points;    // empty: cell centre
  double cell_t = 0.0;
  Vec cell_x;  // empty: cell centre
  std::string output_dir = "out";
  bool vtk = false;
  int workers = 1;

  void validate() const;
  std::vector<double> resolved_t_samples() const;
  std::vector<double> resolved_effective_times() const;
  std::vector<Vec> resolved_effective_points() const;
  Vec resolved_cell_x() const;
  // Canonical key = value listing of every setting except the worker count and
  // the output directory; hashed into the run manifest.
  std::string echo() const;
};

// Grammar: '#' starts a comment; '[section]' lines open a section;
// 'key = value' lines set a key of the current section. Lists are separated
// by whitespace or commas; points in a point list by ';'.
// base_dir resolves relative table paths.
RunConfig parse_config(std::istream& in, const std::string& source_name = "<config>",
                       const std::string& base_dir = "");
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace thermohom
