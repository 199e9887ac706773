#include "thermohom/cli.hpp"
#include "thermohom/parallel.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Two-scale thermoelastic homogenization in evolving cell geometries"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir;
  int workers = 0;
  for (const auto& name : thermohom::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("-w,--workers", workers, "worker threads (overrides [output] workers)")->check(CLI::NonNegativeNumber);
    sub->add_option("-o,--out", out_dir, "output directory (overrides [output] directory)");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    thermohom::RunConfig cfg = thermohom::parse_config_file(config_path);
    if (workers > 0) cfg.workers = workers;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    thermohom::set_worker_count(cfg.workers);
    const auto res = thermohom::dispatch(sub, cfg, cfg.output_dir, std::cout);
    for (const auto& a : res.artifacts) std::cout << "wrote " << cfg.output_dir << '/' << a << '\n';
    return res.status;
  } catch (const std::exception& e) {
    std::cerr << "thermohom " << sub << ": " << e.what() << '\n';
    return 1;
  }
}
