// INI-style run configuration: sections [flow], [mesh], [adapt], [train],
// [run] with "key = value" lines and '#' comments.
#pragma once

#include <map>
#include <string>

#include "goalfv/dwr.hpp"
#include "goalfv/surrogate.hpp"

namespace goalfv {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string case_name = "case";

  // [mesh]
  std::string mesh_source = "naca";  // "naca" | "file"
  std::string mesh_path;
  std::string profile = "0012";
  int n_around = 64;
  int n_radial = 16;
  double farfield_radius = 20.0;
  int initial_uniform_refine = 0;

  // [flow]
  FlowConfig flow;

  // [adapt]
  FunctionalKind functional = FunctionalKind::Drag;
  AdaptConfig adapt;

  // [train]
  TrainConfig train;
  std::vector<int> hidden_widths = {128, 128, 128, 128};

  // [run]
  int threads = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int reference_uniform_refine = 2;
  NewtonOptions newton;
  DualOptions dual;
};

RunConfig load_run_config(const std::string& path);

/// Raw section/key/value view, exposed for tests.
std::map<std::string, std::map<std::string, std::string>> parse_ini(
    const std::string& path);

}  // namespace goalfv
