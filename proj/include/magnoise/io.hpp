#pragma once

#include <cstdint>
#include <string>

#include "magnoise/dephasing.hpp"
#include "magnoise/physics.hpp"
#include "magnoise/spectra.hpp"
#include "magnoise/stochastic.hpp"

namespace magnoise {

// Noise block of a run configuration.  `type` selects which amplitude
// fields are meaningful: "white" uses A [T m^-1 s^1/2], "flicker" uses K
// (units carry s^(1-alpha) for alpha != 1) and alpha, "custom" reads an
// (omega [rad/s], S) table from table_path.
struct NoiseConfig {
  std::string type = "white";
  double A = 2.9e-6;
  double K = 0.7e-13;
  double alpha = 1.0;
  std::string table_path;
};

// Simulation block: grid geometry, base seed, and ensemble size.
struct SimulationConfig {
  Eigen::Index samples_per_loop = 8192;
  Eigen::Index loops = 2;
  std::uint64_t seed = 1;
  int realizations = 500;
};

// Full run configuration.  The experiment block requires the particle mass
// explicitly; every other field has the bundled-example default.
struct RunConfig {
  ExperimentParams experiment;
  NoiseConfig noise;
  IntegrationConfig integration;
  SimulationConfig simulation;
  std::string out_dir = ".";
};

// Parses a JSON configuration.  Unknown keys anywhere are rejected with
// their path; a missing experiment mass reports "m: required"; all block
// invariants are checked before returning.
RunConfig parse_config(const std::string& json_text);

// parse_config on the contents of `path`.
RunConfig load_config(const std::string& path);

// Canonical serialization of the fully-resolved configuration.  Parsing the
// output and serializing again yields identical bytes, so emitted configs
// reproduce runs exactly.
std::string effective_config_json(const RunConfig& cfg);

// Builds the noise spectrum selected by the config (reads the custom table
// from disk when type == "custom").
NoiseSpectrum make_spectrum(const RunConfig& cfg);

// CSV rendering of one realization and its arm deviations, one row per grid
// time: t, deta, dx_R, dx_L, dp_R, dp_L.
std::string trace_csv(const NoiseRealization& real,
                      const TrajectoryDeviation& dev);

// Writes `contents` to `path`, throwing std::runtime_error on failure.
void write_file(const std::string& path, const std::string& contents);

// Reads an entire file, throwing std::runtime_error when unreadable.
std::string read_file(const std::string& path);

}  // namespace magnoise
