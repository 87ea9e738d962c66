#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "genfpk/model.hpp"

namespace genfpk {

/// Scenario file:
///   {"label": str, "etas": [[k, eta_k], ...], "kappa": num, "t0": num, "t_end": num,
///    "noise": {"type": "ou", "D": num, "tau": num, "convention": "plain"|"scaled", "mean": num}
///           | {"type": "white", "D": num, "mean": num},
///    "init": {"mean": num, "variance": num},
///    "cross_cov": {"type": "zero"} | {"type": "exp", "params": {"amplitude": num, "tau": num}}}
/// "label", "t0", "noise.mean", "noise.convention" and "cross_cov" are optional.
/// Unknown fields are rejected.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);
/// Canonical JSON of a scenario; custom kernels and mean functions cannot be serialized.
std::string scenario_to_json(const Scenario& scenario);

/// Rows "t,x_1..x_G,f_1..f_G".
struct SnapshotTable {
  std::vector<double> t;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> f;
};

std::string snapshot_header(std::size_t points);
void write_snapshots_csv(const std::string& path, const SnapshotTable& table);
SnapshotTable read_snapshots_csv(const std::string& path);

/// Columns named by `header`, one row per entry of `rows`.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct RunManifest {
  std::string command;
  std::string scenario_json;  ///< canonical scenario JSON, empty when not applicable
  std::string method;
  std::map<std::string, double> discretization;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
  std::vector<std::string> files;
  std::map<std::string, double> timings;

  bool operator==(const RunManifest&) const = default;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& json_text);
void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

std::string read_text(const std::string& path);

}  // namespace genfpk
