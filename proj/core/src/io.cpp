#include "genfpk/io.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "genfpk/errors.hpp"
#include "json.hpp"

namespace genfpk {
namespace {

using nlohmann::json;

void allow_only(const json& obj, const std::set<std::string>& keys, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!keys.contains(key)) throw ParseError(where + ": unknown field '" + key + "'");
}

double number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  if (!obj.at(key).is_number()) throw ParseError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

NoiseSpec parse_noise(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ParseError("noise: missing string field 'type'");
  const std::string type = j.at("type");
  NoiseSpec noise;
  if (type == "ou") {
    allow_only(j, {"type", "D", "tau", "convention", "mean"}, "noise");
    OuKernel k{number(j, "D", "noise"), number(j, "tau", "noise"), OuConvention::plain};
    if (j.contains("convention")) {
      const auto& c = j.at("convention");
      if (c == "plain") k.convention = OuConvention::plain;
      else if (c == "scaled") k.convention = OuConvention::scaled;
      else throw ParseError("noise.convention: expected \"plain\" or \"scaled\"");
    }
    noise.kernel = k;
  } else if (type == "white") {
    allow_only(j, {"type", "D", "mean"}, "noise");
    WhiteNoiseKernel k;
    k.constant = number(j, "D", "noise");
    noise.kernel = k;
  } else {
    throw ParseError("noise.type: expected \"ou\" or \"white\", got \"" + type + "\"");
  }
  noise.mean_value = number_or(j, "mean", 0.0, "noise");
  return noise;
}

CrossCovariance parse_cross(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ParseError("cross_cov: missing string field 'type'");
  const std::string type = j.at("type");
  CrossCovariance c;
  if (type == "zero") {
    allow_only(j, {"type"}, "cross_cov");
    return c;
  }
  if (type != "exp") throw ParseError("cross_cov.type: expected \"zero\" or \"exp\"");
  allow_only(j, {"type", "params"}, "cross_cov");
  if (!j.contains("params")) throw ParseError("cross_cov: missing field 'params'");
  const json& p = j.at("params");
  allow_only(p, {"amplitude", "tau"}, "cross_cov.params");
  c.kind = CrossCovariance::Kind::exp;
  c.amplitude = number(p, "amplitude", "cross_cov.params");
  c.tau = number(p, "tau", "cross_cov.params");
  if (!(c.tau > 0.0)) throw ParameterError("cross_cov.params.tau must be positive");
  return c;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: invalid JSON: ") + e.what());
  }
  allow_only(j, {"label", "etas", "kappa", "t0", "t_end", "noise", "init", "cross_cov"}, "scenario");
  if (!j.contains("etas") || !j.at("etas").is_array()) throw ParseError("scenario: 'etas' must be an array");
  std::vector<Monomial> terms;
  for (const auto& e : j.at("etas")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number())
      throw ParseError("scenario.etas: entries must be [integer degree, coefficient]");
    terms.push_back({e[0].get<int>(), e[1].get<double>()});
  }
  ModelSpec model(std::move(terms), number(j, "kappa", "scenario"), number_or(j, "t0", 0.0, "scenario"),
                  number(j, "t_end", "scenario"));
  if (!j.contains("noise")) throw ParseError("scenario: missing field 'noise'");
  NoiseSpec noise = parse_noise(j.at("noise"));
  if (j.contains("cross_cov")) noise.cross_cov = parse_cross(j.at("cross_cov"));
  if (!j.contains("init")) throw ParseError("scenario: missing field 'init'");
  allow_only(j.at("init"), {"mean", "variance"}, "init");
  InitialSpec init(number(j.at("init"), "mean", "init"), number(j.at("init"), "variance", "init"));
  std::string label;
  if (j.contains("label")) {
    if (!j.at("label").is_string()) throw ParseError("scenario.label: expected a string");
    label = j.at("label");
  }
  return Scenario(std::move(model), std::move(noise), init, label);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_text(path)); }

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["label"] = sc.label;
  j["etas"] = json::array();
  for (const auto& t : sc.model.terms()) j["etas"].push_back({t.degree, t.coeff});
  j["kappa"] = sc.model.kappa();
  j["t0"] = sc.model.t0();
  j["t_end"] = sc.model.t_end();
  if (sc.noise.mean_fn) throw UsageError("scenario_to_json: mean functions cannot be serialized");
  json noise;
  if (const auto* ou = sc.noise.ou()) {
    noise = {{"type", "ou"}, {"D", ou->D}, {"tau", ou->tau},
             {"convention", ou->convention == OuConvention::scaled ? "scaled" : "plain"}};
  } else if (const auto* w = std::get_if<WhiteNoiseKernel>(&sc.noise.kernel); w && !w->intensity) {
    noise = {{"type", "white"}, {"D", w->constant}};
  } else {
    throw UsageError("scenario_to_json: kernel cannot be serialized");
  }
  noise["mean"] = sc.noise.mean_value;
  j["noise"] = noise;
  j["init"] = {{"mean", sc.init.mean}, {"variance", sc.init.variance}};
  switch (sc.noise.cross_cov.kind) {
    case CrossCovariance::Kind::zero: j["cross_cov"] = {{"type", "zero"}}; break;
    case CrossCovariance::Kind::exp:
      j["cross_cov"] = {{"type", "exp"},
                        {"params", {{"amplitude", sc.noise.cross_cov.amplitude}, {"tau", sc.noise.cross_cov.tau}}}};
      break;
    case CrossCovariance::Kind::custom: throw UsageError("scenario_to_json: custom cross-covariance");
  }
  return j.dump(2);
}

std::string snapshot_header(std::size_t points) {
  std::string h = "t";
  for (std::size_t i = 1; i <= points; ++i) h += ",x_" + std::to_string(i);
  for (std::size_t i = 1; i <= points; ++i) h += ",f_" + std::to_string(i);
  return h;
}

void write_snapshots_csv(const std::string& path, const SnapshotTable& table) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path);
  const std::size_t G = table.x.empty() ? 0 : table.x.front().size();
  out << snapshot_header(G) << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < table.t.size(); ++r) {
    if (table.x[r].size() != G || table.f[r].size() != G)
      throw UsageError("write_snapshots_csv: ragged rows");
    out << table.t[r];
    for (double v : table.x[r]) out << ',' << v;
    for (double v : table.f[r]) out << ',' << v;
    out << '\n';
  }
}

SnapshotTable read_snapshots_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  std::size_t cols = 1;
  for (char c : line) cols += c == ',';
  if ((cols - 1) % 2 != 0 || line.rfind("t", 0) != 0) throw ParseError(path + ": not a snapshot table");
  const std::size_t G = (cols - 1) / 2;
  if (line != snapshot_header(G)) throw ParseError(path + ": unexpected header");
  SnapshotTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != cols) throw ParseError(path + ": row has " + std::to_string(row.size()) + " columns");
    table.t.push_back(row[0]);
    table.x.emplace_back(row.begin() + 1, row.begin() + 1 + G);
    table.f.emplace_back(row.begin() + 1 + G, row.end());
  }
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n' << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

std::string manifest_to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["scenario"] = m.scenario_json.empty() ? json(nullptr) : json::parse(m.scenario_json);
  j["method"] = m.method;
  j["discretization"] = m.discretization;
  j["seeds"] = m.seeds;
  j["diagnostics"] = m.diagnostics;
  j["warnings"] = m.warnings;
  j["files"] = m.files;
  j["timings"] = m.timings;
  return j.dump(2);
}

RunManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest: invalid JSON: ") + e.what());
  }
  allow_only(j, {"command", "scenario", "method", "discretization", "seeds", "diagnostics", "warnings", "files",
                 "timings"},
             "manifest");
  RunManifest m;
  try {
    m.command = j.value("command", "");
    if (j.contains("scenario") && !j.at("scenario").is_null()) m.scenario_json = j.at("scenario").dump(2);
    m.method = j.value("method", "");
    m.discretization = j.value("discretization", std::map<std::string, double>{});
    m.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    m.diagnostics = j.value("diagnostics", std::map<std::string, double>{});
    m.warnings = j.value("warnings", std::vector<std::string>{});
    m.files = j.value("files", std::vector<std::string>{});
    m.timings = j.value("timings", std::map<std::string, double>{});
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path);
  out << manifest_to_json(manifest) << '\n';
}

RunManifest read_manifest(const std::string& path) { return manifest_from_json(read_text(path)); }

}  // namespace genfpk
