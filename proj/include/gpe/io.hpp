#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpe/bubbles.hpp"
#include "gpe/geometry.hpp"
#include "gpe/scalar.hpp"
#include "gpe/solvers.hpp"

namespace gpe {

using json = nlohmann::ordered_json;

inline json to_json(const ProblemParams& pp) {
  json j;
  j["N"] = pp.N;
  j["p"] = pp.p;
  j["q"] = pp.q;
  j["alpha"] = pp.alpha;
  j["beta"] = pp.beta;
  j["mu1"] = pp.mu1;
  j["mu2"] = pp.mu2;
  j["nu"] = pp.nu;
  j["a"] = pp.a;
  j["b"] = pp.b;
  j["regime"] = regime_name(pp.regime());
  return j;
}

inline json to_json(const GeometryReport& rep) {
  json j;
  j["regime"] = regime_name(rep.regime);
  j["D1"] = rep.D1;
  j["D2"] = rep.D2;
  if (rep.D3) j["D3"] = *rep.D3;
  if (rep.T_ab) j["T_ab"] = *rep.T_ab;
  if (rep.T_tilde_ab) j["T_tilde_ab"] = *rep.T_tilde_ab;
  if (rep.alpha1) j["alpha1"] = *rep.alpha1;
  if (rep.c0) {
    j["c0"] = *rep.c0;
    j["c0_provenance"] = rep.c0_provenance;
  }
  j["feasible"] = rep.feasible;
  json pts = json::array();
  for (const auto& p : rep.h_crit_points)
    pts.push_back({{"t", p.t}, {"h", p.h}, {"curvature", p.curvature}});
  j["h_crit_points"] = pts;
  if (rep.R0) j["R0"] = *rep.R0;
  if (rep.R1) j["R1"] = *rep.R1;
  if (rep.R) j["R"] = *rep.R;
  if (rep.k0) j["k0"] = *rep.k0;
  if (rep.tbar) j["tbar"] = *rep.tbar;
  if (rep.sbar) j["sbar"] = *rep.sbar;
  if (rep.R1_bound) j["R1_bound"] = *rep.R1_bound;
  return j;
}

/// Solution records serialize without wall-clock data so identical runs
/// produce identical bytes.
inline json to_json(const SolutionRecord& rec) {
  json j;
  j["kind"] = rec.kind == SolutionKind::local_min ? "local_min" : "mountain_pass";
  j["energy"] = rec.energy;
  j["lambda1"] = rec.lambda1;
  j["lambda2"] = rec.lambda2;
  j["mass_u"] = rec.mass_u;
  j["mass_v"] = rec.mass_v;
  j["grad_norm_sq"] = rec.grad_norm_sq;
  j["pohozaev_residual"] = rec.pohozaev_residual;
  j["classification"] = fiber_class_name(rec.classification);
  j["residual_sup"] = rec.residual_sup;
  j["iterations"] = rec.iterations;
  return j;
}

inline json to_json(const ConstantsTable& tab) {
  json j;
  j["grid_M"] = tab.grid_M();
  j["grid_L"] = tab.grid_L();
  json entries = json::array();
  for (const auto& e : tab.entries()) {
    json je;
    je["N"] = e.N;
    je["s"] = e.s;
    je["M"] = e.M;
    je["L"] = e.L;
    je["value"] = e.value;
    je["cross_check"] = e.cross_check;
    je["provenance"] = e.provenance;
    entries.push_back(je);
  }
  j["entries"] = entries;
  return j;
}

inline ConstantsTable constants_from_json(const json& j) {
  ConstantsTable tab(j.at("grid_M").get<int>(), j.at("grid_L").get<double>());
  for (const auto& je : j.at("entries")) {
    ConstantEntry e;
    e.N = je.at("N").get<int>();
    e.s = je.at("s").get<double>();
    e.M = je.at("M").get<int>();
    e.L = je.at("L").get<double>();
    e.value = je.at("value").get<double>();
    e.cross_check = je.at("cross_check").get<double>();
    e.provenance = "cached";
    tab.entries().push_back(e);
  }
  return tab;
}

// ---------------------------------------------------------------------------
// CSV writers: '.' decimal, ',' separator, LF newlines, 17 significant digits
// ---------------------------------------------------------------------------
inline std::string profile_csv(const FieldPair& pair) {
  std::ostringstream os;
  os << "r,u,v\n";
  const auto& g = *pair.u.grid;
  for (int i = 0; i < g.M; ++i)
    os << format_g17(g.r[i]) << ',' << format_g17(pair.u.v[i]) << ','
       << format_g17(pair.v.v[i]) << '\n';
  return os.str();
}

inline std::string profile_csv(const RadialField& f) {
  std::ostringstream os;
  os << "r,u\n";
  for (int i = 0; i < f.size(); ++i)
    os << format_g17(f.grid->r[i]) << ',' << format_g17(f.v[i]) << '\n';
  return os.str();
}

inline std::string curves_csv(const BubbleCurveSet& curves) {
  std::ostringstream os;
  os << "n,t,H\n";
  for (const auto& c : curves.curves)
    for (std::size_t k = 0; k < c.t.size(); ++k)
      os << c.n << ',' << format_g17(c.t[k]) << ',' << format_g17(c.H[k])
         << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Run outputs: files are collected with content hashes into a manifest
// (the manifest is the only place wall-clock data lives).
// ---------------------------------------------------------------------------
class OutputWriter {
 public:
  explicit OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream os(dir_ / name, std::ios::binary);
    os << content;
    files_.emplace_back(name, sha1_hex(content));
  }
  void write(const std::string& name, const json& j) {
    write(name, j.dump(2) + "\n");
  }

  void write_manifest(const std::string& config_hash,
                      const std::string& scenario, const std::string& status,
                      double seconds, const json& config = json::object()) {
    json m;
    m["artifact_version"] = "0.1.0";
    m["scenario"] = scenario;
    m["config"] = config;
    m["config_hash"] = config_hash;
    m["status"] = status;
    m["wall_time_seconds"] = seconds;
    json files = json::array();
    for (const auto& [name, hash] : files_)
      files.push_back({{"file", name}, {"sha1", hash}});
    m["files"] = files;
    std::ofstream os(dir_ / "manifest.json", std::ios::binary);
    os << m.dump(2) << "\n";
  }

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<std::pair<std::string, std::string>>& files() const {
    return files_;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

// ---------------------------------------------------------------------------
// Run configuration: flat JSON, no defaults for physical parameters.
// ---------------------------------------------------------------------------
struct RunConfig {
  std::string scenario;
  std::optional<ProblemParams> params;  // system scenarios
  // scalar scenario fields
  double eta = 0.0, mu = 0.0, mass = 0.0;
  int N_scalar = 0;
  // grid
  double L = 40.0;
  int M = 4096;
  // tolerances
  double residual_tol = 1e-7;
  bool pin_masses = false;
  std::optional<double> c0_override;
  // sweep
  std::string sweep_axis;
  std::vector<double> sweep_values;
  std::string sweep_scenario;
  std::uint64_t seed = 1;
  std::string raw;  // canonical serialized form for hashing

  static double require(const json& j, const std::string& key) {
    if (!j.contains(key))
      throw ConfigError("config: missing required parameter '" + key + "'");
    return j.at(key).get<double>();
  }

  static RunConfig from_json(const json& j) {
    RunConfig c;
    if (!j.contains("scenario"))
      throw ConfigError("config: missing 'scenario'");
    c.scenario = j.at("scenario").get<std::string>();
    c.raw = j.dump();

    if (j.contains("L")) c.L = j.at("L").get<double>();
    if (j.contains("M")) c.M = j.at("M").get<int>();
    if (j.contains("residual_tol"))
      c.residual_tol = j.at("residual_tol").get<double>();
    if (c.residual_tol <= 0.0)
      throw ConfigError("config: tolerances must be positive");
    if (j.contains("pin_masses")) c.pin_masses = j.at("pin_masses").get<bool>();
    if (j.contains("c0")) c.c0_override = j.at("c0").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();

    if (c.scenario == "soliton") {
      c.N_scalar = static_cast<int>(require(j, "N"));
      c.eta = require(j, "eta");
      c.mu = require(j, "mu");
      c.mass = require(j, "mass");
      return c;
    }
    if (c.scenario == "verify-all") return c;

    ProblemParams pp;
    pp.N = static_cast<int>(require(j, "N"));
    pp.p = require(j, "p");
    pp.q = require(j, "q");
    pp.alpha = require(j, "alpha");
    pp.beta = require(j, "beta");
    pp.mu1 = require(j, "mu1");
    pp.mu2 = require(j, "mu2");
    pp.nu = require(j, "nu");
    pp.a = require(j, "a");
    pp.b = require(j, "b");
    pp.validate();
    c.params = pp;

    if (c.scenario == "sweep") {
      if (!j.contains("sweep_axis") || !j.contains("sweep_values") ||
          !j.contains("sweep_scenario"))
        throw ConfigError(
            "config: sweep needs 'sweep_axis', 'sweep_values', "
            "'sweep_scenario'");
      c.sweep_axis = j.at("sweep_axis").get<std::string>();
      c.sweep_values = j.at("sweep_values").get<std::vector<double>>();
      c.sweep_scenario = j.at("sweep_scenario").get<std::string>();
      if (c.sweep_values.empty())
        throw ConfigError("config: sweep_values must be nonempty");
      for (std::size_t i = 1; i < c.sweep_values.size(); ++i)
        if (c.sweep_values[i] <= c.sweep_values[i - 1])
          throw ConfigError("config: sweep_values must be sorted increasing");
      static const std::vector<std::string> axes{"a", "b", "nu", "p", "q"};
      bool ok = false;
      for (const auto& ax : axes) ok = ok || ax == c.sweep_axis;
      if (!ok) throw ConfigError("config: sweep_axis must be a, b, nu, p or q");
    }
    return c;
  }

  std::string content_hash() const { return sha1_hex(raw); }
};

}  // namespace gpe
