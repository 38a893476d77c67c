// Command-line driver: scenario orchestration, result persistence and
// plot-ready data export for the normalized-solution solver.
//
//   gpe-norm <scenario> --config <file> [--out <dir>] [--seed <u64>]
//
// Scenarios: soliton, thresholds, fiber, minimize, mountain-pass,
// bubble-check, sweep, verify-all.
// Exit codes: 0 success, 1 solver failure, 2 config/validation error,
// 3 structural failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>

#include <CLI11.hpp>

#include "gpe/acceptance.hpp"
#include "gpe/io.hpp"

using namespace gpe;

namespace {

json scalar_state_json(const ScalarGroundState& st) {
  json j;
  j["eta"] = st.eta;
  j["mu"] = st.mu;
  j["mass"] = st.a;
  j["lambda"] = st.lambda;
  j["energy"] = st.energy;
  j["residual"] = st.residual;
  j["pohozaev_residual"] = st.pohozaev_residual;
  j["tail_fraction"] = st.tail_fraction;
  j["canonical_mass"] = st.canonical_mass;
  return j;
}

void print_geometry_table(const GeometryReport& rep) {
  std::printf("geometry (%s regime)\n", regime_name(rep.regime));
  std::printf("  %-12s %s\n", "feasible", rep.feasible ? "yes" : "no");
  auto row = [](const char* k, double v) {
    std::printf("  %-12s %.10g\n", k, v);
  };
  row("D1", rep.D1);
  row("D2", rep.D2);
  if (rep.D3) row("D3", *rep.D3);
  if (rep.T_ab) row("T_ab", *rep.T_ab);
  if (rep.T_tilde_ab) row("T_tilde_ab", *rep.T_tilde_ab);
  if (rep.alpha1) row("alpha1", *rep.alpha1);
  if (rep.c0) row("c0", *rep.c0);
  if (rep.R0) row("R0", *rep.R0);
  if (rep.R1) row("R1", *rep.R1);
  if (rep.R) row("R", *rep.R);
  if (rep.k0) row("k0", *rep.k0);
  if (rep.tbar) row("tbar", *rep.tbar);
  if (rep.sbar) row("sbar", *rep.sbar);
  for (const auto& p : rep.h_crit_points)
    std::printf("  h' zero      t=%.10g h=%.10g (%s)\n", p.t, p.h,
                p.curvature > 0 ? "min" : "max");
}

struct ScenarioOutputs {
  json scalars;  // tidy scalar summary for sweep aggregation
};

ScenarioOutputs run_one(const RunConfig& cfg, OutputWriter& out);

ScenarioOutputs run_minimize(const RunConfig& cfg, OutputWriter& out,
                             bool with_mp) {
  const ProblemParams& pp = *cfg.params;
  ConstantsTable tab(4097, 20.0);
  auto rep = analyze_geometry(pp, tab, cfg.c0_override);
  out.write("geometry.json", to_json(rep));
  if (!rep.feasible)
    throw ConfigError("geometry gate not satisfied for these masses");
  auto grid = make_grid(pp.N, cfg.L, cfg.M);
  LocalMinimizeOptions lo;
  lo.residual_tol = cfg.residual_tol;
  lo.pin_masses = cfg.pin_masses;
  auto rec = local_minimize(pp, rep, grid, lo);
  out.write("solution_local.json", to_json(rec));
  out.write("profile_local.csv", profile_csv(rec.pair));

  ScenarioOutputs so;
  so.scalars["feasible"] = rep.feasible;
  if (rep.R0) so.scalars["R0"] = *rep.R0;
  if (rep.R1) so.scalars["R1"] = *rep.R1;
  if (rep.k0) so.scalars["k0"] = *rep.k0;
  so.scalars["energy_local"] = rec.energy;
  so.scalars["lambda1"] = rec.lambda1;
  so.scalars["lambda2"] = rec.lambda2;

  if (with_mp) {
    auto [mp, path] = mountain_pass(pp, rep, rec, grid);
    out.write("solution_mp.json", to_json(mp));
    out.write("profile_mp.csv", profile_csv(mp.pair));
    std::ostringstream os;
    os << "node,energy\n";
    for (std::size_t k = 0; k < path.energies.size(); ++k)
      os << k << ',' << format_g17(path.energies[k]) << '\n';
    out.write("path_energies.csv", os.str());
    so.scalars["energy_mp"] = mp.energy;
    so.scalars["lambda1_mp"] = mp.lambda1;
    so.scalars["lambda2_mp"] = mp.lambda2;
  }
  return so;
}

ScenarioOutputs run_one(const RunConfig& cfg, OutputWriter& out) {
  ScenarioOutputs so;
  if (cfg.scenario == "soliton") {
    auto grid = make_grid(cfg.N_scalar, cfg.L, cfg.M);
    auto st = scalar_ground_state(cfg.eta, cfg.mu, cfg.mass, grid);
    out.write("soliton.json", scalar_state_json(st));
    out.write("profile_soliton.csv", profile_csv(st.profile));
    so.scalars["lambda"] = st.lambda;
    so.scalars["energy"] = st.energy;
    return so;
  }
  if (cfg.scenario == "thresholds") {
    ConstantsTable tab(4097, 20.0);
    auto rep = analyze_geometry(*cfg.params, tab, cfg.c0_override);
    out.write("geometry.json", to_json(rep));
    out.write("constants.json", to_json(tab));
    print_geometry_table(rep);
    so.scalars["feasible"] = rep.feasible;
    if (rep.R0) so.scalars["R0"] = *rep.R0;
    if (rep.R1) so.scalars["R1"] = *rep.R1;
    if (rep.k0) so.scalars["k0"] = *rep.k0;
    if (rep.T_ab) so.scalars["T_ab"] = *rep.T_ab;
    if (rep.T_tilde_ab) so.scalars["T_tilde_ab"] = *rep.T_tilde_ab;
    return so;
  }
  if (cfg.scenario == "fiber") {
    const ProblemParams& pp = *cfg.params;
    auto grid = make_grid(pp.N, cfg.L, cfg.M);
    Rng rng(cfg.seed);
    FieldPair pair{scaled_to_mass(random_bump_field(grid, rng), pp.a),
                   scaled_to_mass(random_bump_field(grid, rng), pp.b)};
    auto n = pair_norms(pair, pp);
    auto fa = classify(n, pp);
    json j;
    j["classification"] = fiber_class_name(fa.classification);
    if (fa.s_crit) {
      j["s_crit"] = *fa.s_crit;
      j["phi_at_s"] = fa.phi_at_s;
      j["d2_at_s"] = fa.d2_at_s;
    }
    if (fa.t_crit) {
      j["t_crit"] = *fa.t_crit;
      j["phi_at_t"] = fa.phi_at_t;
      j["d2_at_t"] = fa.d2_at_t;
    }
    j["dphi_at_one"] = fa.dphi_at_one;
    out.write("fiber.json", j);
    std::ostringstream os;
    os << "t,phi,dphi\n";
    for (int k = 0; k <= 400; ++k) {
      const double t = 1e-2 * std::pow(1e4, k / 400.0);
      auto f = fiber(n, pp, t);
      os << format_g17(t) << ',' << format_g17(f.phi) << ','
         << format_g17(f.dphi) << '\n';
    }
    out.write("fiber_scan.csv", os.str());
    if (fa.s_crit) so.scalars["s_crit"] = *fa.s_crit;
    if (fa.t_crit) so.scalars["t_crit"] = *fa.t_crit;
    return so;
  }
  if (cfg.scenario == "minimize") return run_minimize(cfg, out, false);
  if (cfg.scenario == "mountain-pass") return run_minimize(cfg, out, true);
  if (cfg.scenario == "bubble-check") {
    const ProblemParams& pp = *cfg.params;
    if (!pp.is_critical())
      throw ConfigError("bubble-check requires the critical regime");
    ConstantsTable tab(4097, 20.0);
    const double S = tab.sobolev(pp.N);
    auto rep = analyze_geometry(pp, tab);
    out.write("geometry.json", to_json(rep));
    if (!rep.feasible) throw ConfigError("geometry gate not satisfied");
    auto grid = make_grid(pp.N, cfg.L, cfg.M);
    LocalMinimizeOptions lo;
    lo.pin_masses = true;
    auto base = local_minimize(pp, rep, grid, lo);
    out.write("solution_local.json", to_json(base));
    auto fam = build_bubbles(pp.N, {8, 16, 32, 64}, grid);
    auto fit = bubble_asymptotics(fam, S);
    const double ts = bubble_t_star(pp);
    std::vector<double> tg{0.0};
    for (int k = 1; k <= 40; ++k) tg.push_back(3.0 * ts * k / 40.0);
    auto curves = bubble_curves(base.pair, pp, fam, tg);
    auto lb = level_bound_check(curves, pp, S);
    json j;
    j["grad_rate"] = fit.grad_rate;
    j["crit_rate"] = fit.crit_rate;
    j["mass_law_spread"] = fit.mass_law_spread;
    j["t_star"] = ts;
    j["base_level"] = curves.base_level;
    j["bound_gap"] = lb.bound_gap;
    json jn = json::array();
    for (std::size_t i = 0; i < curves.curves.size(); ++i) {
      const auto& cv = curves.curves[i];
      jn.push_back({{"n", cv.n},
                    {"t_max", cv.t_max},
                    {"H_max", cv.H_max},
                    {"margin", lb.margins[i]}});
    }
    j["curves"] = jn;
    j["margin_positive_at_largest"] = lb.margin_positive_at_largest;
    out.write("bubbles.json", j);
    out.write("bubble_curves.csv", curves_csv(curves));
    so.scalars["t_star"] = ts;
    so.scalars["margin"] = lb.margins.back();
    return so;
  }
  throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

int run_sweep(const RunConfig& cfg, OutputWriter& out) {
  std::vector<std::future<std::pair<bool, json>>> futures;
  for (double value : cfg.sweep_values) {
    futures.push_back(std::async(std::launch::async, [&, value] {
      RunConfig sub = cfg;
      sub.scenario = cfg.sweep_scenario;
      ProblemParams& pp = *sub.params;
      if (cfg.sweep_axis == "a") pp.a = value;
      else if (cfg.sweep_axis == "b") pp.b = value;
      else if (cfg.sweep_axis == "nu") pp.nu = value;
      else if (cfg.sweep_axis == "p") pp.p = value;
      else if (cfg.sweep_axis == "q") pp.q = value;
      try {
        pp.validate();
        OutputWriter sub_out(out.dir() /
                             ("sweep_" + format_g17(value)));
        auto so = run_one(sub, sub_out);
        return std::make_pair(true, so.scalars);
      } catch (const std::exception& e) {
        json j;
        j["error"] = std::string(e.what());
        return std::make_pair(false, j);
      }
    }));
  }
  // tidy CSV: one row per value, stable column set from the first success
  std::vector<std::pair<bool, json>> rows;
  rows.reserve(futures.size());
  for (auto& f : futures) rows.push_back(f.get());
  std::vector<std::string> columns;
  for (const auto& [ok, j] : rows)
    if (ok) {
      for (auto it = j.begin(); it != j.end(); ++it)
        columns.push_back(it.key());
      break;
    }
  std::ostringstream os;
  os << cfg.sweep_axis << ",status";
  for (const auto& col : columns) os << ',' << col;
  os << '\n';
  bool any_ok = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << format_g17(cfg.sweep_values[i]) << ','
       << (rows[i].first ? "ok" : "failed");
    for (const auto& col : columns) {
      os << ',';
      if (rows[i].first && rows[i].second.contains(col)) {
        const auto& cell = rows[i].second.at(col);
        if (cell.is_boolean()) os << (cell.get<bool>() ? 1 : 0);
        else os << format_g17(cell.get<double>());
      }
    }
    os << '\n';
    any_ok = any_ok || rows[i].first;
  }
  out.write("sweep.csv", os.str());
  return any_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"normalized solutions of the coupled Gross-Pitaevskii system"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  static const std::vector<std::string> scenarios{
      "soliton",       "thresholds",  "fiber",  "minimize",
      "mountain-pass", "bubble-check", "sweep", "verify-all"};
  for (const auto& name : scenarios) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")
        ->required(name != "verify-all");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed_override, "seed override");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string scenario = app.get_subcommands().front()->get_name();

  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw ConfigError("cannot open config '" + config_path + "'");
      json j = json::parse(is);
      j["scenario"] = scenario;
      cfg = RunConfig::from_json(j);
    } else {
      cfg.scenario = scenario;
      cfg.raw = "{}";
    }
    if (seed_override) cfg.seed = *seed_override;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  OutputWriter out(out_dir);
  std::string status = "ok";
  int code = 0;
  try {
    if (scenario == "verify-all") {
      auto full = gpe::acceptance::run_with_determinism(cfg.seed);
      for (const auto& c : full.first.criteria)
        std::printf("[%s] criterion %2d: %s\n", c.passed ? "PASS" : "FAIL",
                    c.id, c.name.c_str());
      std::printf("[%s] criterion 10: %s\n",
                  full.determinism.passed ? "PASS" : "FAIL",
                  full.determinism.name.c_str());
      json report = gpe::acceptance::suite_report(full.first);
      report["determinism_passed"] = full.determinism.passed;
      out.write("acceptance.json", report);
      if (!full.all_passed) {
        status = "failed";
        code = 1;
      }
    } else if (scenario == "sweep") {
      code = run_sweep(cfg, out);
      if (code != 0) status = "failed";
    } else {
      run_one(cfg, out);
    }
  } catch (const StructuralError& e) {
    std::fprintf(stderr, "structural failure: %s\n", e.what());
    status = "structural failure";
    code = 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    status = "config error";
    code = 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    status = "solver failure";
    code = 1;
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  json cfg_json = cfg.raw.empty() ? json::object() : json::parse(cfg.raw);
  cfg_json["seed"] = cfg.seed;
  out.write_manifest(cfg.content_hash(), scenario, status, secs, cfg_json);
  return code;
}
