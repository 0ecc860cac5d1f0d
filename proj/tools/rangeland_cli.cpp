#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rangeland.hpp"

namespace fs = std::filesystem;
using namespace rangeland;

namespace {

constexpr int kExitParams = 2;
constexpr int kExitRun = 3;

// Shipped defaults when no path is given.
ParamSet load_or_default(const std::string& path) {
  if (path.empty()) return ParamSet::defaults();
  if (!fs::exists(path)) throw ParseError("parameter file not found: " + path);
  return load_params(path);
}

int cmd_run(const std::string& params, double horizon, double dt, std::uint64_t seed, bool trace,
            const std::string& out) {
  const ParamSet ps = load_or_default(params);
  RunConfig cfg{dt, horizon, seed, trace};
  const auto res = simulate(ps, cfg);
  nlohmann::ordered_json j;
  j["status"] = res.ok() ? "ok" : "failed";
  j["steps"] = res.steps;
  j["seed"] = seed;
  for (std::size_t t = 0; t < Targets::kCount; ++t) {
    j["targets"][Targets::names[t]] = res.targets[t];
    std::printf("%-16s %.10g\n", Targets::names[t], res.targets[t]);
  }
  if (!res.ok()) j["diagnostics"] = res.diagnostics;
  if (!out.empty()) {
    fs::create_directories(out);
    write_text(fs::path(out) / "targets.json", j.dump(2) + "\n");
    if (trace) {
      std::ostringstream d, e, s;
      write_driver_trace(d, res.traces);
      write_env_trace(e, res.traces);
      write_socio_trace(s, res.traces, SocioModel(ps));
      write_text(fs::path(out) / "trace_drivers.csv", d.str());
      write_text(fs::path(out) / "trace_env.csv", e.str());
      write_text(fs::path(out) / "trace_socio.csv", s.str());
    }
  }
  if (!res.ok()) {
    std::cerr << "run failed: " << res.diagnostics << '\n';
    return kExitRun;
  }
  return 0;
}

int cmd_sweep(const CampaignSpec& spec, bool dry_run) {
  const ParamSet ps = load_or_default(spec.params_path);
  const auto plan = plan_campaign(ps, spec);
  std::printf("N = %zu, k = %zu, scheduled runs = %zu\n", plan.n(), plan.k(), plan.count());
  if (dry_run) return 0;
  const RunConfig cfg{spec.dt, spec.horizon, spec.seed, false};
  const std::size_t total = plan.count();
  std::size_t next_report = 0;
  std::mutex io;
  const auto results = run_campaign(plan, cfg, spec.workers, [&](std::size_t done) {
    std::lock_guard lock(io);
    if (done >= next_report || done == total) {
      std::fprintf(stderr, "\r%zu / %zu runs", done, total);
      next_report = done + std::max<std::size_t>(1, total / 100);
    }
  });
  std::fprintf(stderr, "\n");
  save_sweep(spec.out, spec, plan, results);
  const auto failed = failed_indices(results);
  std::printf("executed runs = %zu, failed runs = %zu\n", results.size(), failed.size());
  for (std::size_t i = 0; i < std::min<std::size_t>(failed.size(), 20); ++i)
    std::printf("  scenario %zu: %s\n", failed[i], results[failed[i]].diagnostics.c_str());
  return 0;
}

int cmd_rank(const std::string& dir, const std::string& method) {
  CampaignSpec spec;
  spec.method = method;
  const auto manifest = nlohmann::json::parse(read_text(fs::path(dir) / "manifest.json"));
  const auto rankings = rank_directory(dir, spec.methods(), manifest.at("seed").get<std::uint64_t>());
  for (const auto& r : rankings) {
    std::printf("method %s\n", std::string(to_string(r.method)).c_str());
    for (std::size_t t = 0; t < r.targets.size(); ++t) {
      const auto& tr = r.targets[t];
      if (tr.result.indices.degenerate) {
        std::printf("  %-16s degenerate variance\n", tr.target.c_str());
        continue;
      }
      std::printf("  %-16s top: %s (STi %.3f); economic %.3f, biophysical %.3f\n", tr.target.c_str(),
                  r.ids[tr.order[0]].c_str(), tr.result.indices.sti[tr.order[0]],
                  r.sector_sti(t, Sector::Economic), r.sector_sti(t, Sector::Biophysical));
    }
  }
  return 0;
}

int cmd_validate(const std::string& params) {
  const ParamSet ps = load_or_default(params);
  std::size_t varied = 0, initial = 0;
  for (const auto& d : ps.defs()) {
    varied += d.vary_in_sa;
    initial += d.group == Group::InitialStock;
  }
  const auto space = build_space(ps);
  std::printf("ok: %zu parameters, %zu initial stocks, %zu varied (space dimension %zu)\n", ps.size(), initial,
              varied, space.dim());
  return 0;
}

int cmd_export(const std::string& out, bool canonical) {
  const auto ps = ParamSet::defaults();
  if (out.empty() || out == "-")
    std::cout << (canonical ? to_canonical_json(ps).dump(2) + "\n" : sections_text(ps));
  else
    save_params(ps, out, canonical);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rangeland system-dynamics model and variance-based sensitivity analysis"};
  app.require_subcommand(1);

  std::string params;
  double horizon = 300.0, dt = 0.0078125;
  std::uint64_t seed = 1;
  std::string out;
  bool trace = false;
  auto* run = app.add_subcommand("run", "run one simulation and print the five targets");
  run->add_option("--params", params, "parameter file (JSON); shipped defaults if omitted");
  run->add_option("--horizon", horizon, "simulated years")->capture_default_str();
  run->add_option("--dt", dt, "time step in years")->capture_default_str();
  run->add_option("--seed", seed, "base seed")->capture_default_str();
  run->add_option("--out", out, "directory for targets.json and traces");
  run->add_flag("--trace", trace, "write per-step trace CSVs to --out");

  CampaignSpec spec;
  bool dry_run = false;
  auto* sweep = app.add_subcommand("sweep", "run all N(k+2) scenarios of a Sobol campaign");
  sweep->add_option("--params", spec.params_path, "parameter file (JSON)");
  sweep->add_option("--n", spec.n, "basic scenarios per matrix")->capture_default_str();
  sweep->add_option("--fraction", spec.fraction, "relative half-width of parameter ranges")->capture_default_str();
  sweep->add_option("--horizon", spec.horizon, "simulated years")->capture_default_str();
  sweep->add_option("--dt", spec.dt, "time step in years")->capture_default_str();
  sweep->add_option("--seed", spec.seed, "base seed")->capture_default_str();
  sweep->add_option("--workers", spec.workers, "worker threads")->capture_default_str();
  sweep->add_option("--out", spec.out, "output directory")->capture_default_str();
  sweep->add_option("--method", spec.method, "b3, jansen-saltelli or both (recorded for rank)")->capture_default_str();
  sweep->add_flag("--dry-run", dry_run, "plan the campaign and report the run count only");

  std::string rank_dir = "campaign", rank_method = "b3";
  auto* rank = app.add_subcommand("rank", "estimate indices from a finished sweep and write the report");
  rank->add_option("--out", rank_dir, "sweep directory")->capture_default_str();
  rank->add_option("--method", rank_method, "b3, jansen-saltelli or both")->capture_default_str();

  std::string validate_params;
  auto* validate = app.add_subcommand("validate", "load and validate a parameter file");
  validate->add_option("--params", validate_params, "parameter file (JSON)");

  std::string export_out;
  bool canonical = false;
  auto* exp = app.add_subcommand("export-defaults", "write the shipped parameter set");
  exp->add_option("--out", export_out, "file to write; stdout if omitted");
  exp->add_flag("--canonical", canonical, "full definition records instead of the sectioned form");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(params, horizon, dt, seed, trace, out);
    if (*sweep) return cmd_sweep(spec, dry_run);
    if (*rank) return cmd_rank(rank_dir, rank_method);
    if (*validate) return cmd_validate(validate_params);
    if (*exp) return cmd_export(export_out, canonical);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParams;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParams;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
