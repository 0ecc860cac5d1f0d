#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "engine.hpp"
#include "param_io.hpp"
#include "params.hpp"
#include "sa.hpp"

namespace rangeland {

inline constexpr const char* kVersion = "1.0.0";

/// Settings of one sweep.
struct CampaignSpec {
  std::string params_path;  // empty: shipped defaults
  std::size_t n = 256;
  double fraction = 0.30;
  double horizon = 300.0;
  double dt = 0.0078125;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::filesystem::path out = "campaign";
  std::string method = "b3";  // b3 | jansen-saltelli | both

  void check() const {
    if (n < 2) throw std::invalid_argument("N must be at least 2");
    if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("fraction must lie in (0, 1)");
    if (method != "b3" && method != "jansen-saltelli" && method != "both")
      throw std::invalid_argument("method must be b3, jansen-saltelli or both");
    RunConfig{dt, horizon}.steps();
  }

  std::vector<SobolMethod> methods() const {
    if (method == "both") return {SobolMethod::B3, SobolMethod::JansenSaltelli};
    return {method_from_string(method)};
  }
};

/// Sample matrices and the space they live in.
struct CampaignPlan {
  ParamSet base;
  ParamSpace space;
  Matrix A;
  Matrix B;

  std::size_t n() const noexcept { return A.rows; }
  std::size_t k() const noexcept { return A.cols; }
  std::size_t count() const noexcept { return scenario_count(n(), k()); }

  /// Coordinates of scenario `i` in build_scenarios order, without
  /// materializing the full scenario matrix.
  std::vector<double> scenario(std::size_t i) const {
    const std::size_t block = i / n(), r = i % n();
    if (block == 0) return {A.row(r).begin(), A.row(r).end()};
    if (block == 1) return {B.row(r).begin(), B.row(r).end()};
    std::vector<double> x(A.row(r).begin(), A.row(r).end());
    x[block - 2] = B(r, block - 2);
    return x;
  }

  ParamSet params(std::size_t i) const { return apply_scenario(base, space, scenario(i)); }
};

inline CampaignPlan plan_campaign(const ParamSet& base, const CampaignSpec& spec) {
  spec.check();
  CampaignPlan p{base, build_space(base, spec.fraction), {}, {}};
  RngStream ra(hash_combine(spec.seed, 0xA)), rb(hash_combine(spec.seed, 0xB));
  p.A = lhs_sample(p.space, spec.n, ra);
  p.B = lhs_sample(p.space, spec.n, rb);
  return p;
}

/// Runs count() scenarios built on demand, in input order.
inline std::vector<RunResult> run_indexed(std::size_t count, const std::function<ParamSet(std::size_t)>& make,
                                          const RunConfig& cfg, unsigned workers,
                                          const std::function<void(std::size_t)>& progress = {}) {
  std::vector<RunResult> out(count);
  std::atomic<std::size_t> next{0}, done{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      out[i] = simulate(make(i), cfg);
      const std::size_t d = ++done;
      if (progress) progress(d);
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

inline std::vector<RunResult> run_campaign(const CampaignPlan& plan, const RunConfig& cfg, unsigned workers,
                                           const std::function<void(std::size_t)>& progress = {}) {
  return run_indexed(plan.count(), [&](std::size_t i) { return plan.params(i); }, cfg, workers, progress);
}

// ---------------------------------------------------------------- persistence

inline void write_matrices_csv(std::ostream& os, const CampaignPlan& plan) {
  os << "matrix,row";
  for (const auto& id : plan.space.ids) os << ',' << id;
  os << '\n';
  for (const auto* m : {&plan.A, &plan.B}) {
    const char name = m == &plan.A ? 'A' : 'B';
    for (std::size_t r = 0; r < m->rows; ++r) {
      os << name << ',' << r;
      for (std::size_t c = 0; c < m->cols; ++c) os << ',' << format_double((*m)(r, c));
      os << '\n';
    }
  }
}

inline nlohmann::ordered_json manifest_json(const CampaignSpec& spec, const CampaignPlan& plan,
                                            std::size_t failed) {
  nlohmann::ordered_json j;
  j["tool"] = "rangeland";
  j["version"] = kVersion;
  j["params_file"] = spec.params_path;
  j["n"] = spec.n;
  j["k"] = plan.k();
  j["scenario_count"] = plan.count();
  j["fraction"] = spec.fraction;
  j["horizon"] = spec.horizon;
  j["dt"] = spec.dt;
  j["seed"] = spec.seed;
  j["method"] = spec.method;
  j["failed_runs"] = failed;
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < plan.k(); ++i) {
    const auto& d = plan.base.defs()[plan.space.indices[i]];
    params.push_back({{"id", d.id},
                      {"label", d.label},
                      {"sector", std::string(to_string(d.sector))},
                      {"group", std::string(to_string(d.group))},
                      {"value", plan.base[plan.space.indices[i]]},
                      {"lo", plan.space.lo[i]},
                      {"hi", plan.space.hi[i]}});
  }
  j["parameters"] = std::move(params);
  return j;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes manifest.json, matrices.csv and targets.csv.
inline void save_sweep(const std::filesystem::path& dir, const CampaignSpec& spec, const CampaignPlan& plan,
                       const std::vector<RunResult>& results) {
  std::filesystem::create_directories(dir);
  write_text(dir / "manifest.json", manifest_json(spec, plan, failed_indices(results).size()).dump(2) + "\n");
  std::ostringstream m, t;
  write_matrices_csv(m, plan);
  write_targets_csv(t, results);
  write_text(dir / "matrices.csv", m.str());
  write_text(dir / "targets.csv", t.str());
}

namespace campaign_detail {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

inline double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("malformed number '" + s + "'");
  return v;
}

} // namespace campaign_detail

/// A sweep as read back from disk.
struct SweepData {
  nlohmann::json manifest;
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<Sector> sectors;
  Matrix A;
  Matrix B;
  std::vector<std::vector<double>> targets;  // per target, N(k+2) values
  std::vector<char> valid;                   // per run
};

inline SweepData load_sweep(const std::filesystem::path& dir) {
  using namespace campaign_detail;
  SweepData s;
  s.manifest = nlohmann::json::parse(read_text(dir / "manifest.json"));
  const std::size_t n = s.manifest.at("n").get<std::size_t>();
  const std::size_t k = s.manifest.at("k").get<std::size_t>();
  for (const auto& p : s.manifest.at("parameters")) {
    s.ids.push_back(p.at("id").get<std::string>());
    s.labels.push_back(p.at("label").get<std::string>());
    s.sectors.push_back(sector_from_string(p.at("sector").get<std::string>()));
  }
  if (s.ids.size() != k) throw std::runtime_error("manifest parameter list does not match k");

  s.A = Matrix(n, k);
  s.B = Matrix(n, k);
  std::istringstream mat(read_text(dir / "matrices.csv"));
  std::string line;
  std::getline(mat, line);
  std::size_t rows = 0;
  while (std::getline(mat, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != k + 2) throw std::runtime_error("matrices.csv row has wrong width");
    Matrix& m = f[0] == "A" ? s.A : s.B;
    const auto r = static_cast<std::size_t>(std::stoull(f[1]));
    if (r >= n) throw std::runtime_error("matrices.csv row index out of range");
    for (std::size_t c = 0; c < k; ++c) m(r, c) = to_double(f[c + 2]);
    ++rows;
  }
  if (rows != 2 * n) throw std::runtime_error("matrices.csv is incomplete");

  const std::size_t count = scenario_count(n, k);
  s.targets.assign(Targets::kCount, std::vector<double>(count, 0.0));
  s.valid.assign(count, 0);
  std::istringstream tg(read_text(dir / "targets.csv"));
  std::getline(tg, line);
  std::size_t seen = 0;
  while (std::getline(tg, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != Targets::kCount + 2) throw std::runtime_error("targets.csv row has wrong width");
    const auto id = static_cast<std::size_t>(std::stoull(f[0]));
    if (id >= count) throw std::runtime_error("targets.csv scenario id out of range");
    for (std::size_t t = 0; t < Targets::kCount; ++t) s.targets[t][id] = to_double(f[t + 1]);
    s.valid[id] = f.back() == "ok";
    ++seen;
  }
  if (seen != count) throw std::runtime_error("targets.csv is incomplete");
  return s;
}

// ---------------------------------------------------------------- ranking

struct TargetRanking {
  std::string target;
  SobolResult result;
  std::vector<std::size_t> order;  // parameters by descending STi
};

struct Ranking {
  SobolMethod method = SobolMethod::B3;
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<Sector> sectors;
  std::vector<TargetRanking> targets;

  /// Summed STi of one sector for target t.
  double sector_sti(std::size_t t, Sector s) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (sectors[i] == s) sum += targets[t].result.indices.sti[i];
    return sum;
  }

  std::size_t index_of(const std::string& id) const {
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw std::out_of_range("parameter '" + id + "' not varied");
    return static_cast<std::size_t>(it - ids.begin());
  }
};

inline Ranking rank_sweep(const SweepData& s, SobolMethod method, std::uint64_t seed) {
  Ranking r;
  r.method = method;
  r.ids = s.ids;
  r.labels = s.labels;
  r.sectors = s.sectors;
  for (std::size_t t = 0; t < Targets::kCount; ++t) {
    TargetRanking tr;
    tr.target = Targets::names[t];
    tr.result = analyze(s.A, s.B, s.targets[t], s.valid, method, hash_combine(seed, t));
    if (!tr.result.indices.degenerate) {
      tr.order.resize(s.ids.size());
      std::iota(tr.order.begin(), tr.order.end(), std::size_t{0});
      const auto& sti = tr.result.indices.sti;
      std::stable_sort(tr.order.begin(), tr.order.end(), [&](std::size_t a, std::size_t b) { return sti[a] > sti[b]; });
    }
    r.targets.push_back(std::move(tr));
  }
  return r;
}

inline const char* sign_symbol(double rho) { return rho > 0.0 ? "+" : rho < 0.0 ? "-" : "0"; }

inline void write_sobol_csv(std::ostream& os, const Ranking& r) {
  os << "target,parameter,si,sti,se_sti,sign,rank\n";
  for (const auto& t : r.targets) {
    if (t.result.indices.degenerate) continue;
    for (std::size_t pos = 0; pos < t.order.size(); ++pos) {
      const std::size_t i = t.order[pos];
      os << t.target << ',' << r.ids[i] << ',' << format_double(t.result.indices.si[i]) << ','
         << format_double(t.result.indices.sti[i]) << ',' << format_double(t.result.errors.se_sti[i]) << ','
         << sign_symbol(t.result.sign[i]) << ',' << pos + 1 << '\n';
    }
  }
}

inline nlohmann::ordered_json ranking_json(const Ranking& r) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(r.method));
  j["parameters"] = r.ids;
  for (const auto& t : r.targets) {
    const auto& res = t.result;
    nlohmann::ordered_json tj;
    tj["degenerate"] = res.indices.degenerate;
    tj["mean"] = res.indices.mean;
    tj["variance"] = res.indices.variance;
    tj["excluded_scenarios"] = res.excluded;
    tj["si"] = res.indices.si;
    tj["sti"] = res.indices.sti;
    tj["se_si"] = res.errors.se_si;
    tj["se_sti"] = res.errors.se_sti;
    tj["spearman"] = res.sign;
    tj["convergence"] = {{"sizes", res.convergence.sizes},
                         {"sti", res.convergence.sti},
                         {"max_delta", res.convergence.max_delta},
                         {"tolerance", res.convergence.tolerance}};
    j["targets"][t.target] = std::move(tj);
  }
  return j;
}

inline std::string fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string report_markdown(const Ranking& r, const nlohmann::json& manifest) {
  std::ostringstream os;
  os << "# Sensitivity ranking\n\n";
  os << "Method: " << to_string(r.method) << ". N = " << manifest.value("n", 0) << ", k = " << r.ids.size()
     << ", runs = " << manifest.value("scenario_count", 0) << ", failed runs = " << manifest.value("failed_runs", 0)
     << ", seed = " << manifest.value("seed", 0) << ".\n\n";
  os << "Estimates carry Monte Carlo error; SE is the bootstrap standard error (200 replicates). "
        "Sign is the Spearman correlation sign of the target against the parameter over the basic scenarios.\n";
  for (std::size_t t = 0; t < r.targets.size(); ++t) {
    const auto& tr = r.targets[t];
    const auto& res = tr.result;
    os << "\n## " << tr.target << "\n\n";
    if (res.indices.degenerate) {
      os << "Degenerate variance: the target did not vary, no ranking.\n";
      continue;
    }
    os << "Mean " << format_double(res.indices.mean) << ", variance " << format_double(res.indices.variance)
       << ", excluded basic scenarios " << res.excluded << ".\n\n";
    os << "| Rank | Parameter | Label | Sector | STi | SE(STi) | Si | Sign |\n";
    os << "|---:|---|---|---|---:|---:|---:|:---:|\n";
    for (std::size_t pos = 0; pos < std::min<std::size_t>(20, tr.order.size()); ++pos) {
      const std::size_t i = tr.order[pos];
      os << "| " << pos + 1 << " | " << r.ids[i] << " | " << r.labels[i] << " | " << to_string(r.sectors[i])
         << " | " << fixed(res.indices.sti[i]) << " | " << fixed(res.errors.se_sti[i]) << " | "
         << fixed(res.indices.si[i]) << " | " << sign_symbol(res.sign[i]) << " |\n";
    }
    std::size_t unstable = 0;
    for (bool u : res.convergence.unstable) unstable += u;
    os << "\nSummed STi: economic " << fixed(r.sector_sti(t, Sector::Economic)) << ", biophysical "
       << fixed(r.sector_sti(t, Sector::Biophysical)) << ". Parameters whose STi changed by more than "
       << res.convergence.tolerance << " over the last doubling: " << unstable << ".\n";
  }
  const auto soil = 0u;
  if (!r.targets[soil].result.indices.degenerate) {
    const auto& sti = r.targets[soil].result.indices.sti;
    const std::size_t sd = r.index_of("rain_depth_sd"), wop = r.index_of("wop_level");
    os << "\n## Headline comparison\n\n";
    os << "| Quantity | This run | Reference |\n|---|---:|---:|\n";
    os << "| STi(soil_depth_end <- rain_depth_sd) | " << fixed(sti[sd]) << " | 0.260 |\n";
    os << "| STi(soil_depth_end <- wop_level) | " << fixed(sti[wop]) << " | 0.0003 |\n";
    os << "| Ratio | " << (sti[wop] > 0.0 ? fixed(sti[sd] / sti[wop], 1) : std::string("inf")) << " | "
       << fixed(0.260 / 0.0003, 1) << " |\n";
  }
  return os.str();
}

/// Reads a sweep directory and writes sobol.csv, sobol.json and report.md
/// (one file set per method; the first method takes the plain names).
inline std::vector<Ranking> rank_directory(const std::filesystem::path& dir, const std::vector<SobolMethod>& methods,
                                           std::uint64_t seed) {
  const auto data = load_sweep(dir);
  std::vector<Ranking> out;
  nlohmann::ordered_json bundle;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    auto r = rank_sweep(data, methods[m], seed);
    const std::string suffix = m == 0 ? "" : "-" + std::string(to_string(methods[m]));
    std::ostringstream csv;
    write_sobol_csv(csv, r);
    write_text(dir / ("sobol" + suffix + ".csv"), csv.str());
    write_text(dir / ("report" + suffix + ".md"), report_markdown(r, data.manifest));
    bundle[std::string(to_string(methods[m]))] = ranking_json(r);
    out.push_back(std::move(r));
  }
  write_text(dir / "sobol.json", bundle.dump(2) + "\n");
  return out;
}

} // namespace rangeland
