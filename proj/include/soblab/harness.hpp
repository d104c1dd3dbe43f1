// Experiment orchestration: size ladders, seeded ensembles, report assembly
// and emission. A report's numeric payload is a pure function of its config;
// wall-clock and environment live under "meta" only.
#pragma once

#include "soblab/functionals.hpp"
#include "soblab/geometry.hpp"
#include "soblab/io.hpp"
#include "soblab/paraproducts.hpp"
#include "soblab/pde.hpp"

#include <chrono>
#include <functional>
#include <map>

namespace soblab {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct ExperimentConfig {
  std::string experiment;
  std::vector<std::string> ladder;  // manifold descriptors, one per rung
  std::string form = "combinatorial";
  int trials = 20;
  std::uint64_t seed = 1;
  std::string out_path;
  std::map<std::string, double> numeric;
  std::map<std::string, std::string> text;

  double num(const std::string& key, double fallback) const {
    const auto it = numeric.find(key);
    return it == numeric.end() ? fallback : it->second;
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    const auto it = text.find(key);
    return it == text.end() ? fallback : it->second;
  }

  void validate() const {
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (ladder.empty()) throw std::invalid_argument("config: ladder must be non-empty");
  }
};

// key = value file with [experiment] sections; '#' and ';' start comments.
inline std::map<std::string, std::map<std::string, std::string>> parse_config_file(
    const std::string& content) {
  std::map<std::string, std::map<std::string, std::string>> out;
  std::istringstream is(content);
  std::string line, section;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    if (const auto h = line.find_first_of("#;"); h != std::string::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value, got '" + line + "'");
    out[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// "16,32,64" with a family name -> cycle(16), cycle(32), ...
inline std::vector<std::string> ladder_from_sizes(const std::string& sizes,
                                                  const std::string& family) {
  std::vector<std::string> out;
  for (const std::string& s : split_list(sizes)) out.push_back(family + "(" + s + ")");
  return out;
}

namespace detail {

struct Rung {
  Manifold manifold;
  SpectralOperator op;
};

inline Rung build_rung(const ExperimentConfig& cfg, const std::string& spec) {
  Rung r;
  r.manifold = build_manifold(spec, cfg.seed);
  const OperatorForm form = operator_form_from_string(cfg.form);
  if (form == OperatorForm::divergence) {
    // seeded coefficients in [lambda, Lambda] unless a file was given upstream
    const double lo = cfg.num("coeff_lo", 0.5), hi = cfg.num("coeff_hi", 2.0);
    SplitMix64 rng(derive_seed(cfg.seed, 0xd1f));
    std::vector<double> a(r.manifold.edges.size());
    for (double& v : a) v = lo + (hi - lo) * rng.next_double();
    r.op = assemble_operator(r.manifold, form, a, lo, hi);
  } else {
    r.op = assemble_operator(r.manifold, form);
  }
  return r;
}

inline json aggregate_stats(const std::vector<double>& values) {
  json j;
  if (values.empty()) {
    j["count"] = 0;
    return j;
  }
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  j["count"] = static_cast<int>(sorted.size());
  j["min"] = sorted.front();
  j["max"] = sorted.back();
  j["median"] = sorted[sorted.size() / 2];
  return j;
}

using RungFn = std::function<void(const ExperimentConfig&, const Rung&, int n, json& rung_record,
                                  std::vector<double>& ratios, json& per_trial)>;

inline void run_equivalence(const ExperimentConfig& cfg, const Rung& r, int n, json& rung,
                            std::vector<double>& ratios, json& per_trial) {
  const auto rep = equivalence_report(r.op, cfg.num("alpha", 0.5), cfg.num("p", 2.0),
                                      cfg.trials, cfg.seed);
  rung["min_ratio"] = rep.min_ratio;
  rung["max_ratio"] = rep.max_ratio;
  rung["interval_constant"] = rep.interval_constant();
  for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
    per_trial.push_back({{"n", n}, {"trial", static_cast<int>(i)}, {"ratio", rep.ratios[i]}});
    ratios.push_back(rep.ratios[i]);
  }
}

inline void run_embed(const ExperimentConfig& cfg, const Rung& r, int n, json& rung,
                      std::vector<double>& ratios, json& per_trial) {
  const auto rep = embedding_report(r.op, r.manifold, cfg.num("s", 1.0), cfg.num("p", 2.0),
                                    cfg.num("q", 4.0), cfg.trials, cfg.seed);
  rung["max_ratio"] = rep.max_resolvent_ratio;
  rung["max_direct_ratio"] = rep.max_direct_ratio;
  rung["hypothesis_violated"] = rep.hypothesis_violated;
  rung["homogeneous_dimension"] = rep.homogeneous_dimension;
  for (std::size_t i = 0; i < rep.resolvent_ratios.size(); ++i) {
    per_trial.push_back(
        {{"n", n}, {"trial", static_cast<int>(i)}, {"ratio", rep.resolvent_ratios[i]}});
    ratios.push_back(rep.resolvent_ratios[i]);
  }
}

inline void run_log_embed(const ExperimentConfig& cfg, const Rung& r, int n, json& rung,
                          std::vector<double>& ratios, json& per_trial) {
  const bool semigroup = cfg.str("flavor", "bmo") == "bmol";
  const auto rep = log_embedding_report(r.op, r.manifold, cfg.num("s", 1.0), cfg.num("p", 2.0),
                                        cfg.trials, cfg.seed, semigroup, cfg.num("bmo_p", 2.0));
  rung["max_ratio"] = rep.max_ratio;
  rung["total_measure"] = rep.total_measure;
  for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
    per_trial.push_back({{"n", n}, {"trial", static_cast<int>(i)}, {"ratio", rep.ratios[i]}});
    ratios.push_back(rep.ratios[i]);
  }
}

inline void run_leibniz(const ExperimentConfig& cfg, const Rung& r, int n, json& rung,
                        std::vector<double>& ratios, json& per_trial) {
  LeibnizParams params;
  params.alpha = cfg.num("alpha", 0.5);
  params.r = cfg.num("r", 2.0);
  params.p1 = cfg.num("p1", 2.0);
  params.q1 = cfg.num("q1", kInf);
  params.p2 = cfg.num("p2", kInf);
  params.q2 = cfg.num("q2", 2.0);
  params.trials = cfg.trials;
  params.seed = cfg.seed;
  const auto rep = leibniz_report(r.op, r.manifold, params);
  rung["max_ratio"] = rep.max_ratio;
  rung["excluded"] = rep.excluded;
  for (std::size_t i = 0; i < rep.trials.size(); ++i) {
    const auto& t = rep.trials[i];
    per_trial.push_back({{"n", n},
                         {"trial", static_cast<int>(i)},
                         {"ratio", t.ratio},
                         {"dominant_term", t.dominant_term}});
    ratios.push_back(t.ratio);
  }
}

inline void run_characterize(const ExperimentConfig& cfg, const Rung& r, int n, json& rung,
                             std::vector<double>& ratios, json& per_trial) {
  const auto rep = characterization_report(r.op, r.manifold, cfg.num("alpha", 0.5),
                                           cfg.num("p", 2.0), cfg.num("rho", 1.0), cfg.trials,
                                           cfg.seed, cfg.num("global", 1.0) != 0.0);
  rung["min_ratio"] = rep.min_ratio;
  rung["max_ratio"] = rep.max_ratio;
  rung["hypothesis_violated"] = rep.hypothesis_violated;
  rung["excluded"] = rep.excluded;
  for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
    per_trial.push_back({{"n", n}, {"trial", static_cast<int>(i)}, {"ratio", rep.ratios[i]}});
    ratios.push_back(rep.ratios[i]);
  }
}

inline void run_nonlin(const ExperimentConfig& cfg, const Rung& r, int n, json& rung,
                       std::vector<double>& ratios, json& per_trial) {
  const auto F = make_nonlinearity(cfg.str("F", "tanh"));
  const auto rep = nonlinearity_report(r.op, r.manifold, F, cfg.num("alpha", 0.5),
                                       cfg.num("p", 2.0), cfg.trials, cfg.seed,
                                       cfg.num("rho", 1.0));
  rung["max_ratio"] = rep.max_norm_ratio;
  rung["pointwise_max_violation"] = rep.pointwise_max_violation;
  rung["pointwise_holds"] = rep.pointwise_holds;
  for (std::size_t i = 0; i < rep.norm_ratios.size(); ++i) {
    per_trial.push_back({{"n", n}, {"trial", static_cast<int>(i)}, {"ratio", rep.norm_ratios[i]}});
    ratios.push_back(rep.norm_ratios[i]);
  }
}

inline void run_pde(const ExperimentConfig& cfg, const Rung& r, int n, json& rung,
                    std::vector<double>& ratios, json& per_trial) {
  EvolutionProblem problem;
  problem.kind = evolution_kind_from_string(cfg.str("kind", "heat"));
  problem.nonlinearity = make_nonlinearity(cfg.str("F", "square"));
  problem.alpha = cfg.num("alpha", 0.5);
  problem.interval = cfg.num("interval", 0.1);
  problem.time_nodes = static_cast<int>(cfg.num("time_nodes", 17));
  problem.tau_nodes = static_cast<int>(cfg.num("tau_nodes", 32));
  problem.picard_iterations = static_cast<int>(cfg.num("picard_max", 40));
  RealField u0 = ensemble_field(r.op, cfg.seed, 0);
  const double target = cfg.num("u0_sup", 0.1);
  const double sup = u0.cwiseAbs().maxCoeff();
  if (sup > 0.0) u0 *= target / sup;
  problem.u0 = u0.cast<std::complex<double>>();
  const auto res = duhamel_evolve(problem, r.op);
  double contraction = 0.0;
  for (std::size_t k = 0; k + 1 < res.picard_distances.size(); ++k)
    if (res.picard_distances[k] > 0.0 && res.picard_distances[k + 1] > 1e-13)
      contraction = std::max(contraction, res.picard_distances[k + 1] / res.picard_distances[k]);
  rung["max_ratio"] = contraction;
  rung["converged"] = res.converged;
  rung["iterations"] = res.iterations;
  rung["residual"] = res.fixed_point_residual;
  json trace = json::array();
  for (double d : res.picard_distances) trace.push_back(d);
  rung["picard_distances"] = trace;
  const std::vector<double> t_grid{0.1, 1.0, 10.0};
  const auto cons = conservation_check(r.op, problem.u0, problem.alpha, t_grid);
  rung["conservation_error"] = cons.max_unitary_error;
  rung["heat_monotone"] = cons.heat_monotone;
  for (std::size_t k = 0; k + 1 < res.picard_distances.size(); ++k) {
    if (res.picard_distances[k] > 0.0) {
      const double q = res.picard_distances[k + 1] / res.picard_distances[k];
      per_trial.push_back({{"n", n}, {"trial", static_cast<int>(k)}, {"ratio", q}});
      ratios.push_back(q);
    }
  }
}

inline void run_geom(const ExperimentConfig& cfg, const Rung& r, int n, json& rung,
                     std::vector<double>& ratios, json& per_trial) {
  const auto rep = geometry_report(r.manifold, cfg.num("d", 1.0), cfg.num("q", 2.0),
                                   cfg.num("local", 0.0) != 0.0,
                                   static_cast<int>(cfg.num("fields", 16)), cfg.seed);
  rung["max_ratio"] = rep.doubling_constant;
  rung["homogeneous_dimension"] = rep.homogeneous_dimension;
  rung["mv_constant"] = rep.mv_constant;
  rung["poincare_constant"] = rep.poincare_constant;
  per_trial.push_back({{"n", n}, {"trial", 0}, {"ratio", rep.doubling_constant}});
  ratios.push_back(rep.doubling_constant);
}

inline void run_offdiag(const ExperimentConfig& cfg, const Rung& r, int n, json& rung,
                        std::vector<double>& ratios, json& per_trial) {
  std::vector<double> t_grid;
  const int count = static_cast<int>(cfg.num("t_count", 3));
  const double t_lo = cfg.num("t_lo", 0.25), t_hi = cfg.num("t_hi", 4.0);
  for (int i = 0; i < count; ++i)
    t_grid.push_back(count == 1 ? t_lo
                                : t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (count - 1)));
  std::vector<RealField> fields;
  for (int i = 0; i < cfg.trials; ++i) fields.push_back(ensemble_field(r.op, cfg.seed, i));
  const auto rep = offdiag_probe(r.op, r.manifold, t_grid, cfg.num("s_minus", 1.0), fields);
  rung["max_ratio"] = rep.constants.front();
  rung["delta_fitted"] = rep.delta_fitted;
  rung["conservation_error"] = rep.conservation_error;
  rung["conservation_ok"] = rep.conservation_ok;
  json curve = json::array();
  for (std::size_t i = 0; i < rep.delta_grid.size(); ++i)
    curve.push_back({{"delta", rep.delta_grid[i]}, {"constant", rep.constants[i]}});
  rung["decay_curve"] = curve;
  per_trial.push_back({{"n", n}, {"trial", 0}, {"ratio", rep.constants.front()}});
  ratios.push_back(rep.constants.front());
}

inline const std::map<std::string, RungFn>& experiment_table() {
  static const std::map<std::string, RungFn> table = {
      {"equivalence", run_equivalence}, {"embed", run_embed},
      {"log-embed", run_log_embed},     {"leibniz", run_leibniz},
      {"characterize", run_characterize}, {"nonlin", run_nonlin},
      {"pde", run_pde},                 {"geom", run_geom},
      {"offdiag", run_offdiag}};
  return table;
}

}  // namespace detail

// Executes the named experiment across the ladder. Deterministic: the payload
// (everything outside "meta") depends only on the config.
inline json run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& table = detail::experiment_table();
  const auto it = table.find(cfg.experiment);
  if (it == table.end())
    throw std::invalid_argument("run_experiment: unknown experiment '" + cfg.experiment + "'");

  const auto t0 = std::chrono::steady_clock::now();
  json report;
  report["experiment"] = cfg.experiment;
  json params;
  params["ladder"] = cfg.ladder;
  params["form"] = cfg.form;
  params["trials"] = cfg.trials;
  params["seed"] = cfg.seed;
  for (const auto& [k, v] : cfg.numeric) params[k] = v;
  for (const auto& [k, v] : cfg.text) params[k] = v;
  report["params"] = params;

  json per_trial = json::array();
  json ladder = json::array();
  std::vector<double> ratios;
  std::vector<double> rung_seconds;
  for (const std::string& spec : cfg.ladder) {
    const auto r0 = std::chrono::steady_clock::now();
    const detail::Rung rung_data = detail::build_rung(cfg, spec);
    json rung;
    rung["n"] = rung_data.manifold.vertex_count();
    rung["spec"] = spec;
    it->second(cfg, rung_data, rung_data.manifold.vertex_count(), rung, ratios, per_trial);
    ladder.push_back(rung);
    rung_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - r0).count());
  }
  report["per_trial"] = per_trial;
  double max_ratio = 0.0;
  for (double v : ratios) max_ratio = std::max(max_ratio, v);
  report["max_ratio"] = max_ratio;
  report["aggregate"] = detail::aggregate_stats(ratios);
  report["ladder"] = ladder;

  json meta;
  meta["version"] = kToolkitVersion;
  json wall = json::array();
  for (double s : rung_seconds) wall.push_back(s);
  meta["wall_clock_s"] = wall;
  meta["total_wall_clock_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json hashes;
  for (const std::string& spec : cfg.ladder) hashes[spec] = fnv1a64(spec);
  meta["input_hashes"] = hashes;
  report["meta"] = meta;
  return report;
}

// The deterministic part of a report (drops "meta").
inline json report_payload(const json& report) {
  json p = report;
  p.erase("meta");
  return p;
}

// CSV flattening of the ladder table; column order follows the first rung.
inline std::string ladder_csv(const json& report) {
  std::ostringstream os;
  const auto& ladder = report.at("ladder");
  if (ladder.empty()) return "";
  std::vector<std::string> cols;
  for (auto it = ladder.front().begin(); it != ladder.front().end(); ++it)
    if (!it.value().is_structured()) cols.push_back(it.key());
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& rung : ladder) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) os << ",";
      const auto& v = rung.at(cols[i]);
      if (v.is_number_float())
        os << format_double(v.get<double>());
      else if (v.is_boolean())
        os << (v.get<bool>() ? 1 : 0);
      else if (v.is_string())
        os << v.get<std::string>();
      else
        os << v.dump();
    }
    os << "\n";
  }
  return os.str();
}

// Writes <base>.json and <base>.csv.
inline void emit_report(const json& report, const std::string& base_path) {
  write_text_file(base_path + ".json", dump_json(report));
  write_text_file(base_path + ".csv", ladder_csv(report));
}

}  // namespace soblab
