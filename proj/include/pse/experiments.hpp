#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pse/effective.hpp"
#include "pse/model.hpp"
#include "pse/propagate.hpp"
#include "pse/pulses.hpp"
#include "pse/semiclassical.hpp"

namespace pse {

inline constexpr const char* kArtifactVersion = "0.1.0";

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

struct SequenceSpec {
  std::string name = "ZZ";  // ZZ, XYXY, XZXZ, E1, E2, E3, free
  double tau = 0.01;
  int uhrig_pulses = 0;  // > 0: replace the uniform timing by Uhrig timing
  bool has_error = false;
  double eta = 0.0;
  double ex = 0.0, ey = 0.0, ez = 0.0;
};

struct PointerSetSpec {
  std::string basis = "computational";  // computational | bell
  std::vector<Vector> explicit_basis;
  int p = 0;  // 0: complete basis
};

struct SweepSpec {
  std::vector<double> tau;
  std::vector<int> n_bath;
  std::vector<std::uint64_t> seeds;
  std::string abscissa = "tauA";  // tauA | tauA_sqrt_nB
  double window_fraction = 0.5;
};

struct ESRRunSpec {
  std::string sequence = "XYXY";
  double eps0 = 0.05;
  double n0 = 0.02;
  double b_z = 0.8;
  double tau = 0.15;
  long draws = 100;
  std::uint64_t seed = 0;
};

struct ScheduleSpec {
  std::string type = "log";  // log | explicit
  int count = 60;
  long n_max = 10000;
  std::vector<long> values;

  std::vector<long> materialize() const {
    if (type == "explicit") return values;
    return log_schedule(n_max, count);
  }
};

struct ExperimentConfig {
  std::string kind;  // trajectory | sweep | semiclassical | esr | analyze-cycle
  CouplingEnsembleSpec model;
  RandomFieldSpec field;
  std::string ensemble_mode = "analytic";  // analytic | exact
  SequenceSpec sequence;
  std::vector<std::pair<std::string, Vector>> states;
  ScheduleSpec schedule;
  SweepSpec sweep;
  ESRRunSpec esr;
  PointerSetSpec pointer_set;
  double t_total = 0.0;  // analyze-cycle horizon; 0 -> N_max * T_c
  std::string output_dir = "out";
  std::uint64_t config_hash = 0;
  Json raw;
};

namespace cfg_detail {

template <typename T>
T require(const Json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key))
    throw ConfigInvalid("missing field: " + path + "." + key);
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigInvalid("bad type for field: " + path + "." + key);
  }
}

template <typename T>
T get_or(const Json& j, const std::string& path, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigInvalid("bad type for field: " + path + "." + key);
  }
}

inline Vector parse_state(const Json& j, int n_qubits, const std::string& path) {
  if (j.is_string()) return named_state(j.get<std::string>(), n_qubits);
  if (!j.is_array()) throw ConfigInvalid("state must be a name or amplitude list: " + path);
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& amp = j.at(i);
    if (amp.is_number()) {
      v(i) = Complex(amp.get<double>(), 0.0);
    } else if (amp.is_array() && amp.size() == 2) {
      v(i) = Complex(amp.at(0).get<double>(), amp.at(1).get<double>());
    } else {
      throw ConfigInvalid("amplitude must be x or [re, im]: " + path);
    }
  }
  const double nrm = v.norm();
  if (nrm <= 0) throw ConfigInvalid("state has zero norm: " + path);
  return v / nrm;
}

}  // namespace cfg_detail

inline std::uint64_t hash_config(const Json& j) { return rng::fnv1a(j.dump()); }

inline ExperimentConfig parse_config(const Json& j) {
  using namespace cfg_detail;
  ExperimentConfig c;
  c.raw = j;
  c.config_hash = hash_config(j);
  c.kind = require<std::string>(j, "", "kind");
  const bool needs_model =
      c.kind == "trajectory" || c.kind == "sweep" || c.kind == "analyze-cycle";
  if (c.kind != "trajectory" && c.kind != "sweep" && c.kind != "semiclassical" &&
      c.kind != "esr" && c.kind != "analyze-cycle")
    throw ConfigInvalid("unknown kind: " + c.kind);

  if (needs_model) {
    if (!j.contains("model")) throw ConfigInvalid("missing field: model");
    const Json& m = j.at("model");
    c.model.n_qubits = get_or<int>(m, "model", "n_qubits", 1);
    c.model.n_bath = require<int>(m, "model", "n_B");
    c.model.j_cap = get_or<double>(m, "model", "J_cap", 1.0);
    c.model.beta_cap = get_or<double>(m, "model", "beta_cap", 0.0);
    c.model.k_exchange = get_or<double>(
        m, "model", "K", c.model.n_qubits == 2 ? c.model.j_cap : 0.0);
    c.model.seed = get_or<std::uint64_t>(m, "model", "seed", 0);
    validate_dims(c.model.n_qubits, c.model.n_bath);
  }

  if (c.kind == "semiclassical") {
    if (!j.contains("field")) throw ConfigInvalid("missing field: field");
    const Json& f = j.at("field");
    const auto dist = require<std::string>(f, "field", "distribution");
    if (dist == "isotropic-gaussian") {
      c.field.kind = RandomFieldSpec::Kind::IsotropicGaussian;
      c.field.b_std = require<double>(f, "field", "B");
      c.field.componentwise = get_or<bool>(f, "field", "componentwise", false);
    } else if (dist == "fixed-vector") {
      c.field.kind = RandomFieldSpec::Kind::FixedVector;
      const auto b = require<std::vector<double>>(f, "field", "b");
      if (b.size() != 3) throw ConfigInvalid("field.b must have 3 entries");
      c.field.fixed = {b[0], b[1], b[2]};
    } else {
      throw ConfigInvalid("unknown field.distribution: " + dist);
    }
    c.field.n_samples = require<long>(f, "field", "n_samples");
    c.field.seed = get_or<std::uint64_t>(f, "field", "seed", 0);
    if (c.field.n_samples < 1) throw ConfigInvalid("field.n_samples must be >= 1");
    c.ensemble_mode = get_or<std::string>(j, "", "mode", "analytic");
    if (c.ensemble_mode != "analytic" && c.ensemble_mode != "exact")
      throw ConfigInvalid("mode must be analytic or exact");
  }

  if (c.kind == "esr") {
    if (!j.contains("esr")) throw ConfigInvalid("missing field: esr");
    const Json& e = j.at("esr");
    c.esr.sequence = get_or<std::string>(e, "esr", "sequence", "XYXY");
    if (c.esr.sequence != "XYXY" && c.esr.sequence != "XZXZ")
      throw ConfigInvalid("esr.sequence must be XYXY or XZXZ");
    c.esr.eps0 = require<double>(e, "esr", "eps0");
    c.esr.n0 = require<double>(e, "esr", "n0");
    c.esr.b_z = get_or<double>(e, "esr", "b_z", 0.8);
    c.esr.tau = get_or<double>(e, "esr", "tau", 0.15);
    c.esr.draws = get_or<long>(e, "esr", "draws", 100);
    c.esr.seed = get_or<std::uint64_t>(e, "esr", "seed", 0);
    if (c.esr.eps0 < 0 || c.esr.n0 < 0 || c.esr.draws < 1 || !(c.esr.tau > 0))
      throw ConfigInvalid("esr: bad parameter values");
  }

  if (c.kind != "esr" && c.kind != "analyze-cycle" && c.kind != "semiclassical") {
    // nothing extra
  }

  if (j.contains("sequence")) {
    const Json& s = j.at("sequence");
    c.sequence.name = get_or<std::string>(s, "sequence", "name", "ZZ");
    c.sequence.tau = require<double>(s, "sequence", "tau");
    if (!(c.sequence.tau > 0)) throw ConfigInvalid("sequence.tau must be > 0");
    c.sequence.uhrig_pulses = get_or<int>(s, "sequence", "uhrig_pulses", 0);
    if (s.contains("error")) {
      const Json& er = s.at("error");
      c.sequence.has_error = true;
      c.sequence.eta = require<double>(er, "sequence.error", "eta");
      c.sequence.ex = get_or<double>(er, "sequence.error", "ex", 0.0);
      c.sequence.ey = get_or<double>(er, "sequence.error", "ey", 0.0);
      c.sequence.ez = get_or<double>(er, "sequence.error", "ez", 0.0);
    }
  } else if (c.kind == "trajectory" || c.kind == "sweep" || c.kind == "semiclassical" ||
             c.kind == "analyze-cycle") {
    throw ConfigInvalid("missing field: sequence");
  }

  if (needs_model || c.kind == "semiclassical") {
    const int nq = needs_model ? c.model.n_qubits : 1;
    if (j.contains("states")) {
      const Json& st = j.at("states");
      if (!st.is_array() || st.empty()) throw ConfigInvalid("states must be a nonempty array");
      for (std::size_t i = 0; i < st.size(); ++i) {
        const std::string label =
            st.at(i).is_string() ? st.at(i).get<std::string>()
                                 : "state" + std::to_string(i);
        c.states.emplace_back(label,
                              cfg_detail::parse_state(st.at(i), nq, "states[" +
                                                                        std::to_string(i) + "]"));
      }
    } else {
      c.states.emplace_back(nq == 1 ? "+Z" : "00", named_state(nq == 1 ? "+Z" : "00", nq));
    }
  }

  if (j.contains("schedule")) {
    const Json& s = j.at("schedule");
    c.schedule.type = get_or<std::string>(s, "schedule", "type", "log");
    if (c.schedule.type == "log") {
      c.schedule.count = get_or<int>(s, "schedule", "count", 60);
      c.schedule.n_max = require<long>(s, "schedule", "N_max");
      if (c.schedule.n_max < 0) throw ConfigInvalid("schedule.N_max must be >= 0");
    } else if (c.schedule.type == "explicit") {
      c.schedule.values = require<std::vector<long>>(s, "schedule", "values");
      for (std::size_t i = 1; i < c.schedule.values.size(); ++i)
        if (c.schedule.values[i] <= c.schedule.values[i - 1])
          throw ConfigInvalid("schedule.values must be strictly increasing");
    } else {
      throw ConfigInvalid("schedule.type must be log or explicit");
    }
  }

  if (c.kind == "sweep") {
    if (!j.contains("sweep")) throw ConfigInvalid("missing field: sweep");
    const Json& s = j.at("sweep");
    c.sweep.tau = require<std::vector<double>>(s, "sweep", "tau");
    c.sweep.n_bath = get_or<std::vector<int>>(s, "sweep", "n_B",
                                              std::vector<int>{c.model.n_bath});
    c.sweep.seeds = get_or<std::vector<std::uint64_t>>(
        s, "sweep", "seeds", std::vector<std::uint64_t>{c.model.seed});
    c.sweep.abscissa = get_or<std::string>(s, "sweep", "abscissa", "tauA");
    c.sweep.window_fraction = get_or<double>(s, "sweep", "window_fraction", 0.5);
    if (c.sweep.abscissa != "tauA" && c.sweep.abscissa != "tauA_sqrt_nB")
      throw ConfigInvalid("sweep.abscissa must be tauA or tauA_sqrt_nB");
    if (c.sweep.tau.empty()) throw ConfigInvalid("sweep.tau must be nonempty");
  }

  if (c.kind == "analyze-cycle") {
    if (j.contains("pointer_set")) {
      const Json& ps = j.at("pointer_set");
      if (ps.contains("basis") && ps.at("basis").is_array()) {
        for (const auto& row : ps.at("basis"))
          c.pointer_set.explicit_basis.push_back(
              cfg_detail::parse_state(row, c.model.n_qubits, "pointer_set.basis"));
        c.pointer_set.basis = "explicit";
      } else {
        c.pointer_set.basis = get_or<std::string>(ps, "pointer_set", "basis",
                                                  "computational");
      }
      c.pointer_set.p = get_or<int>(ps, "pointer_set", "p", 0);
    }
    c.t_total = get_or<double>(j, "", "T_total", 0.0);
  }

  c.output_dir = get_or<std::string>(j, "", "output", "out");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// sequence construction from a spec
// ---------------------------------------------------------------------------

inline PulseSequence build_sequence(const SequenceSpec& spec, int n_qubits) {
  PulseSequence seq = [&]() -> PulseSequence {
    if (spec.name == "free")
      return free_evolution_cycle(Eigen::Index(1) << n_qubits, spec.tau);
    if (spec.name == "E1" || spec.name == "E2" || spec.name == "E3") {
      if (n_qubits != 2) throw ConfigInvalid("EPR sequences need n_qubits = 2");
      return epr_cycle(spec.name, spec.tau);
    }
    if (n_qubits != 1)
      throw ConfigInvalid("sequence " + spec.name + " needs n_qubits = 1");
    if (spec.uhrig_pulses > 0) {
      if (spec.name != "ZZ")
        throw ConfigInvalid("uhrig timing is implemented for the ZZ reflection");
      return uhrig_cycle(UnitaryOperator::trusted(pauli_z()), spec.uhrig_pulses,
                         2.0 * spec.tau, "UhrigZZ", "Z");
    }
    return named_qubit_cycle(spec.name, spec.tau);
  }();
  if (spec.has_error && spec.eta != 0.0) {
    std::vector<std::string> labels;
    for (const auto& s : seq.segments())
      for (const auto& p : s.primitives) labels.push_back(p.label);
    PulseErrorModel errs = axis_angle_error(spec.eta, spec.ex, spec.ey, spec.ez, labels);
    seq = apply_pulse_errors(seq, errs);
  }
  return seq;
}

// ---------------------------------------------------------------------------
// output plumbing
// ---------------------------------------------------------------------------

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_csv(const std::filesystem::path& path, const ResultTable& table,
                      const ExperimentConfig& cfg,
                      const std::vector<std::string>& extra_comments = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(cfg.config_hash));
  out << "# pse " << kArtifactVersion << "\n";
  out << "# config-hash: " << hash << "\n";
  out << "# kind: " << cfg.kind << "\n";
  for (const auto& c : extra_comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_g17(row[i]);
    out << "\n";
  }
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// experiment execution
// ---------------------------------------------------------------------------

// Run tasks[0..n) on a bounded pool; results land in a pre-sized vector so
// the merge order never depends on scheduling.
template <typename Task>
void run_pool(std::vector<Task>& tasks, int workers) {
  if (workers <= 1 || tasks.size() <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      tasks[i]();
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(workers, int(tasks.size()));
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.emplace_back(body);
  for (auto& th : pool) th.join();
}

struct FitReport {
  double alpha = 0.0;
  double intercept = 0.0;  // c in log(loss) = alpha log(x) + c
  double r2 = 0.0;
  long n_points = 0;
};

inline FitReport fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 4)
    throw InsufficientPoints("fit_power_law: need >= 4 points");
  const std::size_t n = x.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0) || !(y[i] > 0))
      throw Error("fit_power_law: needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / double(n), my = sy / double(n);
  double num = 0, den = 0, sst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
    sst += (ly[i] - my) * (ly[i] - my);
  }
  FitReport f;
  f.alpha = num / den;
  f.intercept = my - f.alpha * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = f.alpha * lx[i] + f.intercept;
    ssr += (ly[i] - pred) * (ly[i] - pred);
  }
  f.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
  f.n_points = long(n);
  return f;
}

struct SweepPoint {
  double tau = 0.0;
  int n_bath = 0;
  double coupling_a = 0.0;
  double abscissa = 0.0;
  double saturation_loss = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // seed-averaged, sorted by (n_bath, tau)
  FitReport fit;
};

inline SweepResult run_sweep(const ExperimentConfig& cfg, int workers) {
  struct Cell {
    double tau;
    int n_bath;
    std::uint64_t seed;
    double a = 0.0;
    double loss = 0.0;
  };
  std::vector<Cell> cells;
  for (int nb : cfg.sweep.n_bath)
    for (double tau : cfg.sweep.tau)
      for (std::uint64_t seed : cfg.sweep.seeds)
        cells.push_back({tau, nb, seed});

  const auto schedule = cfg.schedule.materialize();
  const Vector state = cfg.states.front().second;
  std::vector<std::function<void()>> tasks;
  tasks.reserve(cells.size());
  for (auto& cell : cells)
    tasks.emplace_back([&cfg, &cell, &schedule, &state]() {
      CouplingEnsembleSpec ms = cfg.model;
      ms.n_bath = cell.n_bath;
      ms.seed = cell.seed;
      const SpinBathModel model = sample_couplings(ms);
      cell.a = coupling_strength_A(model, 0);
      SequenceSpec ss = cfg.sequence;
      ss.tau = cell.tau;
      const PulseSequence seq = build_sequence(ss, cfg.model.n_qubits);
      const HermitianOperator h0 = build_H0(model);
      const DensityMatrix rho0 = initial_state(state, model);
      Trajectory traj = run_sequence(seq, h0, rho0, schedule, model.dim_system(),
                                     model.dim_bath());
      const TrajectoryStats st =
          trajectory_stats(traj, cfg.sweep.window_fraction, 0.5);
      cell.loss = 1.0 - st.saturation_mean;
    });
  run_pool(tasks, workers);

  SweepResult out;
  for (int nb : cfg.sweep.n_bath)
    for (double tau : cfg.sweep.tau) {
      double loss = 0.0, a = 0.0;
      int count = 0;
      for (const auto& cell : cells)
        if (cell.n_bath == nb && cell.tau == tau) {
          loss += cell.loss;
          a += cell.a;
          ++count;
        }
      loss /= count;
      a /= count;
      SweepPoint p;
      p.tau = tau;
      p.n_bath = nb;
      p.coupling_a = a;
      p.abscissa = cfg.sweep.abscissa == "tauA" ? tau * a : tau * a * std::sqrt(double(nb));
      p.saturation_loss = loss;
      out.points.push_back(p);
    }

  std::vector<double> xs, ys;
  for (const auto& p : out.points) {
    xs.push_back(p.abscissa);
    ys.push_back(p.saturation_loss);
  }
  out.fit = fit_power_law(xs, ys);
  return out;
}

// Full experiment dispatch; returns the files written.
inline std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg,
                                                         int workers = 1) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  std::vector<fs::path> written;

  if (cfg.kind == "trajectory") {
    const SpinBathModel model = sample_couplings(cfg.model);
    const HermitianOperator h0 = build_H0(model);
    const PulseSequence seq = build_sequence(cfg.sequence, cfg.model.n_qubits);
    const auto schedule = cfg.schedule.materialize();
    const UnitaryOperator u_c = cycle_propagator(seq, h0);
    for (const auto& [label, state] : cfg.states) {
      const DensityMatrix rho0 = initial_state(state, model);
      Trajectory traj = run_stroboscopic(u_c, rho0, schedule, model.dim_system(),
                                         model.dim_bath());
      finalize_times(traj, seq.t_cycle());
      ResultTable t;
      t.columns = {"cycle_index", "time", "fidelity", "purity"};
      for (std::size_t i = 0; i < traj.cycle_indices.size(); ++i)
        t.rows.push_back({double(traj.cycle_indices[i]), traj.times[i],
                          traj.fidelity[i], traj.purity[i]});
      fs::path p = fs::path(cfg.output_dir) /
                   ("trajectory_" + label + "_seed" + std::to_string(cfg.model.seed) + ".csv");
      write_csv(p, t, cfg,
                {"sequence: " + seq.label(), "state: " + label,
                 "seed: " + std::to_string(cfg.model.seed),
                 "columns: cycle index, time [1/J], survival fidelity, purity"});
      written.push_back(p);
    }
    return written;
  }

  if (cfg.kind == "sweep") {
    const SweepResult res = run_sweep(cfg, workers);
    ResultTable t;
    t.columns = {"tau", "n_B", "A", "abscissa", "saturation_loss"};
    for (const auto& p : res.points)
      t.rows.push_back({p.tau, double(p.n_bath), p.coupling_a, p.abscissa,
                        p.saturation_loss});
    fs::path pcsv = fs::path(cfg.output_dir) / "sweep_points.csv";
    write_csv(pcsv, t, cfg,
              {"abscissa: " + cfg.sweep.abscissa,
               "columns: pulse interval, bath size, rms coupling A, abscissa, 1 - f_inf"});
    written.push_back(pcsv);
    Json fit = {{"alpha", res.fit.alpha},
                {"intercept", res.fit.intercept},
                {"prefactor", std::exp(res.fit.intercept)},
                {"r2", res.fit.r2},
                {"n_points", res.fit.n_points}};
    fs::path pfit = fs::path(cfg.output_dir) / "sweep_fit.json";
    write_json(pfit, fit);
    written.push_back(pfit);
    return written;
  }

  if (cfg.kind == "semiclassical") {
    const PulseSequence seq = build_sequence(cfg.sequence, 1);
    const auto schedule = cfg.schedule.materialize();
    const EnsembleTrajectory ens = ensemble_average(
        cfg.field, seq, schedule,
        cfg.ensemble_mode == "exact" ? EnsembleMode::Exact : EnsembleMode::Analytic);
    ResultTable t;
    t.columns = {"cycle_index", "time", "mean_loss", "stderr"};
    for (std::size_t i = 0; i < ens.cycle_indices.size(); ++i)
      t.rows.push_back({double(ens.cycle_indices[i]), ens.times[i],
                        1.0 - ens.mean_fidelity[i], ens.stderr_fidelity[i]});
    fs::path p = fs::path(cfg.output_dir) / "semiclassical.csv";
    write_csv(p, t, cfg,
              {"mode: " + cfg.ensemble_mode,
               "n_samples: " + std::to_string(cfg.field.n_samples),
               "columns: cycle index, time [1/J], mean 1 - f, standard error"});
    written.push_back(p);
    return written;
  }

  if (cfg.kind == "esr") {
    ESRPulseErrorSpec es{cfg.esr.eps0, cfg.esr.n0, cfg.esr.seed};
    ResultTable t;
    t.columns = {"draw",       "eps",   "n_y",    "n_z",   "m_x",
                 "m_z",        "dom_x", "dom_y",  "dom_z", "diff_full",
                 "diff_half"};
    for (long i = 0; i < cfg.esr.draws; ++i) {
      const ESRErrorDraw d = esr_sample_errors(es, i);
      const auto full = esr_effective_cycle(cfg.esr.sequence, d, cfg.esr.b_z, cfg.esr.tau);
      ESRErrorDraw half = d;
      half.eps /= 2;
      half.n_y /= 2;
      half.n_z /= 2;
      half.m_x /= 2;
      half.m_z /= 2;
      const auto halved =
          esr_effective_cycle(cfg.esr.sequence, half, cfg.esr.b_z, cfg.esr.tau);
      auto coeff = [](const Matrix& h, const Matrix& pauli) {
        return (h * pauli).trace().real() / 2.0;
      };
      t.rows.push_back(
          {double(i), d.eps, d.n_y, d.n_z, d.m_x, d.m_z,
           coeff(full.closed_form, pauli_x()), coeff(full.closed_form, pauli_y()),
           coeff(full.closed_form, pauli_z()),
           operator_norm(Matrix(full.numeric - full.closed_form)),
           operator_norm(Matrix(halved.numeric - halved.closed_form))});
    }
    fs::path p = fs::path(cfg.output_dir) / ("esr_" + cfg.esr.sequence + ".csv");
    write_csv(p, t, cfg,
              {"columns: draw, sampled errors, closed-form axis coefficients, "
               "|numeric - closed| at full and half error scale"});
    written.push_back(p);
    return written;
  }

  if (cfg.kind == "analyze-cycle") {
    const SpinBathModel model = sample_couplings(cfg.model);
    const HermitianOperator h0 = build_H0(model);
    const PulseSequence seq = build_sequence(cfg.sequence, cfg.model.n_qubits);
    const UnitaryOperator u_c = cycle_propagator(seq, h0);
    const HermitianOperator h_c = exact_cycle_hamiltonian(u_c, seq.t_cycle());
    std::vector<Vector> basis;
    if (cfg.pointer_set.basis == "computational") {
      for (Eigen::Index i = 0; i < model.dim_system(); ++i)
        basis.push_back(Vector::Unit(model.dim_system(), i));
    } else if (cfg.pointer_set.basis == "bell") {
      if (cfg.model.n_qubits != 2) throw ConfigInvalid("bell basis needs n_qubits = 2");
      basis = bell_basis();
    } else {
      basis = cfg.pointer_set.explicit_basis;
    }
    const int p = cfg.pointer_set.p > 0 ? cfg.pointer_set.p : int(basis.size());
    const EffectiveDecomposition dec =
        ps_decompose(h_c, basis, p, model.dim_system(), model.dim_bath());
    const double t_total = cfg.t_total > 0
                               ? cfg.t_total
                               : double(cfg.schedule.n_max) * seq.t_cycle();
    Json rep = {{"sequence", seq.label()},
                {"T_c", seq.t_cycle()},
                {"T_total", t_total},
                {"eps_norm", dec.eps_norm},
                {"gap_delta", dec.gap_delta},
                {"gap_delta_0", dec.gap_delta_0},
                {"unassigned_eigenvectors", dec.unassigned_eigenvectors},
                {"p", dec.p}};
    try {
      const BoundReport b = ps_fidelity_bounds(dec, seq.t_cycle(), t_total);
      rep["quantum_bound"] = b.quantum_bound;
      rep["cond_B1"] = b.cond_b1;
      rep["cond_B3"] = b.cond_b3;
      rep["met_valid"] = b.met_valid;
      rep["T_met"] = b.t_met;
      if (b.semiclassical_bound) rep["semiclassical_bound"] = *b.semiclassical_bound;
    } catch (const ZeroGap&) {
      rep["quantum_bound"] = nullptr;
      rep["zero_gap"] = true;
      rep["hint"] = "monitored sector degenerate; desymmetrize the cycle";
    }
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(cfg.config_hash));
    rep["config_hash"] = hash;
    rep["version"] = kArtifactVersion;
    fs::path p2 = fs::path(cfg.output_dir) / "analyze_cycle.json";
    write_json(p2, rep);
    written.push_back(p2);
    return written;
  }

  throw ConfigInvalid("unknown kind: " + cfg.kind);
}

}  // namespace pse
