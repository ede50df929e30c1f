#include "dmca/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dmca/agent/agent.hpp"
#include "dmca/util/csv.hpp"
#include "dmca/util/errors.hpp"
#include "dmca/util/svg.hpp"

namespace dmca::harness {

namespace fs = std::filesystem;

namespace {

bool verbose() {
  const char* v = std::getenv("DMCA_LOG");
  return !(v && std::string(v) == "quiet");
}

void note(const std::string& msg) {
  if (verbose()) std::cerr << msg << "\n";
}

std::vector<std::string> stamp(const ExperimentConfig& cfg) {
  return {"config_hash=" + cfg.fingerprint,
          "seed=" + std::to_string(cfg.run.seed)};
}

double median(std::vector<double> v) {
  if (v.empty()) throw DataError("median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string Paths::trace() const { return (fs::path(out) / "trace.csv").string(); }
std::string Paths::agent() const { return (fs::path(out) / "agent.txt").string(); }
std::string Paths::cpm_checkpoint(int channel) const {
  return (fs::path(out) / ("cpm_ch" + std::to_string(channel) + ".txt")).string();
}
std::string Paths::in_out(const std::string& name) const {
  return (fs::path(out) / name).string();
}

MetricsRow score_trajectory(const metrics::Trajectory& traj,
                            const std::string& method, const std::string& mode,
                            int lag, int stability_window) {
  MetricsRow row;
  row.method = method;
  row.mode = mode;
  row.lag = lag;
  row.kappa = metrics::service_arrival_rate(traj.theta_series());
  row.mean_bias =
      metrics::ppqos_bias(traj, static_cast<int>(traj.slots.size())).mean;
  row.sta_raw = metrics::service_stability(traj, {stability_window});
  double sum = 0.0;
  for (const auto& r : traj.slots) sum += r.performance;
  row.mean_throughput = sum / static_cast<double>(traj.slots.size());
  return row;
}

void write_metrics_table(const std::string& path, std::vector<MetricsRow> rows,
                         const std::vector<std::string>& comments) {
  std::vector<double> raw;
  raw.reserve(rows.size());
  for (const auto& r : rows) raw.push_back(r.sta_raw);
  const std::vector<double> norm = metrics::minmax_normalize(raw);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].sta_norm = norm[i];

  std::ofstream out(path);
  if (!out) throw DataError("cannot open metrics table for writing: " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "method,mode,lag,kappa,mean_bias,S_ta_raw,S_ta_norm,mean_throughput\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.mode << ',' << r.lag << ','
        << format_double(r.kappa) << ',' << format_double(r.mean_bias) << ','
        << format_double(r.sta_raw) << ',' << format_double(r.sta_norm) << ','
        << format_double(r.mean_throughput) << "\n";
  if (!out) throw DataError("failed while writing metrics table: " + path);
}

env::ChannelTrace generate_trace(const ExperimentConfig& cfg, double speed_kmh,
                                 std::uint64_t seed) {
  switch (cfg.trace.kind) {
    case TraceKind::kSinusoid:
      return env::generate_sinusoid_trace(
          cfg.trace.slots, cfg.env.channel.channels, cfg.trace.sample_rate_hz,
          cfg.trace.carrier_hz, speed_kmh, cfg.trace.sinusoid, seed);
    case TraceKind::kAr:
      return env::generate_ar_trace(cfg.trace.slots, cfg.env.channel.channels,
                                    cfg.trace.sample_rate_hz, cfg.trace.ar, seed);
    case TraceKind::kFile:
      throw ConfigError("cannot synthesize a trace when kind=file");
  }
  throw ConfigError("unreachable trace kind");
}

env::ChannelTrace load_trace_checked(const ExperimentConfig& cfg, const Paths& p) {
  const std::string path =
      cfg.trace.kind == TraceKind::kFile ? cfg.trace.file : p.trace();
  if (!fs::exists(path))
    throw MissingArtifactError("trace file not found (run gen-trace first): " +
                               path);
  env::ChannelTrace trace = env::load_trace(path);
  if (trace.channels() != cfg.env.channel.channels)
    throw DataError("trace channel count does not match the configuration");
  return trace;
}

Span eval_span(const ExperimentConfig& cfg, int trace_slots, int max_lag) {
  Span s;
  int lo = std::max(1, max_lag);
  if (cfg.prediction_enabled) lo = std::max(lo, cfg.pretrain_slots);
  s.start = std::max(lo, trace_slots - cfg.run.eval_slots);
  s.slots = std::min(cfg.run.eval_slots, trace_slots - s.start - max_lag);
  if (s.slots < 2 * cfg.run.stability_window)
    throw DataError("trace too short for the evaluation window");
  return s;
}

int cmd_gen_trace(const ExperimentConfig& cfg, const Paths& p) {
  if (cfg.trace.kind == TraceKind::kFile)
    throw ConfigError("trace kind is file; nothing to generate");
  const env::ChannelTrace trace =
      generate_trace(cfg, cfg.trace.speed_kmh, cfg.run.seed);
  env::save_trace(p.trace(), trace, stamp(cfg));
  note("wrote " + p.trace());
  return 0;
}

namespace {

cpm::PredictorBank build_bank(const ExperimentConfig& cfg,
                              const env::ChannelTrace& trace) {
  cpm::PredictorBank bank(cfg.cpm, cfg.run.seed);
  bank.build(trace, cfg.pretrain_slots);
  return bank;
}

env::Environment make_env(const ExperimentConfig& cfg,
                          const env::ChannelTrace& trace) {
  return env::Environment(cfg.env, trace);
}

baselines::Criterion criterion_for(const ExperimentConfig& cfg) {
  return cfg.env.mode == env::StreamingMode::kLive
             ? baselines::Criterion::kMinAbsGap
             : baselines::Criterion::kMaxGap;
}

baselines::DecisionFn make_agent_fn(agent::Agent& ag, int channels) {
  return [&ag, channels](const env::SystemState& s, int) {
    return env::decode_action(ag.act(s.values), channels);
  };
}

}  // namespace

int cmd_pretrain(const ExperimentConfig& cfg, const Paths& p) {
  const env::ChannelTrace trace = load_trace_checked(cfg, p);
  cpm::PredictorBank bank = build_bank(cfg, trace);

  // Iteration-indexed training losses, one column per channel.
  {
    std::ofstream out(p.in_out("cpm_loss.csv"));
    if (!out) throw DataError("cannot write cpm loss curves");
    for (const auto& c : stamp(cfg)) out << "# " << c << "\n";
    out << "iteration";
    for (int m = 0; m < trace.channels(); ++m) out << ",loss_ch" << m;
    out << "\n";
    const auto& reports = bank.pretrain_reports();
    for (int it = 0; it < cfg.cpm.pretrain_iterations; ++it) {
      out << it;
      for (const auto& rep : reports) out << ',' << format_double(rep.loss_curve[it]);
      out << "\n";
    }
  }
  {
    std::ofstream out(p.in_out("cpm_report.csv"));
    if (!out) throw DataError("cannot write cpm report");
    for (const auto& c : stamp(cfg)) out << "# " << c << "\n";
    out << "channel,val_nmse,online_nmse_h1\n";
    double val_sum = 0.0;
    for (int m = 0; m < trace.channels(); ++m) {
      const double v = bank.pretrain_reports()[m].val_nmse;
      val_sum += v;
      out << m << ',' << format_double(v) << ',' << format_double(bank.nmse(m, 1))
          << "\n";
    }
    out << "pooled," << format_double(val_sum / trace.channels()) << ','
        << format_double(bank.nmse(-1, 1)) << "\n";
  }
  bank.save_log(p.in_out("cpm_log_ch0.csv"), 0);
  for (int m = 0; m < trace.channels(); ++m) bank.predictor(m).save(p.cpm_checkpoint(m));
  {
    std::ofstream out(p.in_out("cpm_confidence.csv"));
    if (!out) throw DataError("cannot write confidence series");
    for (const auto& c : stamp(cfg)) out << "# " << c << "\n";
    out << "slot,rho\n";
    const auto& rho = bank.confidence_series();
    for (std::size_t i = 0; i < rho.size(); ++i)
      out << bank.start_slot() + static_cast<int>(i) << ',' << format_double(rho[i])
          << "\n";
  }

  SvgSeries s;
  s.label = "channel 0 training loss";
  for (std::size_t i = 0; i < bank.pretrain_reports()[0].loss_curve.size(); ++i) {
    s.x.push_back(static_cast<double>(i));
    s.y.push_back(bank.pretrain_reports()[0].loss_curve[i]);
  }
  write_svg_lines(p.in_out("cpm_loss.svg"), "predictor pretraining loss", {s});
  note("pooled one-step NMSE: " + std::to_string(bank.nmse(-1, 1)));
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, const Paths& p) {
  const env::ChannelTrace trace = load_trace_checked(cfg, p);
  env::Environment e = make_env(cfg, trace);

  std::vector<agent::EpisodeStats> log;
  agent::Agent ag(e.state_dim(), e.user_slots(), cfg.agent, cfg.run.seed);
  if (cfg.prediction_enabled) {
    cpm::PredictorBank bank = build_bank(cfg, trace);
    e.set_prediction_source(&bank);
    const int lo = std::max({bank.start_slot(), cfg.agent.train_lag, 1});
    log = ag.train(e, lo, e.slots(), cfg.reward);
    e.set_prediction_source(nullptr);
  } else {
    const int lo = std::max(cfg.agent.train_lag, 1);
    log = ag.train(e, lo, e.slots(), cfg.reward);
  }

  ag.save(p.agent());
  agent::write_episode_log(p.in_out("episodes.csv"), log, stamp(cfg));

  SvgSeries steps, rewards;
  steps.label = "steps to stop";
  rewards.label = "mean reward";
  for (const auto& st : log) {
    steps.x.push_back(st.episode);
    steps.y.push_back(st.steps);
    rewards.x.push_back(st.episode);
    rewards.y.push_back(st.mean_reward);
  }
  write_svg_lines(p.in_out("episodes.svg"), "training episodes", {steps, rewards});
  note("wrote " + p.agent());
  return 0;
}

namespace {

struct Cell {
  std::string method;
  std::string mode;
  int lag = 0;
  int period = 1;
};

metrics::Trajectory run_cell(const ExperimentConfig& cfg, env::Environment& e,
                             const Span& span, const Cell& cell,
                             const baselines::DecisionFn& fn) {
  e.reset();
  baselines::ScheduleConfig sc;
  sc.start = span.start;
  sc.slots = span.slots;
  sc.period = cell.period;
  sc.lag = cell.lag;
  sc.reward = cfg.reward;
  return baselines::run_schedule(e, sc, fn);
}

std::string cell_file(const Cell& c) {
  return "traj_" + c.method + "_" + c.mode + "_lag" + std::to_string(c.lag) +
         ".csv";
}

}  // namespace

int cmd_eval(const ExperimentConfig& cfg, const Paths& p) {
  const env::ChannelTrace trace = load_trace_checked(cfg, p);
  env::Environment e = make_env(cfg, trace);

  cpm::PredictorBank bank(cfg.cpm, cfg.run.seed);
  const bool needs_bank = cfg.prediction_enabled;
  if (needs_bank) {
    bank.build(trace, cfg.pretrain_slots);
    e.set_prediction_source(&bank);
  }

  Cell cell;
  cell.method = cfg.run.eval_method;
  cell.period = cfg.run.eval_period;
  cell.mode = cell.period == 1 ? "one-slot" : "l-slot";
  cell.lag = cfg.run.eval_lag;

  agent::Agent ag(e.state_dim(), e.user_slots(), cfg.agent, cfg.run.seed);
  baselines::DecisionFn fn;
  if (cell.method == "learning") {
    if (!fs::exists(p.agent()))
      throw MissingArtifactError("agent checkpoint not found (run train): " +
                                 p.agent());
    ag.load(p.agent());
    fn = make_agent_fn(ag, e.channels());
  } else if (cell.method == "exhaustive") {
    fn = baselines::make_exhaustive_fn(e, criterion_for(cfg));
  } else {
    fn = baselines::make_random_fn(e.channels(), e.user_slots(),
                                   cfg.run.seed ^ 0x5eedULL);
  }

  const Span span = eval_span(cfg, trace.slots(), cell.lag);
  const metrics::Trajectory traj = run_cell(cfg, e, span, cell, fn);
  metrics::save_trajectory(p.in_out(cell_file(cell)), traj, stamp(cfg));
  write_metrics_table(
      p.in_out("metrics_eval.csv"),
      {score_trajectory(traj, cell.method, cell.mode, cell.lag,
                        cfg.run.stability_window)},
      stamp(cfg));
  note("kappa=" + std::to_string(metrics::service_arrival_rate(traj.theta_series())));
  return 0;
}

int cmd_compare(const ExperimentConfig& cfg, const Paths& p) {
  const env::ChannelTrace trace = load_trace_checked(cfg, p);
  env::Environment e = make_env(cfg, trace);

  cpm::PredictorBank bank(cfg.cpm, cfg.run.seed);
  if (cfg.prediction_enabled) {
    bank.build(trace, cfg.pretrain_slots);
    e.set_prediction_source(&bank);
  }

  agent::Agent ag(e.state_dim(), e.user_slots(), cfg.agent, cfg.run.seed);
  if (!fs::exists(p.agent()))
    throw MissingArtifactError("agent checkpoint not found (run train): " +
                               p.agent());
  ag.load(p.agent());

  int max_lag = 0;
  for (int lag : cfg.run.lags) max_lag = std::max(max_lag, lag);
  const Span span = eval_span(cfg, trace.slots(), max_lag);
  const int l = std::max(1, cfg.agent.horizon);

  std::vector<MetricsRow> rows;
  std::vector<SvgSeries> throughput;
  struct Key {
    std::string method, mode;
    int lag;
  };
  std::vector<std::pair<Key, std::vector<double>>> perf_series;

  const std::vector<std::string> methods = {"random", "exhaustive", "learning"};
  for (const auto& method : methods) {
    for (int period : {1, l}) {
      const std::string mode = period == 1 ? "one-slot" : "l-slot";
      for (int lag : cfg.run.lags) {
        Cell cell{method, mode, lag, period};
        baselines::DecisionFn fn;
        if (method == "learning") {
          fn = make_agent_fn(ag, e.channels());
        } else if (method == "exhaustive") {
          fn = baselines::make_exhaustive_fn(e, criterion_for(cfg));
        } else {
          fn = baselines::make_random_fn(
              e.channels(), e.user_slots(),
              cfg.run.seed ^ (0x1000ULL + static_cast<std::uint64_t>(
                                              lag * 2 + (period == 1 ? 0 : 1))));
        }
        const metrics::Trajectory traj = run_cell(cfg, e, span, cell, fn);
        metrics::save_trajectory(p.in_out(cell_file(cell)), traj, stamp(cfg));
        rows.push_back(score_trajectory(traj, method, mode, lag,
                                        cfg.run.stability_window));
        perf_series.push_back({{method, mode, lag}, traj.performance_series()});
        if (lag == 0 && period == 1) {
          SvgSeries s;
          s.label = method;
          const auto perf = traj.performance_series();
          for (std::size_t i = 0; i < perf.size(); ++i) {
            s.x.push_back(static_cast<double>(span.start + static_cast<int>(i)));
            s.y.push_back(perf[i]);
          }
          throughput.push_back(std::move(s));
        }
        note("ran " + method + " " + mode + " lag " + std::to_string(lag));
      }
    }
  }

  write_metrics_table(p.in_out("metrics.csv"), rows, stamp(cfg));

  {
    std::ofstream out(p.in_out("throughput.csv"));
    if (!out) throw DataError("cannot write throughput curves");
    for (const auto& c : stamp(cfg)) out << "# " << c << "\n";
    out << "slot";
    for (const auto& [key, series] : perf_series)
      out << ',' << key.method << '_' << key.mode << "_lag" << key.lag;
    out << "\n";
    for (int i = 0; i < span.slots; ++i) {
      out << span.start + i;
      for (const auto& [key, series] : perf_series)
        out << ',' << format_double(series[i]);
      out << "\n";
    }
  }

  // Stale-decision degradation per method and cadence, against the zero-lag
  // run of the same cell.
  {
    std::ofstream out(p.in_out("omega.csv"));
    if (!out) throw DataError("cannot write decision-error table");
    for (const auto& c : stamp(cfg)) out << "# " << c << "\n";
    out << "method,mode,lag,omega_mean\n";
    for (const auto& [key, series] : perf_series) {
      if (key.lag == 0) continue;
      for (const auto& [base_key, base] : perf_series) {
        if (base_key.method == key.method && base_key.mode == key.mode &&
            base_key.lag == 0) {
          out << key.method << ',' << key.mode << ',' << key.lag << ','
              << format_double(metrics::mean_decision_error(base, series))
              << "\n";
        }
      }
    }
  }

  write_svg_lines(p.in_out("throughput_one_lag0.svg"),
                  "served throughput, one decision per slot", throughput);
  return 0;
}

int convergence_episode(const std::vector<agent::EpisodeStats>& episodes,
                        int step_floor, int consecutive) {
  int run = 0;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    run = episodes[i].steps <= step_floor ? run + 1 : 0;
    if (run >= consecutive)
      return episodes[i - static_cast<std::size_t>(consecutive) + 1].episode;
  }
  return static_cast<int>(episodes.size()) + 1;
}

int cmd_converge(const ExperimentConfig& cfg, const Paths& p) {
  const int l = std::max(1, cfg.agent.horizon);

  std::ofstream out(p.in_out("converge.csv"));
  if (!out) throw DataError("cannot write convergence table");
  for (const auto& c : stamp(cfg)) out << "# " << c << "\n";
  out << "speed_kmh,learning_rate,prediction,seed,convergence_episode,censored\n";

  struct CellStats {
    double speed, lr;
    bool with;
    std::vector<double> eps;
  };
  std::vector<CellStats> cells;

  for (std::size_t si = 0; si < cfg.run.converge_speeds.size(); ++si) {
    const double speed = cfg.run.converge_speeds[si];
    const env::ChannelTrace trace =
        generate_trace(cfg, speed, cfg.run.seed + 7000 + si);
    cpm::PredictorBank bank(cfg.cpm, cfg.run.seed);
    bank.build(trace, cfg.pretrain_slots);

    for (double lr : cfg.run.converge_lrs) {
      for (bool with : {true, false}) {
        CellStats cs{speed, lr, with, {}};
        for (std::uint64_t seed : cfg.run.converge_seeds) {
          env::Environment e(cfg.env, trace);
          if (with) e.set_prediction_source(&bank);
          agent::AgentHyperParams hp = cfg.agent;
          hp.actor_lr = lr;
          hp.critic_lr = 10.0 * lr;
          agent::Agent ag(e.state_dim(), e.user_slots(), hp, seed);
          const int lo = std::max({bank.start_slot(), hp.train_lag, 1});
          const auto log = ag.train(e, lo, e.slots(), cfg.reward);
          const int ep = convergence_episode(log, l);
          const bool censored = ep > static_cast<int>(log.size());
          out << format_double(speed) << ',' << format_double(lr) << ','
              << (with ? 1 : 0) << ',' << seed << ',' << ep << ','
              << (censored ? 1 : 0) << "\n";
          cs.eps.push_back(ep);
          note("speed " + std::to_string(speed) + " lr " + std::to_string(lr) +
               (with ? " with" : " without") + " seed " + std::to_string(seed) +
               " -> episode " + std::to_string(ep));
        }
        cells.push_back(std::move(cs));
      }
    }
  }
  out.close();

  std::ofstream sum(p.in_out("converge_summary.csv"));
  if (!sum) throw DataError("cannot write convergence summary");
  for (const auto& c : stamp(cfg)) sum << "# " << c << "\n";
  sum << "speed_kmh,learning_rate,prediction,median_convergence_episode\n";
  for (const auto& cs : cells)
    sum << format_double(cs.speed) << ',' << format_double(cs.lr) << ','
        << (cs.with ? 1 : 0) << ',' << format_double(median(cs.eps)) << "\n";
  return 0;
}

}  // namespace dmca::harness
