#include "dmca/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "dmca/util/csv.hpp"
#include "dmca/util/errors.hpp"

namespace dmca::metrics {

void Trajectory::validate() const {
  if (real_users < 1) throw DataError("trajectory needs at least one real user");
  if (slots.empty()) throw DataError("trajectory is empty");
  const std::size_t K = slots.front().decision.size();
  if (static_cast<std::size_t>(real_users) > K)
    throw DataError("more real users than user slots");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const SlotRecord& r = slots[i];
    if (i > 0 && r.slot != slots[i - 1].slot + 1)
      throw DataError("trajectory slots are not contiguous");
    if (r.decision.size() != K || r.rates.size() != K ||
        r.requirements.size() != K || r.deltas.size() != K ||
        r.kept.size() != K || r.served.size() != K)
      throw DataError("inconsistent record widths in trajectory");
  }
}

std::vector<double> Trajectory::theta_series() const {
  std::vector<double> out;
  out.reserve(slots.size());
  for (const auto& r : slots) out.push_back(r.theta);
  return out;
}

std::vector<double> Trajectory::performance_series() const {
  std::vector<double> out;
  out.reserve(slots.size());
  for (const auto& r : slots) out.push_back(r.performance);
  return out;
}

double service_success_rate(const std::vector<double>& real_deltas,
                            const std::vector<bool>* kept) {
  if (real_deltas.empty()) throw DataError("no real users to score");
  if (kept && kept->size() != real_deltas.size())
    throw DataError("kept flags do not match the delta vector");
  int ok = 0;
  for (std::size_t n = 0; n < real_deltas.size(); ++n)
    if (real_deltas[n] >= 0.0 && (!kept || (*kept)[n])) ++ok;
  return static_cast<double>(ok) / static_cast<double>(real_deltas.size());
}

double service_arrival_rate(const std::vector<double>& theta_series) {
  if (theta_series.empty()) throw DataError("empty satisfaction series");
  int full = 0;
  for (double th : theta_series)
    if (th == 1.0) ++full;
  return static_cast<double>(full) / static_cast<double>(theta_series.size());
}

double non_instant_decision_error(double perf_now, double perf_lagged) {
  if (perf_lagged == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(perf_now - perf_lagged) / perf_lagged;
}

double mean_decision_error(const std::vector<double>& perf_now,
                           const std::vector<double>& perf_lagged) {
  if (perf_now.size() != perf_lagged.size())
    throw DataError("performance series lengths differ");
  double sum = 0.0;
  int n = 0;
  for (std::size_t t = 0; t < perf_now.size(); ++t) {
    const double w = non_instant_decision_error(perf_now[t], perf_lagged[t]);
    if (std::isnan(w)) continue;
    sum += w;
    ++n;
  }
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return sum / n;
}

BiasSummary ppqos_bias(const Trajectory& traj, int horizon) {
  traj.validate();
  if (horizon < 1 || horizon > static_cast<int>(traj.slots.size()))
    throw DataError("bias horizon outside the trajectory");
  BiasSummary out;
  out.per_slot.reserve(horizon);
  double sum = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  for (int t = 0; t < horizon; ++t) {
    std::vector<double> w(traj.slots[t].deltas.begin(),
                          traj.slots[t].deltas.begin() + traj.real_users);
    for (double d : w) {
      sum += d;
      mn = std::min(mn, d);
    }
    out.per_slot.push_back(std::move(w));
  }
  out.mean = sum / (static_cast<double>(horizon) * traj.real_users);
  out.min = mn;
  return out;
}

int interior_extrema(const std::vector<double>& xs) {
  int count = 0;
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const bool peak = xs[i] > xs[i - 1] && xs[i] > xs[i + 1];
    const bool valley = xs[i] < xs[i - 1] && xs[i] < xs[i + 1];
    if (peak || valley) ++count;
  }
  return count;
}

double sequence_fluctuation(const std::vector<double>& xs) {
  if (xs.size() < 2) throw DataError("fluctuation needs at least two values");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  return interior_extrema(xs) * var;
}

double service_stability(const Trajectory& traj, const StabilityParams& p) {
  traj.validate();
  if (p.window < 1) throw ConfigError("stability window must be positive");
  const int T = static_cast<int>(traj.slots.size());
  if (T < 2 * p.window)
    throw DataError("trajectory shorter than two stability windows");
  const int windows = T / p.window;
  const int used = windows * p.window;

  int switches = 0;
  for (int i = 0; i + 1 < windows; ++i) {
    const auto& a = traj.slots[i * p.window].decision;
    const auto& b = traj.slots[(i + 1) * p.window].decision;
    if (a != b) ++switches;
  }

  double excess = 0.0;
  for (int n = 0; n < traj.real_users; ++n) {
    std::vector<double> delivered(used), required(used);
    for (int t = 0; t < used; ++t) {
      const SlotRecord& r = traj.slots[t];
      delivered[t] = r.kept[n] ? r.rates[n] : 0.0;
      required[t] = r.requirements[n];
    }
    excess += sequence_fluctuation(delivered) - sequence_fluctuation(required);
  }
  excess /= static_cast<double>(traj.real_users);
  return static_cast<double>(switches) * static_cast<double>(windows) * excess;
}

std::vector<double> minmax_normalize(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  std::vector<double> out(values.size(), 0.0);
  if (*mx == *mn) return out;
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = (values[i] - *mn) / (*mx - *mn);
  return out;
}

namespace {
void write_block(std::ofstream& out, const char* prefix, int K, bool trailing) {
  for (int k = 0; k < K; ++k) out << ',' << prefix << '_' << (k + 1);
  (void)trailing;
}
}  // namespace

void save_trajectory(const std::string& path, const Trajectory& traj,
                     const std::vector<std::string>& extra_comments) {
  traj.validate();
  const int K = static_cast<int>(traj.slots.front().decision.size());
  std::ofstream out(path);
  if (!out) throw DataError("cannot open trajectory file for writing: " + path);
  for (const auto& c : extra_comments) out << "# " << c << "\n";
  out << "# real_users=" << traj.real_users << "\n";
  out << "slot,theta,reward,collision,performance";
  write_block(out, "a", K, false);
  write_block(out, "rate", K, false);
  write_block(out, "req", K, false);
  write_block(out, "delta", K, false);
  write_block(out, "kept", K, false);
  write_block(out, "served", K, false);
  out << "\n";
  for (const auto& r : traj.slots) {
    out << r.slot << ',' << format_double(r.theta) << ',' << format_double(r.reward)
        << ',' << (r.collision ? 1 : 0) << ',' << format_double(r.performance);
    for (int v : r.decision) out << ',' << v;
    for (double v : r.rates) out << ',' << format_double(v);
    for (double v : r.requirements) out << ',' << format_double(v);
    for (double v : r.deltas) out << ',' << format_double(v);
    for (bool v : r.kept) out << ',' << (v ? 1 : 0);
    for (bool v : r.served) out << ',' << (v ? 1 : 0);
    out << "\n";
  }
  if (!out) throw DataError("failed while writing trajectory file: " + path);
}

Trajectory load_trajectory(const std::string& path) {
  const CsvFile csv = read_csv(path);
  Trajectory traj;
  for (const auto& c : csv.comments) {
    const auto eq = c.find("real_users=");
    if (eq != std::string::npos)
      traj.real_users = static_cast<int>(parse_double(c.substr(eq + 11), path));
  }
  if (csv.header.size() < 6 || csv.header[0] != "slot")
    throw DataError("unrecognized trajectory header: " + path);
  const int K = static_cast<int>((csv.header.size() - 5) / 6);
  if (5 + 6 * static_cast<std::size_t>(K) != csv.header.size())
    throw DataError("trajectory header has unexpected column count: " + path);
  for (const auto& row : csv.rows) {
    if (row.size() != csv.header.size())
      throw DataError("ragged row in trajectory file: " + path);
    SlotRecord r;
    r.slot = static_cast<int>(parse_double(row[0], path));
    r.theta = parse_double(row[1], path);
    r.reward = parse_double(row[2], path);
    r.collision = parse_double(row[3], path) != 0.0;
    r.performance = parse_double(row[4], path);
    int c = 5;
    for (int k = 0; k < K; ++k)
      r.decision.push_back(static_cast<int>(parse_double(row[c++], path)));
    for (int k = 0; k < K; ++k) r.rates.push_back(parse_double(row[c++], path));
    for (int k = 0; k < K; ++k)
      r.requirements.push_back(parse_double(row[c++], path));
    for (int k = 0; k < K; ++k) r.deltas.push_back(parse_double(row[c++], path));
    for (int k = 0; k < K; ++k) r.kept.push_back(parse_double(row[c++], path) != 0.0);
    for (int k = 0; k < K; ++k)
      r.served.push_back(parse_double(row[c++], path) != 0.0);
    traj.slots.push_back(std::move(r));
  }
  traj.validate();
  return traj;
}

}  // namespace dmca::metrics
