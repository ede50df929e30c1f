#include "dmca/baselines/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dmca/util/errors.hpp"

namespace dmca::baselines {

env::Decision random_policy(int channels, int user_slots, std::mt19937_64& rng) {
  if (user_slots < 1) throw ConfigError("need at least one user slot");
  if (user_slots > channels)
    throw ConfigError("cannot pick more distinct channels than exist");
  std::vector<int> pool(channels);
  std::iota(pool.begin(), pool.end(), 0);
  env::Decision d;
  d.channels.resize(user_slots);
  for (int k = 0; k < user_slots; ++k) {
    std::uniform_int_distribution<int> pick(k, channels - 1);
    std::swap(pool[k], pool[pick(rng)]);
    d.channels[k] = pool[k];
  }
  return d;
}

namespace {

struct SearchBest {
  int satisfied = -1;
  double cost = 0.0;
  std::vector<int> assign;

  // Lexicographic objective: more satisfied users first, then lower cost,
  // then smaller decision vector.
  bool improves(int sat, double c, const std::vector<int>& a) const {
    if (assign.empty()) return true;
    if (sat != satisfied) return sat > satisfied;
    if (c != cost) return c < cost;
    return a < assign;
  }
};

void enumerate(const std::vector<double>& rates, const std::vector<double>& reqs,
               Criterion crit, std::size_t n, std::vector<bool>& used,
               std::vector<int>& assign, int sat, double cost, SearchBest& best) {
  if (n == reqs.size()) {
    if (best.improves(sat, cost, assign)) {
      best.satisfied = sat;
      best.cost = cost;
      best.assign = assign;
    }
    return;
  }
  for (std::size_t m = 0; m < rates.size(); ++m) {
    if (used[m]) continue;
    used[m] = true;
    assign[n] = static_cast<int>(m);
    const double gap = rates[m] - reqs[n];
    const int sat2 = sat + (gap >= 0.0 ? 1 : 0);
    const double cost2 =
        cost + (crit == Criterion::kMinAbsGap ? std::abs(gap) : -gap);
    enumerate(rates, reqs, crit, n + 1, used, assign, sat2, cost2, best);
    used[m] = false;
  }
}

}  // namespace

std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  const int m = static_cast<int>(cost.front().size());
  if (m < n) throw ConfigError("assignment needs at least as many columns as rows");
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != m)
      throw ConfigError("ragged assignment cost matrix");

  // Potentials-based shortest augmenting path method, 1-indexed internally.
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

env::Decision exhaustive_policy(const std::vector<double>& rates,
                                const std::vector<double>& requirements,
                                Criterion criterion) {
  const std::size_t M = rates.size();
  const std::size_t N = requirements.size();
  if (N == 0) throw ConfigError("no users to assign");
  if (N > M) throw ConfigError("more users than channels");
  for (double r : rates)
    if (!std::isfinite(r)) throw DataError("non-finite channel rate");
  for (double r : requirements)
    if (!std::isfinite(r)) throw DataError("non-finite requirement");

  env::Decision d;
  if (M <= 10) {
    SearchBest best;
    std::vector<bool> used(M, false);
    std::vector<int> assign(N, -1);
    enumerate(rates, requirements, criterion, 0, used, assign, 0, 0.0, best);
    d.channels = best.assign;
    return d;
  }

  // Embed the two-step objective into one assignment cost: a satisfied user
  // saves a unit, and all secondary costs together stay below that unit.
  double scale = 0.0;
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t m = 0; m < M; ++m)
      scale = std::max(scale, std::abs(rates[m] - requirements[n]));
  const double denom = scale > 0.0 ? scale * static_cast<double>(N) * (1.0 + 1e-9)
                                   : 1.0;
  std::vector<std::vector<double>> cost(N, std::vector<double>(M));
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t m = 0; m < M; ++m) {
      const double gap = rates[m] - requirements[n];
      const double secondary =
          criterion == Criterion::kMinAbsGap ? std::abs(gap) : -gap;
      cost[n][m] = (gap >= 0.0 ? -1.0 : 0.0) + 0.5 * secondary / denom;
    }
  }
  d.channels = solve_assignment(cost);
  return d;
}

env::Decision extend_decision(const env::Decision& real_part, int user_slots,
                              int channels) {
  if (static_cast<int>(real_part.channels.size()) > user_slots)
    throw ConfigError("real assignment is wider than the decision");
  if (user_slots > channels) throw ConfigError("more user slots than channels");
  env::Decision d = real_part;
  std::vector<bool> used(channels, false);
  for (int ch : d.channels) {
    if (ch < 0 || ch >= channels) throw StateError("channel index out of range");
    used[ch] = true;
  }
  int next = 0;
  while (static_cast<int>(d.channels.size()) < user_slots) {
    while (next < channels && used[next]) ++next;
    if (next >= channels) throw StateError("ran out of channels while padding");
    used[next] = true;
    d.channels.push_back(next);
  }
  return d;
}

}  // namespace dmca::baselines
