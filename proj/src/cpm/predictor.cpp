#include "dmca/cpm/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dmca/nn/optimizer.hpp"
#include "dmca/util/csv.hpp"
#include "dmca/util/errors.hpp"

namespace dmca::cpm {

void CpmConfig::validate() const {
  if (time_step < 1) throw ConfigError("input window must hold at least one value");
  if (horizon < 1) throw ConfigError("prediction length must be at least 1");
  if (units < 1) throw ConfigError("LSTM width must be positive");
  if (il_window < time_step + 1)
    throw ConfigError("incremental window must exceed the input window");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate cannot be negative");
  if (pretrain_iterations < 1) throw ConfigError("need at least one pretrain iteration");
  if (il_iterations < 0) throw ConfigError("incremental iterations cannot be negative");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0,1)");
  if (confidence_window < 1) throw ConfigError("confidence window must be positive");
  if (!(confidence_max > 0.0) || !(confidence_max <= 1.0))
    throw ConfigError("confidence cap must lie in (0,1]");
  if (!(confidence_default >= 0.0) || !(confidence_default <= confidence_max))
    throw ConfigError("default confidence must lie in [0, cap]");
}

namespace {
nn::LstmCell make_lstm(const CpmConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return nn::LstmCell("cpm.lstm", 1, cfg.units, rng);
}
nn::DenseLayer make_head(const CpmConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 0x9e3779b9ULL);
  return nn::DenseLayer("cpm.head", cfg.units, 1, nn::Activation::Linear, rng);
}
}  // namespace

Predictor::Predictor(const CpmConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), lstm_(make_lstm(cfg, seed)), head_(make_head(cfg, seed)) {
  cfg_.validate();
}

double Predictor::normalize(double v) const {
  const double span = std::max(norm_max_ - norm_min_, 1e-12);
  return (v - norm_min_) / span;
}

double Predictor::denormalize(double v) const {
  const double span = std::max(norm_max_ - norm_min_, 1e-12);
  return norm_min_ + v * span;
}

double Predictor::forward_norm(const std::vector<double>& window_norm, bool record) {
  lstm_.set_recording(record);
  head_.set_recording(record);
  nn::LstmState state = nn::LstmState::zero(cfg_.units);
  nn::Vec x(1);
  for (double v : window_norm) {
    x[0] = v;
    state = lstm_.forward(x, state);
  }
  return head_.forward(state.hidden)[0];
}

double Predictor::train_iteration(const std::vector<double>& series_norm,
                                  const std::vector<int>& targets) {
  nn::zero_grads(params());
  const int k = cfg_.time_step;
  const double inv_n = 1.0 / static_cast<double>(targets.size());
  double total = 0.0;
  std::vector<double> window(k);
  lstm_.set_recording(true);
  head_.set_recording(true);
  for (int t : targets) {
    for (int i = 0; i < k; ++i) window[i] = series_norm[t - k + i];
    nn::LstmState state = nn::LstmState::zero(cfg_.units);
    nn::Vec x(1);
    for (double v : window) {
      x[0] = v;
      state = lstm_.forward(x, state);
    }
    const double pred = head_.forward(state.hidden)[0];
    const double err = pred - series_norm[t];
    total += err * err;
    nn::Vec dy(1);
    dy[0] = 2.0 * err * inv_n;
    nn::Vec dh = head_.backward(dy);
    nn::Vec dc = nn::Vec::Zero(cfg_.units);
    for (int i = 0; i < k; ++i) {
      const nn::LstmGrad g = lstm_.backward(dh, dc);
      dh = g.dh_prev;
      dc = g.dc_prev;
    }
  }
  nn::GradientDescent opt(cfg_.learning_rate, 0.0);
  if (!opt.step(params()))
    throw StateError("non-finite gradients during predictor training");
  return total * inv_n;
}

PretrainReport Predictor::pretrain(const std::vector<double>& history) {
  const int k = cfg_.time_step;
  const int n = static_cast<int>(history.size());
  if (n < k + 2) throw DataError("pretraining history is too short");
  for (double v : history)
    if (!std::isfinite(v)) throw DataError("non-finite value in pretraining history");

  norm_min_ = *std::min_element(history.begin(), history.end());
  norm_max_ = *std::max_element(history.begin(), history.end());
  std::vector<double> series(n);
  for (int i = 0; i < n; ++i) series[i] = normalize(history[i]);

  // Chronological split: targets in the leading fraction train, the rest
  // validate.
  const int split = std::max(k + 1, static_cast<int>(n * cfg_.train_fraction));
  std::vector<int> train_targets, val_targets;
  for (int t = k; t < n; ++t)
    (t < split ? train_targets : val_targets).push_back(t);
  if (train_targets.empty()) throw DataError("no training samples after split");

  PretrainReport report;
  report.train_samples = static_cast<int>(train_targets.size());
  report.val_samples = static_cast<int>(val_targets.size());
  report.loss_curve.reserve(cfg_.pretrain_iterations);
  for (int it = 0; it < cfg_.pretrain_iterations; ++it)
    report.loss_curve.push_back(train_iteration(series, train_targets));
  pretrained_ = true;

  if (!val_targets.empty()) {
    double se = 0.0, mean = 0.0, var = 0.0;
    for (int t : val_targets) mean += history[t];
    mean /= static_cast<double>(val_targets.size());
    std::vector<double> window(k);
    for (int t : val_targets) {
      for (int i = 0; i < k; ++i) window[i] = series[t - k + i];
      const double pred = denormalize(forward_norm(window, false));
      se += (pred - history[t]) * (pred - history[t]);
      var += (history[t] - mean) * (history[t] - mean);
    }
    report.val_mse = se / static_cast<double>(val_targets.size());
    var /= static_cast<double>(val_targets.size());
    report.val_nmse = var > 0.0 ? report.val_mse / var
                                : (report.val_mse == 0.0 ? 0.0 : 1e18);
  }
  return report;
}

bool Predictor::il_update(const std::vector<double>& latest) {
  if (!pretrained_) throw StateError("incremental update before pretraining");
  if (static_cast<int>(latest.size()) < cfg_.il_window) return false;
  const int n = cfg_.il_window;
  const int off = static_cast<int>(latest.size()) - n;
  std::vector<double> series(n);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(latest[off + i]))
      throw DataError("non-finite value in incremental window");
    series[i] = normalize(latest[off + i]);
  }
  std::vector<int> targets;
  for (int t = cfg_.time_step; t < n; ++t) targets.push_back(t);
  for (int it = 0; it < cfg_.il_iterations; ++it)
    train_iteration(series, targets);
  return true;
}

double Predictor::predict_single(const std::vector<double>& last_window) {
  if (static_cast<int>(last_window.size()) != cfg_.time_step)
    throw DataError("prediction window has the wrong length");
  std::vector<double> w(cfg_.time_step);
  for (int i = 0; i < cfg_.time_step; ++i) {
    if (!std::isfinite(last_window[i]))
      throw DataError("non-finite value in prediction window");
    w[i] = normalize(last_window[i]);
  }
  return denormalize(forward_norm(w, false));
}

std::vector<double> Predictor::predict_multi(const std::vector<double>& last_window,
                                             int steps) {
  if (steps < 1) throw ConfigError("prediction length must be at least 1");
  if (static_cast<int>(last_window.size()) != cfg_.time_step)
    throw DataError("prediction window has the wrong length");
  std::vector<double> w(cfg_.time_step);
  for (int i = 0; i < cfg_.time_step; ++i) {
    if (!std::isfinite(last_window[i]))
      throw DataError("non-finite value in prediction window");
    w[i] = normalize(last_window[i]);
  }
  std::vector<double> out;
  out.reserve(steps);
  for (int s = 0; s < steps; ++s) {
    const double p = forward_norm(w, false);
    out.push_back(denormalize(p));
    w.erase(w.begin());
    w.push_back(p);
  }
  return out;
}

nn::ParamRefs Predictor::params() {
  nn::ParamRefs refs = lstm_.params();
  for (nn::Param* p : head_.params()) refs.push_back(p);
  return refs;
}

void Predictor::save(const std::string& path) const {
  auto* self = const_cast<Predictor*>(this);
  std::vector<std::pair<std::string, std::string>> meta = {
      {"norm_min", format_double(norm_min_)},
      {"norm_max", format_double(norm_max_)},
      {"time_step", std::to_string(cfg_.time_step)},
      {"units", std::to_string(cfg_.units)},
  };
  nn::save_params(path, self->params(), meta);
}

void Predictor::load(const std::string& path) {
  const auto meta = nn::load_params(path, params());
  for (const auto& [key, value] : meta) {
    if (key == "norm_min") norm_min_ = std::stod(value);
    else if (key == "norm_max") norm_max_ = std::stod(value);
    else if (key == "time_step" && std::stoi(value) != cfg_.time_step)
      throw DataError("checkpoint input window does not match the configuration");
    else if (key == "units" && std::stoi(value) != cfg_.units)
      throw DataError("checkpoint LSTM width does not match the configuration");
  }
  pretrained_ = true;
}

double prediction_confidence(const std::vector<PredictionRecord>& window,
                             const CpmConfig& cfg) {
  std::vector<const PredictionRecord*> realized;
  realized.reserve(window.size());
  for (const auto& r : window)
    if (r.realized_known) realized.push_back(&r);
  if (static_cast<int>(realized.size()) < cfg.confidence_window)
    return cfg.confidence_default;
  double mse = 0.0, mean = 0.0;
  for (const auto* r : realized) mean += r->realized;
  mean /= static_cast<double>(realized.size());
  double var = 0.0;
  for (const auto* r : realized) {
    mse += r->sq_error;
    var += (r->realized - mean) * (r->realized - mean);
  }
  mse /= static_cast<double>(realized.size());
  var /= static_cast<double>(realized.size());
  const double nmse = var > 0.0 ? mse / var : (mse == 0.0 ? 0.0 : 1e18);
  return std::clamp(1.0 - nmse, 0.0, cfg.confidence_max);
}

}  // namespace dmca::cpm
