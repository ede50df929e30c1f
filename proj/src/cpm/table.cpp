#include "dmca/cpm/table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dmca/util/csv.hpp"
#include "dmca/util/errors.hpp"

namespace dmca::cpm {

PredictorBank::PredictorBank(const CpmConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), seed_(seed) {
  cfg_.validate();
}

void PredictorBank::build(const env::ChannelTrace& trace, int pretrain_slots) {
  trace.validate();
  const int k = cfg_.time_step;
  if (pretrain_slots < k + 2)
    throw ConfigError("pretraining span is too short for the input window");
  if (pretrain_slots >= trace.slots())
    throw ConfigError("pretraining span leaves no slots to predict");

  gains_ = trace.gains;
  slots_ = trace.slots();
  channels_ = trace.channels();
  start_ = pretrain_slots;
  preds_.clear();
  reports_.clear();
  records_.assign(channels_, {});
  update_slots_.clear();
  table_.assign(slots_ - start_, Eigen::MatrixXd::Zero(cfg_.horizon, channels_));
  rho_.assign(slots_ - start_, cfg_.confidence_default);

  for (int m = 0; m < channels_; ++m) {
    preds_.emplace_back(cfg_, seed_ + static_cast<std::uint64_t>(m));
    std::vector<double> history(gains_.col(m).data(),
                                gains_.col(m).data() + start_);
    reports_.push_back(preds_[m].pretrain(history));
  }

  std::vector<double> window(k), il(cfg_.il_window);
  for (int t = start_; t < slots_; ++t) {
    if ((t - start_) % cfg_.horizon == 0) {
      bool applied = false;
      for (int m = 0; m < channels_; ++m) {
        const int have = std::min(t + 1, cfg_.il_window);
        il.assign(gains_.col(m).data() + (t + 1 - have),
                  gains_.col(m).data() + (t + 1));
        applied = preds_[m].il_update(il) || applied;
      }
      if (applied) update_slots_.push_back(t);
    }
    for (int m = 0; m < channels_; ++m) {
      window.assign(gains_.col(m).data() + (t - k + 1),
                    gains_.col(m).data() + (t + 1));
      const std::vector<double> pred = preds_[m].predict_multi(window, cfg_.horizon);
      for (int h = 1; h <= cfg_.horizon; ++h) {
        table_[t - start_](h - 1, m) = pred[h - 1];
        PredictionRecord rec;
        rec.slot = t + h;
        rec.step = h;
        rec.predicted = pred[h - 1];
        if (rec.slot < slots_) {
          rec.realized = gains_(rec.slot, m);
          rec.sq_error = (rec.predicted - rec.realized) * (rec.predicted - rec.realized);
          rec.realized_known = true;
        }
        records_[m].push_back(rec);
      }
    }
  }

  // Confidence per span slot from pooled one-step errors realized in the
  // trailing confidence window.
  std::vector<double> err_sum(slots_, 0.0), val_sum(slots_, 0.0), val_sq(slots_, 0.0);
  std::vector<int> count(slots_, 0);
  for (int m = 0; m < channels_; ++m) {
    for (const auto& rec : records_[m]) {
      if (rec.step != 1 || !rec.realized_known) continue;
      err_sum[rec.slot] += rec.sq_error;
      val_sum[rec.slot] += rec.realized;
      val_sq[rec.slot] += rec.realized * rec.realized;
      ++count[rec.slot];
    }
  }
  const int W = cfg_.confidence_window;
  for (int t = start_; t < slots_; ++t) {
    double se = 0.0, s1 = 0.0, s2 = 0.0;
    int c = 0;
    for (int u = std::max(0, t - W + 1); u <= t; ++u) {
      se += err_sum[u];
      s1 += val_sum[u];
      s2 += val_sq[u];
      c += count[u];
    }
    if (c < W) continue;  // keeps the default
    const double mean = s1 / c;
    const double var = std::max(0.0, s2 / c - mean * mean);
    const double mse = se / c;
    const double nm = var > 0.0 ? mse / var : (mse == 0.0 ? 0.0 : 1e18);
    rho_[t - start_] = std::clamp(1.0 - nm, 0.0, cfg_.confidence_max);
  }
}

double PredictorBank::predicted_gain(int slot, int step, int channel) const {
  if (step < 1 || step > cfg_.horizon)
    throw StateError("prediction look-ahead out of range");
  if (channel < 0 || channel >= channels_)
    throw StateError("prediction channel out of range");
  if (slot < start_ || slot >= slots_)
    return gains_(std::clamp(slot, 0, slots_ - 1), channel);
  return table_[slot - start_](step - 1, channel);
}

double PredictorBank::confidence(int slot) const {
  if (slot < start_) return cfg_.confidence_default;
  return rho_[std::min(slot, slots_ - 1) - start_];
}

const std::vector<PredictionRecord>& PredictorBank::records(int channel) const {
  if (channel < 0 || channel >= channels_)
    throw StateError("prediction channel out of range");
  return records_[channel];
}

Predictor& PredictorBank::predictor(int channel) {
  if (channel < 0 || channel >= channels_)
    throw StateError("prediction channel out of range");
  return preds_[channel];
}

double PredictorBank::nmse(int channel, int step) const {
  double se = 0.0, s1 = 0.0, s2 = 0.0;
  int c = 0;
  for (int m = 0; m < channels_; ++m) {
    if (channel >= 0 && m != channel) continue;
    for (const auto& rec : records_[m]) {
      if (!rec.realized_known) continue;
      if (step > 0 && rec.step != step) continue;
      se += rec.sq_error;
      s1 += rec.realized;
      s2 += rec.realized * rec.realized;
      ++c;
    }
  }
  if (c == 0) throw DataError("no realized predictions to score");
  const double mean = s1 / c;
  const double var = std::max(0.0, s2 / c - mean * mean);
  if (var == 0.0) return se == 0.0 ? 0.0 : 1e18;
  return (se / c) / var;
}

void PredictorBank::save_log(const std::string& path, int channel) const {
  const auto& recs = records(channel);
  std::ofstream out(path);
  if (!out) throw DataError("cannot open prediction log for writing: " + path);
  out << "# channel=" << channel << "\n";
  out << "slot,horizon,predicted,realized,sq_error\n";
  for (const auto& r : recs) {
    out << r.slot << ',' << r.step << ',' << format_double(r.predicted) << ',';
    if (r.realized_known)
      out << format_double(r.realized) << ',' << format_double(r.sq_error);
    else
      out << "nan,nan";
    out << "\n";
  }
  if (!out) throw DataError("failed while writing prediction log: " + path);
}

}  // namespace dmca::cpm
