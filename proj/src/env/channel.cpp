#include "dmca/env/channel.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "dmca/util/csv.hpp"
#include "dmca/util/errors.hpp"

namespace dmca::env {

namespace {
constexpr double kLightSpeed = 299792458.0;
}

void ChannelConfig::validate() const {
  if (channels < 1) throw ConfigError("channel count must be positive");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth must be positive");
  if (!(power_mw > 0.0)) throw ConfigError("transmit power must be positive");
  if (!(noise_mw > 0.0)) throw ConfigError("noise power must be positive");
}

double channel_rate(double gain, const ChannelConfig& cfg) {
  const double snr = gain * gain * cfg.channel_power_mw() / cfg.noise_mw;
  return cfg.channel_bandwidth_hz() * std::log2(1.0 + snr);
}

void ChannelTrace::validate() const {
  if (gains.rows() < 1 || gains.cols() < 1)
    throw DataError("channel trace is empty");
  if (!gains.allFinite()) throw DataError("channel trace has non-finite gains");
  if ((gains.array() < 0.0).any())
    throw DataError("channel trace has negative gains");
  if (!(sample_rate_hz > 0.0))
    throw DataError("channel trace needs a positive sample rate");
}

ChannelTrace generate_sinusoid_trace(int slots, int channels, double sample_rate_hz,
                                     double carrier_hz, double speed_kmh,
                                     const SinusoidParams& p, std::uint64_t seed) {
  if (slots < 1 || channels < 1) throw ConfigError("trace dimensions must be positive");
  if (p.paths < 1) throw ConfigError("sinusoid path count must be positive");
  ChannelTrace trace;
  trace.sample_rate_hz = sample_rate_hz;
  trace.carrier_hz = carrier_hz;
  trace.speed_kmh = speed_kmh;
  trace.gains.resize(slots, channels);

  const double doppler_hz = (speed_kmh / 3.6) * carrier_hz / kLightSpeed;
  const double dt = 1.0 / sample_rate_hz;
  const double path_amp = p.amplitude / std::sqrt(static_cast<double>(p.paths));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (int m = 0; m < channels; ++m) {
    std::vector<double> freq(p.paths), phase(p.paths);
    for (int j = 0; j < p.paths; ++j) {
      freq[j] = doppler_hz * std::cos(uni(rng));
      phase[j] = uni(rng);
    }
    for (int t = 0; t < slots; ++t) {
      std::complex<double> sum{0.0, 0.0};
      for (int j = 0; j < p.paths; ++j) {
        const double arg = 2.0 * std::numbers::pi * freq[j] * t * dt + phase[j];
        sum += std::polar(path_amp, arg);
      }
      double g = std::abs(sum);
      if (p.noise_std > 0.0) g = std::max(0.0, g + p.noise_std * noise(rng));
      trace.gains(t, m) = g;
    }
  }
  return trace;
}

ChannelTrace generate_ar_trace(int slots, int channels, double sample_rate_hz,
                               const ArParams& p, std::uint64_t seed) {
  if (slots < 1 || channels < 1) throw ConfigError("trace dimensions must be positive");
  if (p.phi < 0.0 || p.phi >= 1.0) throw ConfigError("AR coefficient must lie in [0,1)");
  ChannelTrace trace;
  trace.sample_rate_hz = sample_rate_hz;
  trace.gains.resize(slots, channels);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, p.noise_std);
  const double drive = (1.0 - p.phi) * p.mean;
  for (int m = 0; m < channels; ++m) {
    double g = p.mean;
    for (int t = 0; t < slots; ++t) {
      g = std::max(0.0, p.phi * g + drive + noise(rng));
      trace.gains(t, m) = g;
    }
  }
  return trace;
}

namespace {

double parse_gain_cell(const std::string& cell) {
  // Accept either a plain magnitude or a complex literal like 0.3-0.4i.
  const bool complex_form =
      cell.find('i') != std::string::npos || cell.find('j') != std::string::npos;
  if (!complex_form) {
    const double g = parse_double(cell);
    if (g < 0.0) throw DataError("negative gain magnitude in trace");
    return g;
  }
  std::string body = cell;
  body.erase(std::remove_if(body.begin(), body.end(),
                            [](char c) { return c == 'i' || c == 'j' || c == ' '; }),
             body.end());
  // Split at the sign that separates real and imaginary parts (skip a leading
  // sign and signs inside exponents).
  std::size_t split = std::string::npos;
  for (std::size_t k = 1; k < body.size(); ++k) {
    if ((body[k] == '+' || body[k] == '-') &&
        body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
    }
  }
  if (split == std::string::npos) {
    // Pure imaginary value.
    return std::abs(parse_double(body.empty() ? "1" : body));
  }
  const double re = parse_double(body.substr(0, split));
  const double im = parse_double(body.substr(split));
  return std::hypot(re, im);
}

}  // namespace

void save_trace(const std::string& path, const ChannelTrace& trace,
                const std::vector<std::string>& extra_comments) {
  trace.validate();
  std::ofstream out(path);
  if (!out) throw DataError("cannot open trace file for writing: " + path);
  out << "# fs=" << format_double(trace.sample_rate_hz) << "\n";
  out << "# fc=" << format_double(trace.carrier_hz) << "\n";
  out << "# v=" << format_double(trace.speed_kmh) << "\n";
  for (const auto& c : extra_comments) out << "# " << c << "\n";
  out << "slot";
  for (int m = 0; m < trace.channels(); ++m) out << ",h_" << (m + 1);
  out << "\n";
  for (int t = 0; t < trace.slots(); ++t) {
    out << t;
    for (int m = 0; m < trace.channels(); ++m)
      out << ',' << format_double(trace.gains(t, m));
    out << "\n";
  }
  if (!out) throw DataError("failed while writing trace file: " + path);
}

ChannelTrace load_trace(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw MissingArtifactError("channel trace not found: " + path);
  const CsvFile csv = read_csv(path);
  ChannelTrace trace;
  for (const auto& comment : csv.comments) {
    std::istringstream line(comment);
    std::string token;
    while (line >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "fs") trace.sample_rate_hz = parse_double(value);
      else if (key == "fc") trace.carrier_hz = parse_double(value);
      else if (key == "v") trace.speed_kmh = parse_double(value);
    }
  }
  if (csv.header.empty() || csv.header.front() != "slot")
    throw DataError("trace file lacks the slot header: " + path);
  const int channels = static_cast<int>(csv.header.size()) - 1;
  if (channels < 1) throw DataError("trace file has no channel columns: " + path);
  const int slots = static_cast<int>(csv.rows.size());
  if (slots < 1) throw DataError("trace file has no rows: " + path);
  trace.gains.resize(slots, channels);
  for (int t = 0; t < slots; ++t) {
    const auto& row = csv.rows[t];
    if (static_cast<int>(row.size()) != channels + 1)
      throw DataError("ragged row in trace file: " + path);
    for (int m = 0; m < channels; ++m)
      trace.gains(t, m) = parse_gain_cell(row[m + 1]);
  }
  trace.validate();
  return trace;
}

}  // namespace dmca::env
