#ifndef DMCA_ENV_CHANNEL_HPP
#define DMCA_ENV_CHANNEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace dmca::env {

// Radio constants. The total band and power are split evenly over channels.
struct ChannelConfig {
  int channels = 25;            // M
  double bandwidth_hz = 25.0 * 78125.0;  // total band B
  double power_mw = 19952.62314968879;   // total transmit power (43 dBm)
  double noise_mw = 3.1622776601683794e-13;  // per-channel noise power (-125 dBm)

  double channel_bandwidth_hz() const { return bandwidth_hz / channels; }
  double channel_power_mw() const { return power_mw / channels; }
  void validate() const;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

// Transmit rate of a channel with the given gain magnitude, in bits/s.
double channel_rate(double gain, const ChannelConfig& cfg);

// Per-slot channel-gain magnitudes plus recording metadata.
struct ChannelTrace {
  Eigen::MatrixXd gains;  // slots x channels, nonnegative magnitudes
  double sample_rate_hz = 1.0;  // fs
  double carrier_hz = 0.0;      // fc
  double speed_kmh = 0.0;       // v

  int slots() const { return static_cast<int>(gains.rows()); }
  int channels() const { return static_cast<int>(gains.cols()); }
  double slot_seconds() const { return sample_rate_hz > 0 ? 1.0 / sample_rate_hz : 1.0; }
  void validate() const;
};

struct SinusoidParams {
  int paths = 8;           // sinusoids summed per channel
  double amplitude = 1.0;  // envelope scale; per-path amplitude is amplitude/sqrt(paths)
  double noise_std = 0.0;  // additive measurement noise on the magnitude
};

struct ArParams {
  double phi = 0.9;        // AR(1) coefficient in (0,1); 0 gives white nonnegative noise
  double noise_std = 0.2;
  double mean = 1.0;       // stationary mean target
};

ChannelTrace generate_sinusoid_trace(int slots, int channels, double sample_rate_hz,
                                     double carrier_hz, double speed_kmh,
                                     const SinusoidParams& p, std::uint64_t seed);
ChannelTrace generate_ar_trace(int slots, int channels, double sample_rate_hz,
                               const ArParams& p, std::uint64_t seed);

// Trace file: '#' metadata comments (fs=, fc=, v=), header `slot,h_1,...,h_M`,
// then one row per slot of linear magnitudes. Complex entries of the form
// a+bi / a+bj are reduced to their magnitude on read.
void save_trace(const std::string& path, const ChannelTrace& trace,
                const std::vector<std::string>& extra_comments = {});
ChannelTrace load_trace(const std::string& path);

}  // namespace dmca::env

#endif
