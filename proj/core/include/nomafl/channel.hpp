#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "nomafl/rng.hpp"
#include "nomafl/user_profile.hpp"

namespace nomafl {

struct ChannelParams {
  double wavelength_m = 0.333;
  double pathloss_exponent = 3.0;
  double antenna_gain = 1.0;
  double noise_density_dbm_hz = -174.0;
  double uplink_bandwidth_hz = 5e6;
  double downlink_bandwidth_hz = 10e6;
  double tx_power_w = 0.1;
  double ps_power_w = 2.0;
  double slot_duration_s = 0.5;
  double sic_degradation = 2.0;

  // Throws DomainError naming the first invalid field.
  void validate() const;

  double uplink_noise_w() const;
  double downlink_noise_w() const;
};

// Thermal noise power in watts over `bandwidth_hz` for a density in dBm/Hz.
double noise_power_w(double density_dbm_hz, double bandwidth_hz);

struct ChannelRealization {
  int user_id = 0;
  std::uint64_t round_index = 0;
  double large_scale = 0.0;  // amplitude L_k
  std::complex<double> small_scale;
  double power_gain = 0.0;  // L_k^2 |h_0|^2
};

struct RoundChannels {
  std::vector<ChannelRealization> uplink;
  std::vector<double> downlink_gain;  // |h_k^dl|^2, same order as uplink
};

// Free-space amplitude gain sqrt(delta) * lambda / (4 pi d^(alpha/2)).
double path_loss(double distance_m, const ChannelParams& params);

// CN(0, 1) sample: real and imaginary parts N(0, 1/2).
std::complex<double> draw_small_scale(Rng& rng);

// One uplink and one downlink realization per user. Each user's draws come
// from streams keyed by (seed, user_id, round_index) only.
RoundChannels realize_round_channels(std::span<const UserProfile> users,
                                     const ChannelParams& params, std::uint64_t round_index,
                                     std::uint64_t seed);

}  // namespace nomafl
