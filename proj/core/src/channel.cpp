#include "nomafl/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "nomafl/error.hpp"

namespace nomafl {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string("channel.") + name + " must be positive and finite");
  }
}

}  // namespace

double Position::distance() const { return std::hypot(x_m, y_m); }

void ChannelParams::validate() const {
  require_positive(wavelength_m, "wavelength_m");
  require_positive(pathloss_exponent, "pathloss_exponent");
  require_positive(antenna_gain, "antenna_gain");
  require_positive(uplink_bandwidth_hz, "uplink_bandwidth_hz");
  require_positive(downlink_bandwidth_hz, "downlink_bandwidth_hz");
  require_positive(tx_power_w, "tx_power_w");
  require_positive(ps_power_w, "ps_power_w");
  require_positive(slot_duration_s, "slot_duration_s");
  if (!std::isfinite(noise_density_dbm_hz)) {
    throw DomainError("channel.noise_density_dbm_hz must be finite");
  }
  if (pathloss_exponent < 2.0) {
    throw DomainError("channel.pathloss_exponent must be >= 2");
  }
  if (!(sic_degradation > 1.0)) {
    throw DomainError("channel.sic_degradation must be > 1");
  }
}

double noise_power_w(double density_dbm_hz, double bandwidth_hz) {
  return std::pow(10.0, (density_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
}

double ChannelParams::uplink_noise_w() const {
  return noise_power_w(noise_density_dbm_hz, uplink_bandwidth_hz);
}

double ChannelParams::downlink_noise_w() const {
  return noise_power_w(noise_density_dbm_hz, downlink_bandwidth_hz);
}

double path_loss(double distance_m, const ChannelParams& params) {
  if (!(distance_m > 0.0)) {
    throw DomainError("path_loss: distance must be positive");
  }
  return std::sqrt(params.antenna_gain) * params.wavelength_m /
         (4.0 * std::numbers::pi * std::pow(distance_m, params.pathloss_exponent / 2.0));
}

std::complex<double> draw_small_scale(Rng& rng) {
  std::normal_distribution<double> component(0.0, std::sqrt(0.5));
  const double re = component(rng);
  const double im = component(rng);
  return {re, im};
}

RoundChannels realize_round_channels(std::span<const UserProfile> users,
                                     const ChannelParams& params, std::uint64_t round_index,
                                     std::uint64_t seed) {
  RoundChannels out;
  out.uplink.reserve(users.size());
  out.downlink_gain.reserve(users.size());
  for (const auto& user : users) {
    const auto id = static_cast<std::uint64_t>(user.user_id);
    const double large = path_loss(user.position.distance(), params);

    Rng up = make_stream(seed, StreamTag::kUplinkFading, id, round_index);
    ChannelRealization r;
    r.user_id = user.user_id;
    r.round_index = round_index;
    r.large_scale = large;
    r.small_scale = draw_small_scale(up);
    r.power_gain = large * large * std::norm(r.small_scale);
    out.uplink.push_back(r);

    Rng down = make_stream(seed, StreamTag::kDownlinkFading, id, round_index);
    out.downlink_gain.push_back(large * large * std::norm(draw_small_scale(down)));
  }
  return out;
}

}  // namespace nomafl
