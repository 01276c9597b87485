#include "nomafl/noma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nomafl/error.hpp"

namespace nomafl {

std::vector<ReceivedPower> sic_order(std::span<const ReceivedPower> powers) {
  if (powers.empty()) {
    throw DomainError("sic_order: empty cohort");
  }
  std::vector<ReceivedPower> ordered(powers.begin(), powers.end());
  for (const auto& p : ordered) {
    if (!(p.power_w >= 0.0)) {
      throw DomainError("sic_order: negative received power");
    }
  }
  std::sort(ordered.begin(), ordered.end(), [](const ReceivedPower& a, const ReceivedPower& b) {
    if (a.power_w != b.power_w) return a.power_w > b.power_w;
    return a.user_id < b.user_id;
  });
  return ordered;
}

std::vector<double> noma_rates(std::span<const double> ordered_powers_w, double noise_w,
                               double tau) {
  if (!(noise_w > 0.0)) {
    throw DomainError("noma_rates: noise power must be positive");
  }
  if (!(tau >= 1.0)) {
    throw DomainError("noma_rates: tau must be >= 1");
  }
  for (double p : ordered_powers_w) {
    if (!(p >= 0.0)) throw DomainError("noma_rates: negative power");
  }
  std::vector<double> rates(ordered_powers_w.size());
  // Suffix sums give each user's residual interference after SIC.
  double interference = 0.0;
  for (std::size_t i = ordered_powers_w.size(); i-- > 0;) {
    rates[i] = std::log2(1.0 + ordered_powers_w[i] / (tau * (interference + noise_w)));
    interference += ordered_powers_w[i];
  }
  return rates;
}

double tdma_rate(double power_w, double noise_w, double tau) {
  const double p = power_w;
  return noma_rates(std::span<const double>(&p, 1), noise_w, tau).front();
}

std::uint64_t bit_budget(double rate_bps_hz, double bandwidth_hz, double slot_s) {
  const double bits = std::floor(bandwidth_hz * rate_bps_hz * slot_s);
  if (!(bits > 0.0)) return 0;
  return static_cast<std::uint64_t>(bits);
}

std::vector<RateAllocation> allocate_noma(std::span<const ReceivedPower> powers,
                                          const ChannelParams& params) {
  const auto ordered = sic_order(powers);
  std::vector<double> p(ordered.size());
  std::transform(ordered.begin(), ordered.end(), p.begin(),
                 [](const ReceivedPower& r) { return r.power_w; });
  const auto rates = noma_rates(p, params.uplink_noise_w(), params.sic_degradation);

  std::vector<RateAllocation> out(ordered.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    out[i].user_id = ordered[i].user_id;
    out[i].sic_position = static_cast<int>(i) + 1;
    out[i].rate_bps_hz = rates[i];
    out[i].bit_budget = bit_budget(rates[i], params.uplink_bandwidth_hz, params.slot_duration_s);
    out[i].received_power_w = ordered[i].power_w;
  }
  return out;
}

double downlink_time(std::uint64_t param_count, std::span<const double> downlink_gains,
                     const ChannelParams& params) {
  if (param_count == 0) {
    throw DomainError("downlink_time: parameter count must be positive");
  }
  if (downlink_gains.empty()) {
    throw DomainError("downlink_time: no receivers");
  }
  const double payload = 32.0 * static_cast<double>(param_count);
  const double noise = params.downlink_noise_w();
  double worst = 0.0;
  for (double gain : downlink_gains) {
    const double se = std::log2(1.0 + params.ps_power_w * gain / noise);
    if (!(se > 0.0)) {
      throw DomainError("downlink_time: zero downlink capacity");
    }
    worst = std::max(worst, payload / (params.downlink_bandwidth_hz * se));
  }
  return worst;
}

double effective_capacity(double rate_bps_hz, double bandwidth_hz, double slot_s,
                          std::size_t dataset_size) {
  if (dataset_size == 0) {
    throw DomainError("effective_capacity: empty dataset");
  }
  return bandwidth_hz * rate_bps_hz * slot_s / static_cast<double>(dataset_size);
}

double jain_index(std::span<const double> values) {
  if (values.empty()) {
    throw DomainError("jain_index: empty input");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) throw DomainError("jain_index: negative value");
    sum += v;
    sum_sq += v * v;
  }
  if (sum_sq == 0.0) {
    throw DomainError("jain_index: all values are zero");
  }
  const double n = static_cast<double>(values.size());
  return (sum * sum) / (n * sum_sq);
}

}  // namespace nomafl
