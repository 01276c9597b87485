#pragma once

#include <cstddef>
#include <vector>

namespace nomafl {

struct Position {
  double x_m = 0.0;
  double y_m = 0.0;

  double distance() const;
};

// Static device state. The residual buffer is the only part that changes
// between rounds, and only for the owning user.
struct UserProfile {
  int user_id = 0;
  Position position;
  std::size_t shard_index = 0;
  std::size_t dataset_size = 1;
  double compute_speed = 1.0;  // samples per second
  std::vector<double> residual;
};

}  // namespace nomafl
