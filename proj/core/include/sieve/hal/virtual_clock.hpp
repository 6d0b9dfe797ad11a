#pragma once

#include <chrono>

namespace sieve::hal {

using Millis = std::chrono::milliseconds;

// Simulated time. Everything timed in the machine reads this clock; wall time
// only enters through the optional realtime pacing of the executor.
class VirtualClock {
 public:
  VirtualClock() = default;
  explicit VirtualClock(double speed) : speed_(speed) {}

  Millis now() const { return now_; }
  // Realtime multiplier; 0 runs as fast as possible.
  double speed() const { return speed_; }
  void set_speed(double speed);

  // Throws DomainError for a negative interval.
  Millis advance(Millis dt);

  bool operator==(const VirtualClock&) const = default;

 private:
  Millis now_{0};
  double speed_{0.0};
};

}  // namespace sieve::hal
