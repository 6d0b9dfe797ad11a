#include "sieve/hal/virtual_clock.hpp"

#include <cmath>

#include "sieve/errors.hpp"

namespace sieve::hal {

void VirtualClock::set_speed(double speed) {
  if (!(speed >= 0.0) || !std::isfinite(speed)) throw DomainError("clock speed must be >= 0");
  speed_ = speed;
}

Millis VirtualClock::advance(Millis dt) {
  if (dt.count() < 0) throw DomainError("cannot advance the clock by a negative interval");
  now_ += dt;
  return now_;
}

}  // namespace sieve::hal
