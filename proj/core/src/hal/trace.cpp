#include "sieve/hal/trace.hpp"

#include <ostream>
#include <sstream>

namespace sieve::hal {

void TraceLog::record(Millis now, std::string device, std::string command, std::string value) {
  lines_.push_back({now.count(), std::move(device), std::move(command), std::move(value)});
}

std::string format_line(const TraceLine& line) {
  return std::to_string(line.now_ms) + '\t' + line.device + '\t' + line.command + '\t' + line.value;
}

void TraceLog::write(std::ostream& os) const {
  for (const auto& l : lines_) os << format_line(l) << '\n';
}

std::string TraceLog::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

}  // namespace sieve::hal
