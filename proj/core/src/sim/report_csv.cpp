#include "sieve/sim/report_csv.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace sieve::sim {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string per_iteration_csv(const RecoveryReport& report) {
  std::ostringstream out;
  out << "profile,soil,sample,iteration,eggs,pct,cum_pct\n";
  for (const auto& s : report.samples) {
    const int sample = s.replicate * report.samples_n + s.sample + 1;
    for (std::size_t i = 0; i < s.eggs.size(); ++i) {
      out << report.method << ',' << report.soil << ',' << sample << ',' << i + 1 << ',' << s.eggs[i] << ','
          << format_number(s.pct[i]) << ',' << format_number(s.cum_pct[i]) << '\n';
    }
  }
  return out.str();
}

std::string summary_csv(const RecoveryReport& report) {
  const auto n = std::count_if(report.samples.begin(), report.samples.end(),
                               [](const SampleRecovery& s) { return s.total_recovered > 0; });
  std::ostringstream out;
  out << "profile,soil,iteration,n,mean_pct,sd_pct,mean_cum_pct,sd_cum_pct\n";
  for (const auto& it : report.per_iteration) {
    out << report.method << ',' << report.soil << ',' << it.iteration << ',' << n << ','
        << format_number(it.mean_pct) << ',' << format_number(it.sd_pct) << ',' << format_number(it.mean_cum_pct)
        << ',' << format_number(it.sd_cum_pct) << '\n';
  }
  return out.str();
}

}  // namespace sieve::sim
