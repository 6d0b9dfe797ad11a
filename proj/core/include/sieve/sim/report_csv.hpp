#pragma once

#include <string>

#include "sieve/sim/extinction.hpp"

namespace sieve::sim {

// profile,soil,sample,iteration,eggs,pct,cum_pct; one row per sample per
// iteration. Samples are numbered across replicates.
std::string per_iteration_csv(const RecoveryReport& report);

// profile,soil,iteration,n,mean_pct,sd_pct,mean_cum_pct,sd_cum_pct; one row
// per iteration, the layout of one bar-chart panel.
std::string summary_csv(const RecoveryReport& report);

// Fixed six-decimal formatting so output is byte-stable.
std::string format_number(double v);

}  // namespace sieve::sim
