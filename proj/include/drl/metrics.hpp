#pragma once

#include <span>

namespace drl {

// Harmonic-mean performance portability over a set of throughput figures.
// Any zero (unsupported assignment or platform) collapses the score to 0.
double portability_phi(std::span<const double> eps_values);

double eps_per_watt(double eps, double total_power_w);

}  // namespace drl
