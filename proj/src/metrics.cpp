#include "drl/metrics.hpp"

#include <stdexcept>

namespace drl {

double portability_phi(std::span<const double> eps_values) {
    if (eps_values.empty()) throw std::invalid_argument("phi: need at least one value");
    double inv_sum = 0.0;
    for (double eps : eps_values) {
        if (eps == 0.0) return 0.0;
        if (eps < 0.0) throw std::invalid_argument("phi: negative throughput");
        inv_sum += 1.0 / eps;
    }
    return static_cast<double>(eps_values.size()) / inv_sum;
}

double eps_per_watt(double eps, double total_power_w) {
    if (total_power_w <= 0.0) throw std::invalid_argument("eps_per_watt: power must be > 0");
    return eps / total_power_w;
}

}  // namespace drl
