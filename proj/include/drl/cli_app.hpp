#pragma once

#include <string>

#include "drl/composer.hpp"
#include "drl/config.hpp"

namespace drl {

// Table-I-shaped per-device/per-combination latency table, fixed-width text.
std::string render_matrix_table(const AssignmentMatrix& matrix);

// CSV grid of T_itr over every (RM device, Learner device) pair; infeasible
// pairs print "inf".
std::string render_titr_grid(const AssignmentMatrix& matrix, const LinkTable& links,
                             const WorkloadSpec& workload, const std::string& host_device,
                             bool comm_reduction);

// Exit codes: 0 success, 1 usage/config error, 2 infeasibility, 3 runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace drl
