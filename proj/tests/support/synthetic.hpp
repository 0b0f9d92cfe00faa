#pragma once

#include <vector>

#include "hddpc/dataset.hpp"
#include "hddpc/rom.hpp"

// Exact H-LIP walking data for planner tests: closed-form flows, zero CoP,
// stepping chosen by a position-deadbeat rule toward each cycle's orbit so
// the unstable step-to-step mode stays bounded. Optional jitter on the
// placements enriches the step-to-step columns.

namespace hddpc::testsupport {

struct CyclePlan {
  double v = 0.1;      // desired forward speed, m/s
  double w = 0.2;      // step width, m
  double t_step = 1.0; // step duration, s
};

Dataset make_hlip_dataset(const LipParams& lip, const std::vector<CyclePlan>& cycles,
                          int n_fine, double lambda_jitter, unsigned long seed);

}  // namespace hddpc::testsupport
