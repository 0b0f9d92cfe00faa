#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hddpc/hankel.hpp"
#include "hddpc/jsonio.hpp"

// Dataset file format (schema "hddpc-dataset/1").
//
// Trajectories are chronological with the walk starting in left stance:
// stance_L[0] is the lead-in step, stance_R[i] follows stance_L[i], and
// stance_L[i+1] follows stance_R[i]. Transitions interleave the same way:
// s2s_L2R[i] ends stance_L[i], s2s_R2L[i] ends stance_R[i]. Channel order is
// (x, y) per sample throughout.

namespace hddpc {

struct S2SSample {
  Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
  double t_step = 1.0;  // duration of the step entered by this transition
  Eigen::Vector2d pre_impact_com = Eigen::Vector2d::Zero();
};

struct Dataset {
  double delta_tau = 0.02;
  std::vector<Trajectory> stance_left;
  std::vector<Trajectory> stance_right;
  std::vector<S2SSample> s2s_l2r;
  std::vector<S2SSample> s2s_r2l;

  const std::vector<Trajectory>& stance(StanceSide s) const {
    return s == StanceSide::Left ? stance_left : stance_right;
  }

  // Chronological interleave of the transition lists (L2R first).
  std::vector<S2SSample> chronological_transitions() const;
};

Json dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const Json& j);

void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

}  // namespace hddpc
