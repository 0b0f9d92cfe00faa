#include "hddpc/dataset.hpp"

#include "hddpc/errors.hpp"

namespace hddpc {

namespace {

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    Json sample = Json::array();
    for (Eigen::Index a = 0; a < m.rows(); ++a) sample.push_back(m(a, k));
    rows.push_back(sample);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::IoError, std::string(what) + " must be a nonempty array");
  const Eigen::Index cols = static_cast<Eigen::Index>(j.size());
  const Eigen::Index rows = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    const Json& sample = j[static_cast<size_t>(k)];
    if (static_cast<Eigen::Index>(sample.size()) != rows) {
      throw Error(ErrorKind::IoError, std::string(what) + " has ragged samples");
    }
    for (Eigen::Index a = 0; a < rows; ++a) m(a, k) = sample[static_cast<size_t>(a)].get<double>();
  }
  return m;
}

Json trajectory_to_json(const Trajectory& t) {
  Json j;
  j["duration"] = t.duration;
  j["step_length"] = Json::array({t.step_length(0), t.step_length(1)});
  j["inputs"] = matrix_to_json(t.inputs);
  j["outputs"] = matrix_to_json(t.outputs);
  return j;
}

Trajectory trajectory_from_json(const Json& j, StanceSide side, double delta_tau) {
  Trajectory t;
  t.duration = j.at("duration").get<double>();
  t.step_length = Eigen::Vector2d(j.at("step_length")[0].get<double>(),
                                  j.at("step_length")[1].get<double>());
  t.inputs = matrix_from_json(j.at("inputs"), "inputs");
  t.outputs = matrix_from_json(j.at("outputs"), "outputs");
  if (t.inputs.cols() != t.outputs.cols()) {
    throw Error(ErrorKind::IoError, "inputs and outputs have differing sample counts");
  }
  t.stance_side = side;
  t.phase_grid.resize(static_cast<size_t>(t.outputs.cols()));
  for (size_t k = 0; k < t.phase_grid.size(); ++k) t.phase_grid[k] = delta_tau * static_cast<double>(k);
  return t;
}

Json s2s_to_json(const S2SSample& s) {
  Json j;
  j["lambda"] = Json::array({s.lambda(0), s.lambda(1)});
  j["T"] = s.t_step;
  j["pre_impact_com"] = Json::array({s.pre_impact_com(0), s.pre_impact_com(1)});
  return j;
}

S2SSample s2s_from_json(const Json& j) {
  S2SSample s;
  s.lambda = Eigen::Vector2d(j.at("lambda")[0].get<double>(), j.at("lambda")[1].get<double>());
  s.t_step = j.at("T").get<double>();
  s.pre_impact_com = Eigen::Vector2d(j.at("pre_impact_com")[0].get<double>(),
                                     j.at("pre_impact_com")[1].get<double>());
  return s;
}

}  // namespace

std::vector<S2SSample> Dataset::chronological_transitions() const {
  std::vector<S2SSample> out;
  const size_t count = s2s_l2r.size() + s2s_r2l.size();
  out.reserve(count);
  size_t il = 0, ir = 0;
  while (il < s2s_l2r.size() || ir < s2s_r2l.size()) {
    if (il < s2s_l2r.size()) out.push_back(s2s_l2r[il++]);
    if (ir < s2s_r2l.size()) out.push_back(s2s_r2l[ir++]);
  }
  return out;
}

Json dataset_to_json(const Dataset& dataset) {
  Json j;
  j["schema"] = "hddpc-dataset/1";
  j["delta_tau"] = dataset.delta_tau;
  Json blocks;
  Json l = Json::array(), r = Json::array(), l2r = Json::array(), r2l = Json::array();
  for (const auto& t : dataset.stance_left) l.push_back(trajectory_to_json(t));
  for (const auto& t : dataset.stance_right) r.push_back(trajectory_to_json(t));
  for (const auto& s : dataset.s2s_l2r) l2r.push_back(s2s_to_json(s));
  for (const auto& s : dataset.s2s_r2l) r2l.push_back(s2s_to_json(s));
  blocks["stance_L"] = l;
  blocks["stance_R"] = r;
  blocks["s2s_L2R"] = l2r;
  blocks["s2s_R2L"] = r2l;
  j["blocks"] = blocks;
  return j;
}

Dataset dataset_from_json(const Json& j) {
  if (!j.contains("schema") || j.at("schema").get<std::string>() != "hddpc-dataset/1") {
    throw Error(ErrorKind::IoError, "unknown dataset schema");
  }
  Dataset d;
  d.delta_tau = j.at("delta_tau").get<double>();
  const Json& blocks = j.at("blocks");
  for (const auto& t : blocks.at("stance_L")) {
    d.stance_left.push_back(trajectory_from_json(t, StanceSide::Left, d.delta_tau));
  }
  for (const auto& t : blocks.at("stance_R")) {
    d.stance_right.push_back(trajectory_from_json(t, StanceSide::Right, d.delta_tau));
  }
  for (const auto& s : blocks.at("s2s_L2R")) d.s2s_l2r.push_back(s2s_from_json(s));
  for (const auto& s : blocks.at("s2s_R2L")) d.s2s_r2l.push_back(s2s_from_json(s));
  return d;
}

void save_dataset(const std::string& path, const Dataset& dataset) {
  write_json_file(path, dataset_to_json(dataset));
}

Dataset load_dataset(const std::string& path) { return dataset_from_json(read_json_file(path)); }

}  // namespace hddpc
