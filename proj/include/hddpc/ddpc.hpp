#pragma once

#include <Eigen/Core>

#include "hddpc/hankel.hpp"
#include "hddpc/qp.hpp"

// Single-window data-driven predictive controller with a fixed contact
// schedule (the comparison baseline) plus an exact-LTI test bed for the
// fundamental-lemma machinery.

namespace hddpc {

struct LtiSystem {
  Eigen::MatrixXd A;  // beta x beta
  Eigen::MatrixXd B;  // beta x kappa
  Eigen::MatrixXd M;  // nu x beta
  Eigen::MatrixXd D;  // nu x kappa
};

// Exact rollout; inputs one column per step, returns outputs likewise.
Eigen::MatrixXd simulate_lti(const LtiSystem& sys, const Eigen::VectorXd& x0,
                             const Eigen::MatrixXd& inputs);

struct DdpcConfig {
  int t_ini = 4;
  int n = 46;
  Eigen::MatrixXd Q;  // nu x nu PSD output weight
  Eigen::MatrixXd R;  // kappa x kappa PSD input weight
  double psi_gamma = 1e-2;
  double psi_sigma = 1e4;
  Eigen::VectorXd input_lower;  // kappa, -kInf when absent
  Eigen::VectorXd input_upper;  // kappa, +kInf when absent
};

// Assembled program with the block layout [gamma; sigma; mu; eta].
struct DdpcProblem {
  QpProblem qp;
  int kappa = 0;
  int nu = 0;
  int t_ini = 0;
  int n = 0;
  Eigen::Index columns = 0;

  Eigen::Index gamma_offset() const { return 0; }
  Eigen::Index sigma_offset() const { return columns; }
  Eigen::Index mu_offset() const { return columns + (kappa + nu) * (t_ini + n); }
  Eigen::Index eta_offset() const { return mu_offset() + kappa * n; }
};

DdpcProblem ddpc_assemble(const Partition& hankels, const Eigen::MatrixXd& mu_ini,
                          const Eigen::MatrixXd& eta_ini, const Eigen::MatrixXd& r_mu,
                          const Eigen::MatrixXd& r_eta, const DdpcConfig& config);

struct DdpcPlan {
  Eigen::MatrixXd mu;   // kappa x n
  Eigen::MatrixXd eta;  // nu x n
  Eigen::VectorXd gamma;
  Eigen::VectorXd sigma;
  QpSolution diagnostics;
};

DdpcPlan ddpc_plan(const DdpcProblem& problem, const QpSettings& settings = {});

}  // namespace hddpc
