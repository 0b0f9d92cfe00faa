#include "hddpc/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hddpc/bezier.hpp"
#include "hddpc/errors.hpp"
#include "hddpc/log.hpp"

namespace hddpc {

HankelMatrix shrink_select(const HankelMatrix& h, double tau, int t_ini, int max_n,
                           int block_dim) {
  if (tau < 0.0 || tau >= 1.0) throw Error(ErrorKind::OutOfRange, "tau must lie in [0, 1)");
  if (h.rows() != static_cast<Eigen::Index>(block_dim) * (t_ini + max_n)) {
    throw Error(ErrorKind::OutOfRange, "matrix rows do not match block_dim * (t_ini + max_n)");
  }
  const int offset = static_cast<int>(std::floor(max_n * tau));
  const int remaining = t_ini + max_n - offset;
  return select(static_cast<Eigen::Index>(block_dim) * offset,
                static_cast<Eigen::Index>(block_dim) * remaining, h);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_ini_window(
    const std::vector<GridSample>& history, int t_ini, const Eigen::Vector2d& lambda_last,
    int current_domain) {
  if (t_ini == 0) return {Eigen::MatrixXd(2, 0), Eigen::MatrixXd(2, 0)};
  if (static_cast<int>(history.size()) < t_ini) {
    throw Error(ErrorKind::InsufficientHistory, "history shorter than t_ini");
  }
  Eigen::MatrixXd mu(2, t_ini), eta(2, t_ini);
  const size_t start = history.size() - static_cast<size_t>(t_ini);
  for (int i = 0; i < t_ini; ++i) {
    const GridSample& s = history[start + static_cast<size_t>(i)];
    Eigen::Vector2d shift = Eigen::Vector2d::Zero();
    if (s.domain_index < current_domain) shift = lambda_last;
    mu.col(i) = s.mu - shift;
    eta.col(i) = s.eta - shift;
  }
  return {mu, eta};
}

namespace {

// Linear phase interpolation of a 2 x n_fine block onto the coarse grid.
Eigen::MatrixXd resample_coarse(const Eigen::MatrixXd& fine, int n_coarse) {
  const Eigen::Index n_fine = fine.cols();
  Eigen::MatrixXd out(fine.rows(), n_coarse);
  for (int k = 0; k < n_coarse; ++k) {
    const double pos = static_cast<double>(k) * static_cast<double>(n_fine) / n_coarse;
    const Eigen::Index i0 = std::min(static_cast<Eigen::Index>(pos), n_fine - 1);
    const Eigen::Index i1 = std::min(i0 + 1, n_fine - 1);
    const double w = pos - static_cast<double>(i0);
    out.col(k) = (1.0 - w) * fine.col(i0) + w * fine.col(i1);
  }
  return out;
}

struct ComposePair {
  const Trajectory* prev = nullptr;
  const Trajectory* cur = nullptr;
  Eigen::Vector2d lambda = Eigen::Vector2d::Zero();  // placement at the transition
};

std::vector<ComposePair> adjacent_pairs(const Dataset& dataset, StanceSide cur_side) {
  // Chronology: L[0], R[0], L[1], R[1], ... -> prev(R[i]) = L[i],
  // prev(L[i+1]) = R[i]. The placement into the current step is stored on
  // the current trajectory.
  std::vector<ComposePair> pairs;
  const auto& left = dataset.stance_left;
  const auto& right = dataset.stance_right;
  if (cur_side == StanceSide::Right) {
    const size_t count = std::min(left.size(), right.size());
    for (size_t i = 0; i < count; ++i) {
      pairs.push_back({&left[i], &right[i], right[i].step_length});
    }
  } else {
    const size_t count = std::min(right.size(), left.size() > 0 ? left.size() - 1 : 0);
    for (size_t i = 0; i < count; ++i) {
      pairs.push_back({&right[i], &left[i + 1], left[i + 1].step_length});
    }
  }
  return pairs;
}

HankelMatrix compose_slot(const std::vector<ComposePair>& pairs, Channel channel, bool tail_fine,
                          bool body_fine, int n_coarse, int t_ini) {
  std::vector<Eigen::MatrixXd> prev_blocks, cur_blocks;
  std::vector<Eigen::VectorXd> lambdas;
  for (const auto& p : pairs) {
    Eigen::MatrixXd prev = p.prev->channel(channel);
    Eigen::MatrixXd cur = p.cur->channel(channel);
    if (!tail_fine) prev = resample_coarse(prev, n_coarse);
    if (!body_fine) cur = resample_coarse(cur, n_coarse);
    prev_blocks.push_back(prev);
    cur_blocks.push_back(cur);
    lambdas.push_back(p.lambda);
  }
  return compose_domain_hankel(prev_blocks, cur_blocks, lambdas, t_ini);
}

Eigen::VectorXd s2s_mu_sample(const S2SSample& s) {
  Eigen::VectorXd v(3);
  v << s.lambda(0), s.lambda(1), s.t_step;
  return v;
}

void build_s2s_matrices(const Dataset& dataset, int t_ini_s2s, HankelMatrix& mu_l2r,
                        HankelMatrix& eta_l2r, HankelMatrix& mu_r2l, HankelMatrix& eta_r2l) {
  const std::vector<S2SSample> chrono = dataset.chronological_transitions();
  const int window = t_ini_s2s + 1;
  auto build = [&](bool want_l2r, HankelMatrix& mu_out, HankelMatrix& eta_out) {
    std::vector<Eigen::Index> ends;
    for (Eigen::Index e = window - 1; e < static_cast<Eigen::Index>(chrono.size()); ++e) {
      // Transitions interleave starting with L2R at index 0.
      const bool is_l2r = (e % 2) == 0;
      if (is_l2r == want_l2r) ends.push_back(e);
    }
    if (ends.empty()) {
      throw Error(ErrorKind::MissingTransitionData, "not enough transitions for an S2S window");
    }
    mu_out.block_dim = 3;
    mu_out.L = window;
    mu_out.column_mode = ColumnMode::Page;
    mu_out.data.resize(3 * window, static_cast<Eigen::Index>(ends.size()));
    eta_out.block_dim = 2;
    eta_out.L = window;
    eta_out.column_mode = ColumnMode::Page;
    eta_out.data.resize(2 * window, static_cast<Eigen::Index>(ends.size()));
    for (size_t c = 0; c < ends.size(); ++c) {
      for (int i = 0; i < window; ++i) {
        const S2SSample& s = chrono[static_cast<size_t>(ends[c]) - window + 1 + i];
        mu_out.data.block(3 * i, static_cast<Eigen::Index>(c), 3, 1) = s2s_mu_sample(s);
        eta_out.data.block(2 * i, static_cast<Eigen::Index>(c), 2, 1) = s.pre_impact_com;
      }
    }
  };
  build(true, mu_l2r, eta_l2r);
  build(false, mu_r2l, eta_r2l);
}

}  // namespace

HankelBank build_hankel_bank(const Dataset& dataset, const HddpcConfig& config) {
  HankelBank bank;
  bank.n_fine = config.samples_per_step;
  bank.n_coarse = config.samples_per_step_future;
  bank.t_ini = config.t_ini;
  bank.t_ini_s2s = config.t_ini_s2s;
  for (StanceSide side : {StanceSide::Left, StanceSide::Right}) {
    auto pairs = adjacent_pairs(dataset, side);
    if (pairs.empty()) {
      throw Error(ErrorKind::MissingTransitionData, "no adjacent step pairs for a stance side");
    }
    for (const auto& p : pairs) {
      if (p.cur->samples() != bank.n_fine || p.prev->samples() != bank.n_fine) {
        throw Error(ErrorKind::ShapeMismatch, "trajectory sample count != samples_per_step");
      }
    }
    HankelBank::Side& s = side == StanceSide::Left ? bank.left : bank.right;
    s.mu[0] = compose_slot(pairs, Channel::Input, true, true, bank.n_coarse, bank.t_ini);
    s.eta[0] = compose_slot(pairs, Channel::Output, true, true, bank.n_coarse, bank.t_ini);
    s.mu[1] = compose_slot(pairs, Channel::Input, true, false, bank.n_coarse, bank.t_ini);
    s.eta[1] = compose_slot(pairs, Channel::Output, true, false, bank.n_coarse, bank.t_ini);
    s.mu[2] = compose_slot(pairs, Channel::Input, false, false, bank.n_coarse, bank.t_ini);
    s.eta[2] = compose_slot(pairs, Channel::Output, false, false, bank.n_coarse, bank.t_ini);
  }
  build_s2s_matrices(dataset, bank.t_ini_s2s, bank.s2s_mu_l2r, bank.s2s_eta_l2r, bank.s2s_mu_r2l,
                     bank.s2s_eta_r2l);
  return bank;
}

OrbitReferences extract_reference(const GaitParams& gait, const LipParams& lip, int n_fine,
                                  int n_coarse) {
  OrbitReferences refs;
  refs.t_nominal = lip.t_ssp;
  PeriodicOrbit forward = hlip_periodic_orbit(gait.v_des, lip);
  const double width = gait.step_width;
  Period2Orbit lateral = hlip_period2_orbit(-width, width, lip);
  refs.lambda_l2r = Eigen::Vector2d(forward.step_size, -width);
  refs.lambda_r2l = Eigen::Vector2d(forward.step_size, width);
  refs.start_com_left = Eigen::Vector2d(forward.start.p, lateral.start_a.p);
  refs.start_vel_left = Eigen::Vector2d(forward.start.v, lateral.start_a.v);
  refs.start_com_right = Eigen::Vector2d(forward.start.p, lateral.start_b.p);
  refs.start_vel_right = Eigen::Vector2d(forward.start.v, lateral.start_b.v);
  auto sample_grid = [&](const HlipState& y_start, int n) {
    Eigen::MatrixXd out(2, n);
    for (int k = 0; k < n; ++k) {
      const double t = lip.t_ssp * static_cast<double>(k) / n;
      out(0, k) = hlip_flow(forward.start, t, lip).p;
      out(1, k) = hlip_flow(y_start, t, lip).p;
    }
    return out;
  };
  refs.fine_left = sample_grid(lateral.start_a, n_fine);
  refs.fine_right = sample_grid(lateral.start_b, n_fine);
  refs.coarse_left = sample_grid(lateral.start_a, n_coarse);
  refs.coarse_right = sample_grid(lateral.start_b, n_coarse);
  refs.pre_impact_left = Eigen::Vector2d(hlip_flow(forward.start, lip.t_ssp, lip).p,
                                         hlip_flow(lateral.start_a, lip.t_ssp, lip).p);
  refs.pre_impact_right = Eigen::Vector2d(hlip_flow(forward.start, lip.t_ssp, lip).p,
                                          hlip_flow(lateral.start_b, lip.t_ssp, lip).p);
  return refs;
}

namespace {

// Assembly scratch: triplet lists plus growing bound vectors.
struct Builder {
  std::vector<Eigen::Triplet<double>> p_trip, a_trip;
  std::vector<double> lb, ub;
  Eigen::VectorXd q;
  Eigen::Index rows = 0;

  explicit Builder(Eigen::Index n_vars) : q(Eigen::VectorXd::Zero(n_vars)) {}

  Eigen::Index new_row(double lo, double hi) {
    lb.push_back(lo);
    ub.push_back(hi);
    return rows++;
  }
  void coeff(Eigen::Index row, Eigen::Index col, double v) {
    if (v != 0.0) a_trip.emplace_back(row, col, v);
  }
  void quad(Eigen::Index i, double w) {
    if (w != 0.0) p_trip.emplace_back(i, i, 2.0 * w);
  }
};

}  // namespace

AssembledPlan hddpc_assemble(const PlannerState& state, const HankelBank& bank,
                             const std::vector<GridSample>& history,
                             const Eigen::Vector2d& lambda_last, const S2SHistory& s2s_history,
                             const OrbitReferences& refs, const Eigen::Vector2d& cop_halfwidth,
                             const HddpcConfig& config) {
  const int K = config.domains_ahead;
  const int J = config.transitions_ahead;
  if (J < K) throw Error(ErrorKind::ShapeMismatch, "transitions_ahead must be >= domains_ahead");
  const int t_ini = config.t_ini;
  const int t_ini_s = config.t_ini_s2s;
  const int n_fine = bank.n_fine;
  const int n_coarse = bank.n_coarse;
  const int deg = config.bezier_degree;
  const int window_s = t_ini_s + 1;
  if (bank.t_ini != t_ini || bank.t_ini_s2s != t_ini_s) {
    throw Error(ErrorKind::MissingHankel, "bank built with different estimation horizons");
  }
  if (static_cast<int>(s2s_history.transitions.size()) < t_ini_s) {
    throw Error(ErrorKind::InsufficientHistory, "S2S history shorter than t_ini_s2s");
  }

  AssembledPlan plan;
  plan.k_domains = K;
  plan.j_transitions = J;
  plan.t_ini = t_ini;
  plan.t_ini_s2s = t_ini_s;
  plan.degree = deg;
  plan.tau = state.tau;
  plan.t0 = state.tau * state.t_current;
  plan.t_current = state.t_current;
  plan.side = state.side;

  const int offset = static_cast<int>(std::floor(n_fine * state.tau));
  plan.offset = offset;
  const int n0 = n_fine - offset;

  // Per-domain shapes and matrices.
  std::vector<const HankelMatrix*> h_mu(K + 1), h_eta(K + 1);
  std::vector<HankelMatrix> shrunk(2);
  plan.n_d.resize(K + 1);
  plan.side_d.resize(K + 1);
  for (int d = 0; d <= K; ++d) {
    plan.side_d[d] = (d % 2 == 0) ? state.side : other_side(state.side);
    const HankelBank::Side& side_bank = bank.side(plan.side_d[d]);
    if (d == 0) {
      plan.n_d[d] = n0;
      shrunk[0] = shrink_select(side_bank.mu[0], state.tau, t_ini, n_fine, 2);
      shrunk[1] = shrink_select(side_bank.eta[0], state.tau, t_ini, n_fine, 2);
      h_mu[d] = &shrunk[0];
      h_eta[d] = &shrunk[1];
    } else {
      plan.n_d[d] = n_coarse;
      const int slot = d == 1 ? 1 : 2;
      h_mu[d] = &side_bank.mu[slot];
      h_eta[d] = &side_bank.eta[slot];
    }
  }
  // Transition j ends domain j; its source side alternates with parity.
  auto side_of_transition = [&](int j) {
    return (j % 2 == 0) ? state.side : other_side(state.side);
  };
  auto s2s_mu = [&](int j) -> const HankelMatrix& {
    return side_of_transition(j) == StanceSide::Left ? bank.s2s_mu_l2r : bank.s2s_mu_r2l;
  };
  auto s2s_eta = [&](int j) -> const HankelMatrix& {
    return side_of_transition(j) == StanceSide::Left ? bank.s2s_eta_l2r : bank.s2s_eta_r2l;
  };

  // Variable layout.
  Eigen::Index nv = 0;
  plan.alpha_off.resize(K + 1);
  plan.mu_off.resize(K + 1);
  plan.eta_off.resize(K + 1);
  plan.gamma_off.resize(K + 1);
  plan.sigma_off.resize(K + 1);
  plan.gamma_dim.resize(K + 1);
  for (int d = 0; d <= K; ++d) {
    plan.alpha_off[d] = nv;
    nv += 2 * (deg + 1);
    plan.mu_off[d] = nv;
    nv += 2 * plan.n_d[d];
    plan.eta_off[d] = nv;
    nv += 2 * plan.n_d[d];
    plan.gamma_off[d] = nv;
    plan.gamma_dim[d] = h_mu[d]->cols();
    nv += plan.gamma_dim[d];
    plan.sigma_off[d] = nv;
    nv += 4 * (t_ini + plan.n_d[d]);
  }
  plan.smu_off.resize(J + 1);
  plan.seta_off.resize(J + 1);
  plan.sgamma_off.resize(J + 1);
  plan.ssigma_off.resize(J + 1);
  plan.sgamma_dim.resize(J + 1);
  for (int j = 0; j <= J; ++j) {
    plan.smu_off[j] = nv;
    nv += 3;
    plan.seta_off[j] = nv;
    nv += 2;
    plan.sgamma_off[j] = nv;
    plan.sgamma_dim[j] = s2s_mu(j).cols();
    nv += plan.sgamma_dim[j];
    plan.ssigma_off[j] = nv;
    nv += 5 * window_s;
  }

  Builder b(nv);

  // ---- Cost ----
  for (int d = 0; d <= K; ++d) {
    const Eigen::MatrixXd& ref =
        d == 0 ? refs.fine(plan.side_d[d]) : refs.coarse(plan.side_d[d]);
    for (int k = 0; k < plan.n_d[d]; ++k) {
      const int ref_col = d == 0 ? offset + k : k;
      for (int a = 0; a < 2; ++a) {
        const double qw = config.q_weight(a);
        b.quad(plan.eta_off[d] + 2 * k + a, qw);
        b.q(plan.eta_off[d] + 2 * k + a) -= 2.0 * qw * ref(a, ref_col);
        b.quad(plan.mu_off[d] + 2 * k + a, config.r_weight(a));
      }
    }
    for (Eigen::Index i = 0; i < plan.gamma_dim[d]; ++i) {
      b.quad(plan.gamma_off[d] + i, config.psi_gamma);
    }
    for (Eigen::Index i = 0; i < 4 * (t_ini + plan.n_d[d]); ++i) {
      b.quad(plan.sigma_off[d] + i, config.psi_sigma);
    }
    for (int i = 0; i < 2 * (deg + 1); ++i) b.quad(plan.alpha_off[d] + i, config.ridge);
  }
  const double s2s_gamma_w = config.psi_gamma * config.s2s_cost_scale;
  const double s2s_sigma_w = config.psi_sigma * config.s2s_cost_scale;
  for (int j = 0; j <= J; ++j) {
    for (int i = 0; i < 3; ++i) b.quad(plan.smu_off[j] + i, config.ridge);
    for (int i = 0; i < 2; ++i) b.quad(plan.seta_off[j] + i, config.ridge);
    for (Eigen::Index i = 0; i < plan.sgamma_dim[j]; ++i) {
      b.quad(plan.sgamma_off[j] + i, s2s_gamma_w + (s2s_gamma_w == 0.0 ? config.ridge : 0.0));
    }
    for (int i = 0; i < 5 * window_s; ++i) {
      b.quad(plan.ssigma_off[j] + i, s2s_sigma_w + (s2s_sigma_w == 0.0 ? config.ridge : 0.0));
    }
  }

  // ---- (a) Continuous Hankel equalities ----
  // Rows follow the stacked order (mu_ini; mu; eta_ini; eta).
  Eigen::MatrixXd mu_ini0, eta_ini0;
  {
    // Trim history to samples strictly before the first prediction phase.
    std::vector<GridSample> trimmed;
    trimmed.reserve(history.size());
    for (const auto& s : history) {
      if (s.domain_index < state.domain_index ||
          (s.domain_index == state.domain_index && s.grid_index < offset)) {
        trimmed.push_back(s);
      }
    }
    auto windows = build_ini_window(trimmed, t_ini, lambda_last, state.domain_index);
    mu_ini0 = windows.first;
    eta_ini0 = windows.second;
  }
  for (int d = 0; d <= K; ++d) {
    const Eigen::MatrixXd& hm = h_mu[d]->data;
    const Eigen::MatrixXd& he = h_eta[d]->data;
    const int nd = plan.n_d[d];
    const int rows_per_channel = 2 * (t_ini + nd);
    // lambda variable of the transition into domain d (for d >= 1).
    const Eigen::Index lambda_var = d >= 1 ? plan.smu_off[d - 1] : -1;
    for (int part = 0; part < 2; ++part) {  // 0: mu, 1: eta
      const Eigen::MatrixXd& h = part == 0 ? hm : he;
      const Eigen::MatrixXd& ini0 = part == 0 ? mu_ini0 : eta_ini0;
      const Eigen::Index var_off = part == 0 ? plan.mu_off[d] : plan.eta_off[d];
      const Eigen::Index sigma_base = plan.sigma_off[d] + part * rows_per_channel;
      for (int i = 0; i < t_ini + nd; ++i) {
        for (int a = 0; a < 2; ++a) {
          const Eigen::Index row = b.new_row(0.0, 0.0);
          const Eigen::Index hrow = 2 * i + a;
          for (Eigen::Index c = 0; c < h.cols(); ++c) {
            b.coeff(row, plan.gamma_off[d] + c, h(hrow, c));
          }
          b.coeff(row, sigma_base + hrow, 1.0);
          if (i < t_ini) {
            if (d == 0) {
              // Measured estimation window.
              b.lb[row] = b.ub[row] = ini0(a, i);
            } else {
              // Tail of the previous domain, shifted by the planned
              // placement: H gamma + sigma + lambda - tail = 0.
              b.coeff(row, lambda_var + a, 1.0);
              const int n_prev = plan.n_d[d - 1];
              const int tail_pos = n_prev - t_ini + i;  // position in domain d-1
              bool is_variable = true;
              Eigen::Index prev_var = 0;
              if (d == 1) {
                // Domain 0 is planned from fine index `offset`; earlier fine
                // samples live in the measured history.
                const int fine_index = n_fine - t_ini + i;
                if (fine_index >= offset) {
                  prev_var = (part == 0 ? plan.mu_off[0] : plan.eta_off[0]) +
                             2 * (fine_index - offset) + a;
                } else {
                  is_variable = false;
                  double value = 0.0;
                  bool found = false;
                  for (auto it = history.rbegin(); it != history.rend(); ++it) {
                    if (it->domain_index == state.domain_index && it->grid_index == fine_index) {
                      value = part == 0 ? it->mu(a) : it->eta(a);
                      found = true;
                      break;
                    }
                  }
                  if (!found) {
                    throw Error(ErrorKind::InsufficientHistory,
                                "missing measured sample for the future-domain window");
                  }
                  b.lb[row] = b.ub[row] = value;
                }
              } else {
                prev_var = (part == 0 ? plan.mu_off[d - 1] : plan.eta_off[d - 1]) +
                           2 * tail_pos + a;
              }
              if (is_variable) b.coeff(row, prev_var, -1.0);
            }
          } else {
            b.coeff(row, var_off + 2 * (i - t_ini) + a, -1.0);
          }
        }
      }
    }
  }

  // ---- (b) S2S Hankel equalities ----
  const auto& past = s2s_history.transitions;
  for (int j = 0; j <= J; ++j) {
    const Eigen::MatrixXd& hm = s2s_mu(j).data;
    const Eigen::MatrixXd& he = s2s_eta(j).data;
    const Eigen::Index mu_rows = 3 * window_s;
    for (int part = 0; part < 2; ++part) {
      const Eigen::MatrixXd& h = part == 0 ? hm : he;
      const int ch = part == 0 ? 3 : 2;
      const Eigen::Index sigma_base = plan.ssigma_off[j] + part * mu_rows;
      for (int i = 0; i < window_s; ++i) {
        const int rel = j - t_ini_s + i;  // transition index; rel == j is the prediction
        for (int a = 0; a < ch; ++a) {
          const Eigen::Index row = b.new_row(0.0, 0.0);
          const Eigen::Index hrow = ch * i + a;
          for (Eigen::Index c = 0; c < h.cols(); ++c) {
            b.coeff(row, plan.sgamma_off[j] + c, h(hrow, c));
          }
          b.coeff(row, sigma_base + hrow, 1.0);
          if (rel < 0) {
            const S2STransition& tr = past[past.size() + static_cast<size_t>(rel)];
            double value;
            if (part == 0) {
              value = a < 2 ? tr.lambda(a) : tr.t_next;
            } else {
              value = tr.pre_impact_com(a);
            }
            b.lb[row] = b.ub[row] = value;
          } else {
            const Eigen::Index var =
                part == 0 ? plan.smu_off[rel] + a : plan.seta_off[rel] + a;
            b.coeff(row, var, -1.0);
          }
        }
      }
    }
  }

  // ---- (c) Bezier coupling: eta_k = Bern(tau_k) alpha ----
  for (int d = 0; d <= K; ++d) {
    const int nd = plan.n_d[d];
    const int denom = d == 0 ? n_fine : n_coarse;
    for (int k = 0; k < nd; ++k) {
      const double tau_k = d == 0 ? static_cast<double>(offset + k) / denom
                                  : static_cast<double>(k) / denom;
      const Eigen::RowVectorXd bern = bernstein_row(tau_k, deg);
      for (int a = 0; a < 2; ++a) {
        const Eigen::Index row = b.new_row(0.0, 0.0);
        b.coeff(row, plan.eta_off[d] + 2 * k + a, 1.0);
        for (int i = 0; i <= deg; ++i) {
          b.coeff(row, plan.alpha_off[d] + 2 * i + a, -bern(i));
        }
      }
    }
  }

  // ---- (d) Terminal coupling: eta_s2s^j equals the final control point ----
  for (int j = 0; j <= std::min(J, K); ++j) {
    for (int a = 0; a < 2; ++a) {
      const Eigen::Index row = b.new_row(0.0, 0.0);
      b.coeff(row, plan.seta_off[j] + a, 1.0);
      b.coeff(row, plan.alpha_off[j] + 2 * deg + a, -1.0);
    }
  }

  // ---- (e) Velocity bounds in multiplicative form ----
  if (config.include_velocity_bounds) {
    for (int d = 0; d <= K; ++d) {
      const int nd = plan.n_d[d];
      const int denom = d == 0 ? n_fine : n_coarse;
      for (int k = 0; k < nd; ++k) {
        if (d == 0 && k == 0) continue;  // the measured instant is pinned by (h)
        const double tau_k = d == 0 ? static_cast<double>(offset + k) / denom
                                    : static_cast<double>(k) / denom;
        const Eigen::RowVectorXd dbern = bernstein_derivative_row(tau_k, deg);
        for (int a = 0; a < 2; ++a) {
          const Eigen::Vector2d& vb = a == 0 ? config.vel_x_bounds : config.vel_y_bounds;
          if (d == 0) {
            const Eigen::Index row =
                b.new_row(vb(0) * state.t_current, vb(1) * state.t_current);
            for (int i = 0; i <= deg; ++i) {
              b.coeff(row, plan.alpha_off[d] + 2 * i + a, dbern(i));
            }
          } else {
            const Eigen::Index t_var = plan.smu_off[d - 1] + 2;
            const Eigen::Index lo = b.new_row(0.0, kInf);
            for (int i = 0; i <= deg; ++i) {
              b.coeff(lo, plan.alpha_off[d] + 2 * i + a, dbern(i));
            }
            b.coeff(lo, t_var, -vb(0));
            const Eigen::Index hi = b.new_row(-kInf, 0.0);
            for (int i = 0; i <= deg; ++i) {
              b.coeff(hi, plan.alpha_off[d] + 2 * i + a, dbern(i));
            }
            b.coeff(hi, t_var, -vb(1));
          }
        }
      }
    }
  }

  // ---- (f) Support polygon box on the CoP samples ----
  for (int d = 0; d <= K; ++d) {
    for (int k = 0; k < plan.n_d[d]; ++k) {
      for (int a = 0; a < 2; ++a) {
        const Eigen::Index row = b.new_row(-cop_halfwidth(a), cop_halfwidth(a));
        b.coeff(row, plan.mu_off[d] + 2 * k + a, 1.0);
      }
    }
  }

  // ---- (g) Placement and duration boxes ----
  for (int j = 0; j <= J; ++j) {
    const StanceSide from = side_of_transition(j);
    const Eigen::Vector2d nominal = refs.lambda_nominal(from);
    double lx_lo = config.lambda_x_bounds(0), lx_hi = config.lambda_x_bounds(1);
    double ly_lo, ly_hi;
    if (from == StanceSide::Left) {
      ly_lo = -config.lambda_y_mag_bounds(1);
      ly_hi = -config.lambda_y_mag_bounds(0);
    } else {
      ly_lo = config.lambda_y_mag_bounds(0);
      ly_hi = config.lambda_y_mag_bounds(1);
    }
    double t_lo = config.t_step_bounds(0), t_hi = config.t_step_bounds(1);
    if (config.pin_contact_schedule) {
      lx_lo = lx_hi = nominal(0);
      ly_lo = ly_hi = nominal(1);
      t_lo = t_hi = refs.t_nominal;
    }
    Eigen::Index row = b.new_row(lx_lo, lx_hi);
    b.coeff(row, plan.smu_off[j] + 0, 1.0);
    row = b.new_row(ly_lo, ly_hi);
    b.coeff(row, plan.smu_off[j] + 1, 1.0);
    row = b.new_row(t_lo, t_hi);
    b.coeff(row, plan.smu_off[j] + 2, 1.0);
  }

  // ---- (h) Initial conditions at the exact phase ----
  {
    const Eigen::RowVectorXd bern = bernstein_row(state.tau, deg);
    const Eigen::RowVectorXd dbern = bernstein_derivative_row(state.tau, deg);
    for (int a = 0; a < 2; ++a) {
      const Eigen::Index row = b.new_row(state.com(a), state.com(a));
      for (int i = 0; i <= deg; ++i) b.coeff(row, plan.alpha_off[0] + 2 * i + a, bern(i));
    }
    // Scaled by the frozen duration so the row coefficients stay constant
    // across replans: dBern * alpha = v * T.
    for (int a = 0; a < 2; ++a) {
      const Eigen::Index row =
          b.new_row(state.com_vel(a) * state.t_current, state.com_vel(a) * state.t_current);
      for (int i = 0; i <= deg; ++i) b.coeff(row, plan.alpha_off[0] + 2 * i + a, dbern(i));
    }
  }

  plan.qp.P.resize(nv, nv);
  plan.qp.P.setFromTriplets(b.p_trip.begin(), b.p_trip.end());
  plan.qp.A.resize(b.rows, nv);
  plan.qp.A.setFromTriplets(b.a_trip.begin(), b.a_trip.end());
  plan.qp.q = b.q;
  plan.qp.l = Eigen::Map<Eigen::VectorXd>(b.lb.data(), b.rows);
  plan.qp.u = Eigen::Map<Eigen::VectorXd>(b.ub.data(), b.rows);
  return plan;
}

double PlanResult::sigma_norm() const {
  double sq = 0.0;
  for (const auto& s : sigma) sq += s.squaredNorm();
  for (const auto& s : sigma_s2s) sq += s.squaredNorm();
  return std::sqrt(sq);
}

double PlanResult::gamma_norm() const {
  double sq = 0.0;
  for (const auto& g : gamma) sq += g.squaredNorm();
  for (const auto& g : gamma_s2s) sq += g.squaredNorm();
  return std::sqrt(sq);
}

PlanResult hddpc_plan(const AssembledPlan& plan, const QpSolution& solution) {
  PlanResult out;
  out.tau = plan.tau;
  out.t0 = plan.t0;
  out.t_current = plan.t_current;
  out.side_d = plan.side_d;
  out.diagnostics = solution;
  out.objective = solution.objective;
  const int K = plan.k_domains;
  const int J = plan.j_transitions;
  const Eigen::VectorXd& x = solution.x;
  for (int d = 0; d <= K; ++d) {
    Eigen::MatrixXd alpha(plan.degree + 1, 2);
    for (int i = 0; i <= plan.degree; ++i) {
      alpha(i, 0) = x(plan.alpha_off[d] + 2 * i);
      alpha(i, 1) = x(plan.alpha_off[d] + 2 * i + 1);
    }
    out.alpha.push_back(alpha);
    const int nd = plan.n_d[d];
    Eigen::MatrixXd mu(2, nd), eta(2, nd);
    for (int k = 0; k < nd; ++k) {
      mu(0, k) = x(plan.mu_off[d] + 2 * k);
      mu(1, k) = x(plan.mu_off[d] + 2 * k + 1);
      eta(0, k) = x(plan.eta_off[d] + 2 * k);
      eta(1, k) = x(plan.eta_off[d] + 2 * k + 1);
    }
    out.mu.push_back(mu);
    out.eta.push_back(eta);
    out.gamma.push_back(x.segment(plan.gamma_off[d], plan.gamma_dim[d]));
    out.sigma.push_back(x.segment(plan.sigma_off[d], 4 * (plan.t_ini + nd)));
  }
  for (int j = 0; j <= J; ++j) {
    out.lambda.push_back(Eigen::Vector2d(x(plan.smu_off[j]), x(plan.smu_off[j] + 1)));
    out.t_step.push_back(x(plan.smu_off[j] + 2));
    out.eta_s2s.push_back(Eigen::Vector2d(x(plan.seta_off[j]), x(plan.seta_off[j] + 1)));
    out.gamma_s2s.push_back(x.segment(plan.sgamma_off[j], plan.sgamma_dim[j]));
    out.sigma_s2s.push_back(x.segment(plan.ssigma_off[j], 5 * (plan.t_ini_s2s + 1)));
  }
  return out;
}

PlanResult hddpc_plan(const AssembledPlan& plan, const QpSettings& settings,
                      double feasibility_tol) {
  QpSolution sol = solve(plan.qp, settings);
  if (sol.status == QpStatus::PrimalInfeasible || sol.status == QpStatus::DualInfeasible) {
    throw Error(ErrorKind::SolverFailed, to_string(sol.status));
  }
  if (sol.primal_residual > feasibility_tol) {
    throw Error(ErrorKind::InfeasibleBeyondTolerance,
                "constraint residual " + std::to_string(sol.primal_residual));
  }
  return hddpc_plan(plan, sol);
}

HddpcPlanner::HddpcPlanner(const HddpcConfig& config, const LipParams& lip,
                           const GaitParams& gait, const Eigen::Vector2d& cop_halfwidth,
                           const Dataset& dataset, const QpSettings& solver_settings)
    : config_(config),
      lip_(lip),
      gait_(gait),
      cop_halfwidth_(cop_halfwidth),
      solver_settings_(solver_settings),
      bank_(build_hankel_bank(dataset, config)),
      refs_(extract_reference(gait, lip, config.samples_per_step,
                              config.samples_per_step_future)) {}

HddpcPlanner::~HddpcPlanner() = default;

void HddpcPlanner::reset(StanceSide start_side) {
  history_.clear();
  s2s_history_.transitions.clear();
  solver_cache_.clear();
  const StanceSide prev = other_side(start_side);
  // Replay the reference orbit as the virtual previous domain.
  for (int k = 0; k < config_.samples_per_step; ++k) {
    GridSample s;
    s.domain_index = -1;
    s.grid_index = k;
    s.mu = Eigen::Vector2d::Zero();
    s.eta = refs_.fine(prev).col(k);
    history_.push_back(s);
  }
  lambda_last_ = refs_.lambda_nominal(prev);
  // Virtual past transitions, oldest first, ending with the one that entered
  // the current domain.
  for (int i = config_.t_ini_s2s; i >= 1; --i) {
    const StanceSide from = (i % 2 == 1) ? prev : start_side;
    S2STransition tr;
    tr.lambda = refs_.lambda_nominal(from);
    tr.t_next = refs_.t_nominal;
    tr.pre_impact_com = refs_.pre_impact(from);
    s2s_history_.transitions.push_back(tr);
  }
}

void HddpcPlanner::record_sample(int domain_index, int grid_index, const Eigen::Vector2d& mu,
                                 const Eigen::Vector2d& eta) {
  history_.push_back(GridSample{domain_index, grid_index, mu, eta});
  const size_t cap = static_cast<size_t>(3 * config_.samples_per_step);
  if (history_.size() > cap) {
    history_.erase(history_.begin(), history_.begin() + (history_.size() - cap));
  }
}

void HddpcPlanner::finalize_domain(int domain_index, const Eigen::MatrixXd& mu,
                                   const Eigen::MatrixXd& eta) {
  if (mu.cols() != config_.samples_per_step || eta.cols() != config_.samples_per_step) {
    throw Error(ErrorKind::ShapeMismatch, "finalize_domain expects samples_per_step columns");
  }
  history_.erase(std::remove_if(history_.begin(), history_.end(),
                                [&](const GridSample& s) {
                                  return s.domain_index == domain_index;
                                }),
                 history_.end());
  for (int k = 0; k < config_.samples_per_step; ++k) {
    history_.push_back(GridSample{domain_index, k, mu.col(k), eta.col(k)});
  }
}

void HddpcPlanner::record_transition(const Eigen::Vector2d& lambda, double t_next,
                                     const Eigen::Vector2d& pre_impact_com) {
  s2s_history_.transitions.push_back(S2STransition{lambda, t_next, pre_impact_com});
  lambda_last_ = lambda;
  const size_t cap = static_cast<size_t>(config_.t_ini_s2s + 4);
  if (s2s_history_.transitions.size() > cap) {
    s2s_history_.transitions.erase(
        s2s_history_.transitions.begin(),
        s2s_history_.transitions.begin() +
            (s2s_history_.transitions.size() - cap));
  }
}

PlanResult HddpcPlanner::replan(const PlannerState& state) {
  const auto t_start = std::chrono::steady_clock::now();
  AssembledPlan plan = hddpc_assemble(state, bank_, history_, lambda_last_, s2s_history_, refs_,
                                      cop_halfwidth_, config_);
  QpSolution sol;
  if (plan.offset == 0) {
    const int key = state.side == StanceSide::Left ? 0 : 1;
    auto it = solver_cache_.find(key);
    if (it != solver_cache_.end() &&
        it->second->problem().num_vars() == plan.qp.num_vars() &&
        it->second->problem().num_constraints() == plan.qp.num_constraints()) {
      it->second->update_vectors(plan.qp.q, plan.qp.l, plan.qp.u);
      sol = it->second->solve();
    } else {
      auto solver = std::make_unique<QpSolver>(plan.qp, solver_settings_);
      sol = solver->solve();
      solver_cache_[key] = std::move(solver);
    }
  } else {
    sol = solve(plan.qp, solver_settings_);
  }
  const auto t_end = std::chrono::steady_clock::now();
  if (sol.status == QpStatus::PrimalInfeasible || sol.status == QpStatus::DualInfeasible) {
    throw Error(ErrorKind::SolverFailed, to_string(sol.status));
  }
  if (sol.primal_residual > config_.feasibility_tol) {
    throw Error(ErrorKind::InfeasibleBeyondTolerance,
                "constraint residual " + std::to_string(sol.primal_residual));
  }
  PlanResult result = hddpc_plan(plan, sol);
  result.solve_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t_end - t_start)
          .count();
  return result;
}

}  // namespace hddpc
