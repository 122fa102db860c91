#include "dfc/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dfc {

void GrpoConfig::validate() const {
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw GrpoError("clip_eps must lie in (0, 1)");
  if (!(kl_alpha >= 0.0)) throw GrpoError("kl_alpha must be >= 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw GrpoError("learning_rate must be finite and >= 0");
  }
  if (!(std_floor >= 0.0)) throw GrpoError("std_floor must be >= 0");
}

std::vector<double> group_advantages(std::span<const double> rewards, double std_floor) {
  if (rewards.empty()) throw GrpoError("group_advantages: empty group");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> adv(rewards.size(), 0.0);
  if (sd == 0.0) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / (sd + std_floor);
  return adv;
}

GrpoResult grpo_objective(const PolicyParams& params, const PolicyParams& ref_params,
                          std::span<const RolloutGroup> groups, const GrpoConfig& cfg) {
  if (groups.empty()) throw GrpoError("grpo_objective: empty group set");
  if (params.dim() != ref_params.dim()) {
    throw GrpoError("grpo_objective: reference dimension " + std::to_string(ref_params.dim()) +
                    " != policy dimension " + std::to_string(params.dim()));
  }
  const double lo = 1.0 - cfg.clip_eps;
  const double hi = 1.0 + cfg.clip_eps;

  GrpoResult res;
  res.gradient.assign(params.theta.size(), 0.0);
  double surrogate_sum = 0.0;
  double kl_sum = 0.0;
  std::vector<double> rewards;

  for (const RolloutGroup& group : groups) {
    if (group.members.size() < 2) continue;
    rewards.clear();
    for (const auto& m : group.members) rewards.push_back(m.reward);
    const auto adv = group_advantages(rewards, cfg.std_floor);
    ++res.num_groups;

    for (std::size_t mi = 0; mi < group.members.size(); ++mi) {
      const double a = adv[mi];
      for (const LearnerStep& st : group.members[mi].steps) {
        const Decision& d = st.decision;
        const auto logp = log_softmax(logits(params, d));
        const auto logr = log_softmax(logits(ref_params, d));

        const double rho = std::exp(logp[st.chosen] - st.behavior_logprob);
        const double unclipped = rho * a;
        const double clipped = std::clamp(rho, lo, hi) * a;
        surrogate_sum += std::min(unclipped, clipped);
        // d/dtheta of the active branch; the clipped branch is flat outside
        // the trust interval.
        const bool clip_active = clipped < unclipped && (rho <= lo || rho >= hi);
        const double coef = clip_active ? 0.0 : a * rho;

        double kl = 0.0;
        for (std::size_t b = 0; b < d.size(); ++b) kl += std::exp(logp[b]) * (logp[b] - logr[b]);
        kl_sum += kl;

        // Per-candidate weight w_b on phi_b of the summed (-surrogate + alpha KL)
        // gradient: -coef * (1[b = a] - p_b) + alpha * p_b * (logp_b - logr_b - KL).
        for (std::size_t b = 0; b < d.size(); ++b) {
          const double p = std::exp(logp[b]);
          double w = -coef * ((b == st.chosen ? 1.0 : 0.0) - p);
          w += cfg.kl_alpha * p * (logp[b] - logr[b] - kl);
          if (w != 0.0) d.features[b].add_to(res.gradient, w);
        }
        ++res.num_steps;
      }
    }
  }

  if (res.num_steps == 0) return res;
  const double inv_n = 1.0 / static_cast<double>(res.num_steps);
  for (double& g : res.gradient) g *= inv_n;
  res.surrogate = surrogate_sum * inv_n;
  res.kl = kl_sum * inv_n;
  res.loss = -res.surrogate + cfg.kl_alpha * res.kl;
  return res;
}

PolicyParams apply_update(const PolicyParams& params, std::span<const double> gradient,
                          double learning_rate) {
  if (gradient.size() != params.theta.size()) {
    throw GrpoError("apply_update: gradient dimension mismatch");
  }
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    if (!std::isfinite(gradient[i])) {
      throw GrpoError("apply_update: non-finite gradient entry at index " + std::to_string(i) +
                      "; training diverged");
    }
  }
  PolicyParams next = params;
  for (std::size_t i = 0; i < gradient.size(); ++i) next.theta[i] -= learning_rate * gradient[i];
  return next;
}

}  // namespace dfc
