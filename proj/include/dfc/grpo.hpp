#pragma once

// Group-relative advantages and the clipped-ratio policy-gradient objective
// with an exact categorical KL penalty towards a reference policy.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfc/policy.hpp"

namespace dfc {

class GrpoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GrpoConfig {
  double clip_eps = 0.1;
  double kl_alpha = 0.1;
  double learning_rate = 1.0;
  double std_floor = 1e-8;

  void validate() const;
};

// One trajectory as seen by the loss: its learner decisions and the scalar
// trajectory reward. Views into storage owned by the caller.
struct GroupMember {
  std::span<const LearnerStep> steps;
  double reward = 0.0;
};

// Trajectories that share (game_id, seed).
struct RolloutGroup {
  std::string game_id;
  std::uint64_t seed = 0;
  std::vector<GroupMember> members;
};

// (R_i - mean) / (population std + std_floor); all-equal rewards give zeros.
std::vector<double> group_advantages(std::span<const double> rewards, double std_floor);

struct GrpoResult {
  double loss = 0.0;
  std::vector<double> gradient;
  double surrogate = 0.0;  // mean clipped surrogate over steps
  double kl = 0.0;         // mean KL(pi || ref) over visited states
  int num_steps = 0;
  int num_groups = 0;      // groups that contributed (>= 2 members)
};

// loss = -(1/N) sum_steps min(rho A, clip(rho, 1-eps, 1+eps) A) + alpha * mean KL
// with rho = exp(log pi(a|s) - behaviour logprob). Groups with fewer than two
// members are skipped. The gradient is exact.
GrpoResult grpo_objective(const PolicyParams& params, const PolicyParams& ref_params,
                          std::span<const RolloutGroup> groups, const GrpoConfig& cfg);

// theta' = theta - learning_rate * gradient. Throws on non-finite gradients.
PolicyParams apply_update(const PolicyParams& params, std::span<const double> gradient,
                          double learning_rate);

}  // namespace dfc
