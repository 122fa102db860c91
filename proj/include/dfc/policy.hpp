#pragma once

// Shared linear-softmax policy over hashed state-action features.
//
// logit(a | s) = theta . phi(s, a), where phi hashes game-scoped descriptor
// tokens into `dim` buckets with +-1 signs. A single parameter vector serves
// every game; game-tagged tokens keep the games apart.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dfc/games.hpp"
#include "dfc/rng.hpp"

namespace dfc {

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultFeatureDim = 256;

// Sparse +-1 feature vector: each entry is +(bucket + 1) or -(bucket + 1).
// Entries may repeat; repeats add up.
struct SparseFeatures {
  std::vector<std::int32_t> entries;

  double dot(std::span<const double> theta) const {
    double s = 0.0;
    for (std::int32_t e : entries) {
      s += e > 0 ? theta[static_cast<std::size_t>(e - 1)] : -theta[static_cast<std::size_t>(-e - 1)];
    }
    return s;
  }

  // out += scale * phi
  void add_to(std::span<double> out, double scale) const {
    for (std::int32_t e : entries) {
      if (e > 0) {
        out[static_cast<std::size_t>(e - 1)] += scale;
      } else {
        out[static_cast<std::size_t>(-e - 1)] -= scale;
      }
    }
  }
};

class Featurizer {
 public:
  explicit Featurizer(int dim = kDefaultFeatureDim, std::uint64_t seed = 0);

  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  SparseFeatures features(const GameState& state, const Move& move) const;
  SparseFeatures distractor_features(const GameState& state, std::size_t which) const;
  // Accepts a canonical legal action or one of kDistractorActions.
  SparseFeatures features(const GameState& state, std::string_view action) const;

 private:
  SparseFeatures bucketize(const std::vector<std::uint64_t>& tokens) const;
  TokenSink sink_for(const GameState& state) const;

  int dim_;
  std::uint64_t seed_;
};

// Dense feature vector of length featurizer.dim().
std::vector<double> featurize(const Featurizer& featurizer, const GameState& state,
                              std::string_view action);

// One decision point: the action vocabulary offered to the policy and the
// features of every entry. Legal actions come first, distractors last.
struct Decision {
  std::vector<std::string> actions;
  std::vector<SparseFeatures> features;
  std::size_t num_legal = 0;

  std::size_t size() const { return actions.size(); }
};

Decision make_decision(const Featurizer& featurizer, const GameState& state,
                       bool with_distractors);

struct PolicyMeta {
  int feature_dim = 0;
  std::string note;
  // Append-only history in postfix form: "init:*" entries are leaves,
  // "conquer:*" entries wrap the preceding tree, "fuse" joins the last two
  // trees.
  std::vector<std::string> lineage;
  int iteration = 0;
};

struct PolicyParams {
  std::vector<double> theta;
  PolicyMeta meta;

  int dim() const { return static_cast<int>(theta.size()); }
};

// theta_i ~ U[-0.01, 0.01], deterministic per seed.
PolicyParams init_params(int dim, std::uint64_t seed);

// Elementwise mean (a + b) / 2; lineage is a ++ b ++ ["fuse"].
PolicyParams fuse(const PolicyParams& a, const PolicyParams& b);

struct ActionDistribution {
  std::vector<std::string> actions;
  std::vector<double> probs;
  std::vector<double> logprobs;
};

std::vector<double> logits(const PolicyParams& params, const Decision& decision);
ActionDistribution action_distribution(const PolicyParams& params, const Decision& decision);
ActionDistribution action_distribution(const PolicyParams& params, const Featurizer& featurizer,
                                       const GameState& state, bool with_distractors);

// log-softmax of `values`, computed stably.
std::vector<double> log_softmax(std::span<const double> values);

struct SampledAction {
  std::size_t index = 0;
  double logprob = 0.0;  // under the undisturbed policy
  bool disturbed = false;
};

// With probability epsilon the action is replaced by a uniform draw over the
// legal actions; otherwise it is sampled from the softmax.
SampledAction sample_action(const PolicyParams& params, const Decision& decision, Rng& rng,
                            double epsilon);

struct SampledToken {
  ActionToken token;
  double logprob = 0.0;
  bool disturbed = false;
};

SampledToken sample_action(const PolicyParams& params, const Featurizer& featurizer,
                           const GameState& state, Rng& rng, double epsilon,
                           bool with_distractors);

// Argmax of the logits; ties go to the earliest entry.
std::size_t greedy_action(const PolicyParams& params, const Decision& decision);

// A learner decision recorded during rollout, consumed by the GRPO update.
struct LearnerStep {
  Decision decision;
  std::size_t chosen = 0;
  double behavior_logprob = 0.0;
};

}  // namespace dfc
