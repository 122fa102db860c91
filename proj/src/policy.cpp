#include <algorithm>
#include <cmath>
#include <limits>

#include "dfc/policy.hpp"

namespace dfc {

namespace {
constexpr std::uint64_t kGlobalSalt = 0x5bd1e9955bd1e995ULL;
}

Featurizer::Featurizer(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 1) throw PolicyError("feature dimension must be >= 1");
}

TokenSink Featurizer::sink_for(const GameState& state) const {
  return TokenSink(mix_seed(seed_, hash_string(state.game_id())), mix_seed(seed_, kGlobalSalt));
}

SparseFeatures Featurizer::bucketize(const std::vector<std::uint64_t>& tokens) const {
  SparseFeatures f;
  f.entries.reserve(tokens.size());
  for (std::uint64_t h : tokens) {
    const auto bucket = static_cast<std::int32_t>((h >> 1) % static_cast<std::uint64_t>(dim_));
    f.entries.push_back((h & 1U) ? -(bucket + 1) : bucket + 1);
  }
  // Opposite-signed collisions could cancel to the zero vector; keep the
  // first token in that case so every feature vector is non-zero.
  std::vector<std::int32_t> sorted;
  bool all_cancel = !f.entries.empty();
  if (all_cancel) {
    sorted = f.entries;
    std::sort(sorted.begin(), sorted.end(),
              [](std::int32_t a, std::int32_t b) { return std::abs(a) < std::abs(b); });
    for (std::size_t i = 0; i < sorted.size() && all_cancel;) {
      std::size_t j = i;
      int sum = 0;
      while (j < sorted.size() && std::abs(sorted[j]) == std::abs(sorted[i])) {
        sum += sorted[j] > 0 ? 1 : -1;
        ++j;
      }
      all_cancel = sum == 0;
      i = j;
    }
  }
  if (all_cancel || f.entries.empty()) {
    const std::uint64_t h = tokens.empty() ? seed_ : tokens.front();
    f.entries.push_back(static_cast<std::int32_t>((h >> 1) % static_cast<std::uint64_t>(dim_)) + 1);
  }
  return f;
}

SparseFeatures Featurizer::features(const GameState& state, const Move& move) const {
  TokenSink sink = sink_for(state);
  sink.add(tag("legal"));
  state.game->describe(state, move, sink);
  return bucketize(sink.tokens());
}

SparseFeatures Featurizer::distractor_features(const GameState& state, std::size_t which) const {
  TokenSink sink = sink_for(state);
  sink.add_global(tag("distractor"));
  sink.add_global(tag("distractor"), which);
  sink.add(tag("distractor"), which);
  return bucketize(sink.tokens());
}

SparseFeatures Featurizer::features(const GameState& state, std::string_view action) const {
  for (std::size_t k = 0; k < kDistractorActions.size(); ++k) {
    if (action == kDistractorActions[k]) return distractor_features(state, k);
  }
  const ActionToken token = parse_action(state, action);
  if (token.format_error()) {
    throw PolicyError("featurize: not a canonical action for this state: " + std::string(action));
  }
  return features(state, *token.parsed);
}

std::vector<double> featurize(const Featurizer& featurizer, const GameState& state,
                              std::string_view action) {
  std::vector<double> dense(static_cast<std::size_t>(featurizer.dim()), 0.0);
  featurizer.features(state, action).add_to(dense, 1.0);
  return dense;
}

Decision make_decision(const Featurizer& featurizer, const GameState& state,
                       bool with_distractors) {
  if (state.terminal) throw GameError("no decision at a terminal state");
  Decision d;
  const Game& game = *state.game;
  const auto moves = game.legal_moves(state);
  d.num_legal = moves.size();
  d.actions.reserve(moves.size() + kDistractorActions.size());
  d.features.reserve(moves.size() + kDistractorActions.size());
  for (const Move& m : moves) {
    d.actions.push_back(game.format_move(m));
    d.features.push_back(featurizer.features(state, m));
  }
  if (with_distractors) {
    for (std::size_t k = 0; k < kDistractorActions.size(); ++k) {
      d.actions.emplace_back(kDistractorActions[k]);
      d.features.push_back(featurizer.distractor_features(state, k));
    }
  }
  return d;
}

PolicyParams init_params(int dim, std::uint64_t seed) {
  if (dim < 1) throw PolicyError("init_params: dimension must be >= 1");
  Rng rng(mix_seed(seed, hash_string("init_params")));
  PolicyParams p;
  p.theta.resize(static_cast<std::size_t>(dim));
  for (double& t : p.theta) t = -0.01 + 0.02 * uniform01(rng);
  p.meta.feature_dim = dim;
  p.meta.note = "init";
  p.meta.lineage.push_back("init:" + std::to_string(seed));
  return p;
}

PolicyParams fuse(const PolicyParams& a, const PolicyParams& b) {
  if (a.theta.size() != b.theta.size()) {
    throw PolicyError("fuse: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()) + ")");
  }
  PolicyParams out;
  out.theta.resize(a.theta.size());
  for (std::size_t i = 0; i < a.theta.size(); ++i) out.theta[i] = (a.theta[i] + b.theta[i]) / 2.0;
  out.meta.feature_dim = a.dim();
  out.meta.note = "fuse";
  out.meta.lineage = a.meta.lineage;
  out.meta.lineage.insert(out.meta.lineage.end(), b.meta.lineage.begin(), b.meta.lineage.end());
  out.meta.lineage.push_back("fuse");
  return out;
}

std::vector<double> log_softmax(std::span<const double> values) {
  const double mx = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - lse;
  return out;
}

std::vector<double> logits(const PolicyParams& params, const Decision& decision) {
  std::vector<double> out;
  out.reserve(decision.size());
  for (const auto& f : decision.features) {
    for (std::int32_t e : f.entries) {
      if (std::abs(e) > params.dim()) {
        throw PolicyError("policy/featurizer dimension mismatch: feature bucket " +
                          std::to_string(std::abs(e) - 1) + " outside theta of size " +
                          std::to_string(params.dim()));
      }
    }
    out.push_back(f.dot(params.theta));
  }
  return out;
}

ActionDistribution action_distribution(const PolicyParams& params, const Decision& decision) {
  if (decision.size() == 0) throw PolicyError("empty action vocabulary");
  ActionDistribution dist;
  dist.actions = decision.actions;
  const auto z = logits(params, decision);
  dist.logprobs = log_softmax(z);
  dist.probs.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) dist.probs[i] = std::exp(dist.logprobs[i]);
  return dist;
}

ActionDistribution action_distribution(const PolicyParams& params, const Featurizer& featurizer,
                                       const GameState& state, bool with_distractors) {
  if (params.dim() != featurizer.dim()) {
    throw PolicyError("policy dimension " + std::to_string(params.dim()) +
                      " does not match featurizer dimension " + std::to_string(featurizer.dim()));
  }
  return action_distribution(params, make_decision(featurizer, state, with_distractors));
}

SampledAction sample_action(const PolicyParams& params, const Decision& decision, Rng& rng,
                            double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw PolicyError("epsilon must lie in [0, 1]");
  const auto z = logits(params, decision);
  const auto logp = log_softmax(z);
  SampledAction out;
  const double u = uniform01(rng);
  if (u < epsilon && decision.num_legal > 0) {
    out.index = static_cast<std::size_t>(uniform_index(rng, decision.num_legal));
    out.disturbed = true;
  } else {
    double v = uniform01(rng);
    out.index = logp.size() - 1;
    for (std::size_t i = 0; i < logp.size(); ++i) {
      v -= std::exp(logp[i]);
      if (v < 0.0) {
        out.index = i;
        break;
      }
    }
  }
  out.logprob = logp[out.index];
  return out;
}

SampledToken sample_action(const PolicyParams& params, const Featurizer& featurizer,
                           const GameState& state, Rng& rng, double epsilon,
                           bool with_distractors) {
  if (params.dim() != featurizer.dim()) throw PolicyError("policy/featurizer dimension mismatch");
  const Decision d = make_decision(featurizer, state, with_distractors);
  const SampledAction s = sample_action(params, d, rng, epsilon);
  return {parse_action(state, d.actions[s.index]), s.logprob, s.disturbed};
}

std::size_t greedy_action(const PolicyParams& params, const Decision& decision) {
  const auto z = logits(params, decision);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

}  // namespace dfc
