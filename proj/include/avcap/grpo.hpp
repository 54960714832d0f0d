#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "avcap/errors.hpp"
#include "avcap/rng.hpp"

namespace avcap::grpo {

struct GRPOConfig {
  std::size_t group_size = 8;   // G: responses sampled per prompt
  double clip_eps = 0.2;        // ratio clip half-width
  double kl_coeff = 0.04;       // beta: weight of the KL penalty to the reference policy
  double std_eps = 1e-8;        // added to the reward std before dividing
  double temperature = 1.0;     // sampling temperature
  double learning_rate = 0.3;
};

inline void validate(const GRPOConfig& cfg) {
  if (cfg.group_size < 2) throw ArgumentError("GRPOConfig: group_size must be >= 2");
  if (!(cfg.clip_eps > 0.0 && cfg.clip_eps < 1.0)) {
    throw ArgumentError("GRPOConfig: clip_eps must be in (0, 1)");
  }
  if (cfg.kl_coeff < 0.0) throw ArgumentError("GRPOConfig: kl_coeff must be >= 0");
  if (!(cfg.std_eps > 0.0)) throw ArgumentError("GRPOConfig: std_eps must be > 0");
  if (!(cfg.temperature > 0.0)) throw ArgumentError("GRPOConfig: temperature must be > 0");
}

/// One group of sampled responses for a single prompt, with rewards and the
/// per-token log-probabilities under the current, sampling-time, and
/// reference policies.
struct GroupRollout {
  std::string prompt_id;
  std::vector<std::vector<int>> responses;  // token ids per response
  std::vector<double> rewards;
  std::vector<std::vector<double>> logp_new;
  std::vector<std::vector<double>> logp_old;
  std::vector<std::vector<double>> logp_ref;
};

inline void validate(const GroupRollout& r) {
  const std::size_t g = r.rewards.size();
  if (g < 2) throw ArgumentError("GroupRollout: need at least 2 responses");
  if (r.responses.size() != g || r.logp_new.size() != g || r.logp_old.size() != g ||
      r.logp_ref.size() != g) {
    throw ArgumentError("GroupRollout: per-response arrays must all have length G");
  }
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t t = r.responses[i].size();
    if (t == 0) throw ArgumentError("GroupRollout: empty response");
    if (r.logp_new[i].size() != t || r.logp_old[i].size() != t || r.logp_ref[i].size() != t) {
      throw ArgumentError("GroupRollout: log-prob arrays not congruent with tokens");
    }
  }
}

/// Group-relative advantages: (r_i - mean) / (population std + std_eps).
/// A degenerate group (all rewards equal) yields all-zero advantages.
inline std::vector<double> normalize_advantages(std::span<const double> rewards, double std_eps) {
  if (rewards.size() < 2) throw ArgumentError("normalize_advantages: need at least 2 rewards");
  if (!(std_eps > 0.0)) throw ArgumentError("normalize_advantages: std_eps must be > 0");
  bool degenerate = true;
  for (const double r : rewards) degenerate = degenerate && r == rewards[0];
  if (degenerate) return std::vector<double>(rewards.size(), 0.0);
  const double g = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (const double r : rewards) mean += r;
  mean /= g;
  double var = 0.0;
  for (const double r : rewards) var += (r - mean) * (r - mean);
  var /= g;
  const double denom = std::sqrt(var) + std_eps;
  std::vector<double> advantages(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    advantages[i] = (rewards[i] - mean) / denom;
  }
  return advantages;
}

/// Nonnegative per-token KL estimator, averaged over tokens:
///   mean_t [ exp(d_t) - d_t - 1 ],  d_t = logp_ref_t - logp_new_t.
/// Zero iff the arrays are identical; an unbiased estimate of
/// KL(policy || reference) when tokens are sampled from the policy.
inline double kl_estimate(std::span<const double> logp_new, std::span<const double> logp_ref) {
  if (logp_new.size() != logp_ref.size()) {
    throw ArgumentError("kl_estimate: arrays must be congruent");
  }
  if (logp_new.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t t = 0; t < logp_new.size(); ++t) {
    const double d = logp_ref[t] - logp_new[t];
    acc += std::exp(d) - d - 1.0;
  }
  return acc / static_cast<double>(logp_new.size());
}

/// Clipped importance-weighted advantage, averaged over tokens:
///   mean_t min(rho_t * A, clip(rho_t, 1-eps, 1+eps) * A),
///   rho_t = exp(logp_new_t - logp_old_t).
inline double clipped_surrogate(std::span<const double> logp_new, std::span<const double> logp_old,
                                double advantage, double clip_eps) {
  if (logp_new.size() != logp_old.size()) {
    throw ArgumentError("clipped_surrogate: arrays must be congruent");
  }
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) {
    throw ArgumentError("clipped_surrogate: clip_eps must be in (0, 1)");
  }
  if (logp_new.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t t = 0; t < logp_new.size(); ++t) {
    const double rho = std::exp(logp_new[t] - logp_old[t]);
    const double clipped = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps);
    acc += std::min(rho * advantage, clipped * advantage);
  }
  return acc / static_cast<double>(logp_new.size());
}

/// The group objective: mean over responses of the clipped surrogate minus
/// the weighted KL penalty, with advantages normalized within the group.
inline double grpo_objective(const GroupRollout& rollout, const GRPOConfig& cfg) {
  validate(cfg);
  validate(rollout);
  const auto advantages = normalize_advantages(rollout.rewards, cfg.std_eps);
  double acc = 0.0;
  for (std::size_t i = 0; i < rollout.rewards.size(); ++i) {
    const double surr =
        clipped_surrogate(rollout.logp_new[i], rollout.logp_old[i], advantages[i], cfg.clip_eps);
    const double kl = kl_estimate(rollout.logp_new[i], rollout.logp_ref[i]);
    acc += surr - cfg.kl_coeff * kl;
  }
  return acc / static_cast<double>(rollout.rewards.size());
}

// ---------------------------------------------------------------------------
// Toy categorical policy: single-token responses over a small action set.
// Small enough to verify the objective's analytic gradient against finite
// differences and to run seeded bandit-style training demos.
// ---------------------------------------------------------------------------

struct ToyCategoricalPolicy {
  // Ordered map so prompt iteration (and therefore sampling) is deterministic.
  std::map<std::string, std::vector<double>> logits;

  std::vector<double> log_probs(const std::string& prompt_id, double temperature) const {
    const auto it = logits.find(prompt_id);
    if (it == logits.end()) throw ArgumentError("ToyCategoricalPolicy: unknown prompt " + prompt_id);
    const auto& z = it->second;
    if (z.empty()) throw ArgumentError("ToyCategoricalPolicy: empty action set");
    std::vector<double> lp(z.size());
    double max_z = z[0] / temperature;
    for (const double v : z) max_z = std::max(max_z, v / temperature);
    double sum = 0.0;
    for (std::size_t a = 0; a < z.size(); ++a) {
      lp[a] = z[a] / temperature - max_z;
      sum += std::exp(lp[a]);
    }
    const double log_sum = std::log(sum);
    for (double& v : lp) v -= log_sum;
    return lp;
  }

  std::vector<double> probs(const std::string& prompt_id, double temperature) const {
    auto lp = log_probs(prompt_id, temperature);
    for (double& v : lp) v = std::exp(v);
    return lp;
  }

  int sample(const std::string& prompt_id, double temperature, std::mt19937_64& rng) const {
    const auto p = probs(prompt_id, temperature);
    return static_cast<int>(sample_categorical(p, rng));
  }
};

/// Exact KL between two categorical distributions given as log-probs.
inline double exact_categorical_kl(std::span<const double> logp_p, std::span<const double> logp_q) {
  if (logp_p.size() != logp_q.size()) {
    throw ArgumentError("exact_categorical_kl: distributions must share support");
  }
  double acc = 0.0;
  for (std::size_t a = 0; a < logp_p.size(); ++a) {
    acc += std::exp(logp_p[a]) * (logp_p[a] - logp_q[a]);
  }
  return acc;
}

using ToyRewardFn = std::function<double(const std::string& prompt_id, int action)>;

/// Samples one group per prompt from `old_policy` and fills in rewards and
/// all three log-prob views (logp_new initially equals logp_old).
inline std::vector<GroupRollout> sample_group_rollouts(const ToyCategoricalPolicy& old_policy,
                                                       const ToyCategoricalPolicy& ref_policy,
                                                       const ToyRewardFn& reward_fn,
                                                       const GRPOConfig& cfg,
                                                       std::mt19937_64& rng) {
  validate(cfg);
  if (!reward_fn) throw ArgumentError("sample_group_rollouts: no reward function");
  std::vector<GroupRollout> rollouts;
  for (const auto& [prompt_id, z] : old_policy.logits) {
    (void)z;
    const auto lp_old = old_policy.log_probs(prompt_id, cfg.temperature);
    const auto lp_ref = ref_policy.log_probs(prompt_id, cfg.temperature);
    GroupRollout r;
    r.prompt_id = prompt_id;
    for (std::size_t i = 0; i < cfg.group_size; ++i) {
      const int action = old_policy.sample(prompt_id, cfg.temperature, rng);
      r.responses.push_back({action});
      r.rewards.push_back(reward_fn(prompt_id, action));
      r.logp_old.push_back({lp_old[static_cast<std::size_t>(action)]});
      r.logp_ref.push_back({lp_ref[static_cast<std::size_t>(action)]});
      r.logp_new.push_back({lp_old[static_cast<std::size_t>(action)]});
    }
    rollouts.push_back(std::move(r));
  }
  return rollouts;
}

/// Objective under `current`, re-deriving logp_new for each sampled action
/// while rollout actions, rewards, and old/ref log-probs stay fixed. This is
/// the function whose gradient toy_gradient computes.
inline double toy_objective(const ToyCategoricalPolicy& current,
                            const std::vector<GroupRollout>& rollouts, const GRPOConfig& cfg) {
  if (rollouts.empty()) throw ArgumentError("toy_objective: no rollouts");
  double acc = 0.0;
  for (const auto& r : rollouts) {
    GroupRollout updated = r;
    const auto lp = current.log_probs(r.prompt_id, cfg.temperature);
    for (std::size_t i = 0; i < updated.responses.size(); ++i) {
      updated.logp_new[i] = {lp[static_cast<std::size_t>(updated.responses[i][0])]};
    }
    acc += grpo_objective(updated, cfg);
  }
  return acc / static_cast<double>(rollouts.size());
}

/// Analytic gradient of toy_objective with respect to the policy logits.
///
/// For a sampled action a with ratio rho and advantage A, the surrogate term
/// contributes rho*A when the unclipped branch is active and nothing when the
/// clip binds; the KL penalty contributes -beta * (1 - exp(d)), d = logp_ref -
/// logp_new. Both scale the softmax Jacobian (delta_{k,a} - p_k) / temperature.
inline std::map<std::string, std::vector<double>> toy_gradient(
    const ToyCategoricalPolicy& current, const std::vector<GroupRollout>& rollouts,
    const GRPOConfig& cfg) {
  validate(cfg);
  if (rollouts.empty()) throw ArgumentError("toy_gradient: no rollouts");
  std::map<std::string, std::vector<double>> grad;
  const double rollout_scale = 1.0 / static_cast<double>(rollouts.size());
  for (const auto& r : rollouts) {
    validate(r);
    const auto p = current.probs(r.prompt_id, cfg.temperature);
    const auto lp = current.log_probs(r.prompt_id, cfg.temperature);
    auto& g = grad[r.prompt_id];
    g.assign(p.size(), 0.0);
    const auto advantages = normalize_advantages(r.rewards, cfg.std_eps);
    const double group_scale = rollout_scale / static_cast<double>(r.rewards.size());
    for (std::size_t i = 0; i < r.rewards.size(); ++i) {
      const auto a = static_cast<std::size_t>(r.responses[i][0]);
      const double logp_new = lp[a];
      const double rho = std::exp(logp_new - r.logp_old[i][0]);
      const double clipped = std::clamp(rho, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
      const double adv = advantages[i];
      double coeff = 0.0;
      if (rho * adv <= clipped * adv) coeff += rho * adv;  // unclipped branch active
      const double d = r.logp_ref[i][0] - logp_new;
      coeff -= cfg.kl_coeff * (1.0 - std::exp(d));
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double jac = ((k == a ? 1.0 : 0.0) - p[k]) / cfg.temperature;
        g[k] += group_scale * coeff * jac;
      }
    }
  }
  return grad;
}

struct TraceRow {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double objective = 0.0;
  double kl = 0.0;
};

struct TrainResult {
  ToyCategoricalPolicy policy;
  std::vector<TraceRow> trace;
};

/// Desk-scale GRPO loop on the toy policy. The reference policy is a snapshot
/// of the initial one; the old policy refreshes every step; one gradient
/// ascent update per step.
inline TrainResult train_toy(const ToyCategoricalPolicy& init, const ToyRewardFn& reward_fn,
                             std::size_t steps, const GRPOConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  TrainResult out;
  out.policy = init;
  const ToyCategoricalPolicy ref = init;
  std::mt19937_64 rng(seed);
  for (std::size_t step = 0; step < steps; ++step) {
    const ToyCategoricalPolicy old_policy = out.policy;
    const auto rollouts = sample_group_rollouts(old_policy, ref, reward_fn, cfg, rng);

    TraceRow row;
    row.step = step;
    std::size_t n = 0;
    for (const auto& r : rollouts) {
      for (const double reward : r.rewards) {
        row.mean_reward += reward;
        ++n;
      }
      for (std::size_t i = 0; i < r.rewards.size(); ++i) {
        row.kl += kl_estimate(r.logp_new[i], r.logp_ref[i]);
      }
    }
    row.mean_reward /= static_cast<double>(n);
    row.kl /= static_cast<double>(n);
    row.objective = toy_objective(out.policy, rollouts, cfg);

    const auto grad = toy_gradient(out.policy, rollouts, cfg);
    for (auto& [prompt_id, z] : out.policy.logits) {
      const auto& g = grad.at(prompt_id);
      for (std::size_t k = 0; k < z.size(); ++k) z[k] += cfg.learning_rate * g[k];
    }
    out.trace.push_back(row);
  }
  return out;
}

/// Columnar text trace (step, mean_reward, objective, kl), one row per step.
inline void write_reward_trace(const std::vector<TraceRow>& trace,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("write_reward_trace: cannot write " + path.string());
  out << "step\tmean_reward\tobjective\tkl\n";
  char buf[160];
  for (const auto& row : trace) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.10g\t%.10g\t%.10g\n", row.step, row.mean_reward,
                  row.objective, row.kl);
    out << buf;
  }
}

}  // namespace avcap::grpo
