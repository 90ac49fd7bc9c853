#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "tuplemax/errors.hpp"

namespace tuplemax {

// Unnormalized per-class scores; entry k is the score of class k.
// Class indices are 0-based throughout.
using Logits = Eigen::VectorXd;

// Loss value together with its gradient with respect to the logits.
// For every loss in this family the gradient entries sum to zero, the entry
// at the true label is <= 0 and every other entry is >= 0.
struct LossResult {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

// A sorted, duplicate-free set of class indices that a decision or a loss
// term is restricted to.
class CandidateTuple {
 public:
  // Sorts the members; rejects empty sets, negative indices and duplicates.
  explicit CandidateTuple(std::vector<int> members);

  const std::vector<int>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool contains(int k) const;

 private:
  std::vector<int> members_;
};

// Distribution over candidate-tuple sizes: weight(n) = probability that an
// inference-time candidate set has n members, n in [2, num_classes].
class TupleSizePrior {
 public:
  explicit TupleSizePrior(std::map<int, double> weights);

  // All probability mass on pairs. This is the default prior: the dominant
  // production scenario is a user choosing between two languages.
  static TupleSizePrior pairwise_only() { return single_size(2); }
  static TupleSizePrior single_size(int n);

  const std::map<int, double>& weights() const { return weights_; }

  // Throws InvalidInputError unless every size lies in [2, num_classes],
  // all weights are nonnegative and they sum to 1 within 1e-9.
  void validate(int num_classes) const;

 private:
  std::map<int, double> weights_;
};

// Monte Carlo settings for the sampled tuple-loss estimator.
struct SamplingConfig {
  std::int64_t num_samples = 1000;
  std::uint64_t seed = 0;
};

// Exact enumeration is refused above this many tuples; callers are directed
// to tuple_loss_sampled. Pairs (the production case) are always O(N).
inline constexpr std::int64_t kEnumerationCap = 10000;

// Number of size-n tuples that contain a fixed label: C(N-1, n-1).
// Saturates instead of overflowing, so comparisons against the cap are safe
// for any N.
std::int64_t count_tuples(int num_classes, int tuple_size);

// Cross-entropy over all N classes:
//   value = log sum_k exp(z_k) - z_y, gradient_k = softmax(z)_k - 1{k=y}.
// Log-sum-exp is stabilized by subtracting the maximum entry.
LossResult softmax_loss(const Logits& logits, int label);

// Mean two-class cross-entropy over the N-1 pairs {label, k}:
//   value = 1/(N-1) * sum_{k != label} [log(exp(z_y) + exp(z_k)) - z_y].
LossResult pairwise_loss(const Logits& logits, int label);

// All size-n tuples containing `label`, in lexicographic member order.
// Throws EnumerationInfeasibleError when C(N-1, n-1) > kEnumerationCap.
std::vector<CandidateTuple> enumerate_tuples(int num_classes, int label, int tuple_size);

// Mean over every size-n tuple S containing the label of
//   log sum_{k in S} exp(z_k) - z_y,
// with the matching mean of restricted-softmax gradients. Exact enumeration;
// refuses above the cap.
LossResult tuple_loss_exact(const Logits& logits, int label, int tuple_size);

// Unbiased Monte Carlo estimate of tuple_loss_exact: draws cfg.num_samples
// tuples, each formed by sampling n-1 distinct distractors uniformly from
// the classes != label. Deterministic given cfg.seed. When only one tuple
// exists (n == N) the sample space is degenerate and the exact value is
// returned.
LossResult tuple_loss_sampled(const Logits& logits, int label, int tuple_size,
                              const SamplingConfig& cfg);

// Prior-weighted sum over tuple sizes: sum_n p_n * L^n(label, z). Sizes with
// p_n = 0 are skipped; each L^n is computed exactly when the enumeration cap
// permits and with the sampled estimator otherwise. Without a SamplingConfig
// an infeasible size propagates EnumerationInfeasibleError.
LossResult tuplemax_loss(const Logits& logits, int label, const TupleSizePrior& prior,
                         const std::optional<SamplingConfig>& sampling = std::nullopt);

}  // namespace tuplemax
