#include "tuplemax/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tuplemax/rng.hpp"

namespace tuplemax {

namespace {

void check_logits(const Logits& z) {
  if (z.size() < 2) throw InvalidInputError("logits: need at least 2 classes");
  if (!z.allFinite()) throw InvalidInputError("logits: entries must be finite");
}

void check_label(const Logits& z, int label) {
  if (label < 0 || label >= z.size())
    throw InvalidInputError("label " + std::to_string(label) + " out of range for " +
                            std::to_string(z.size()) + " classes");
}

void check_tuple_size(int num_classes, int tuple_size) {
  if (tuple_size < 2 || tuple_size > num_classes)
    throw InvalidInputError("tuple size " + std::to_string(tuple_size) +
                            " outside [2, " + std::to_string(num_classes) + "]");
}

// log sum_{k in members} exp(z_k), max-subtracted.
double log_sum_exp(const Logits& z, const std::vector<int>& members) {
  double hi = -std::numeric_limits<double>::infinity();
  for (int k : members) hi = std::max(hi, z[k]);
  double total = 0.0;
  for (int k : members) total += std::exp(z[k] - hi);
  return hi + std::log(total);
}

// Adds the loss of one tuple to (value, gradient): the tuple's log-sum-exp
// minus z_y, and the restricted softmax scattered to full length. The
// one-hot(y) part of the gradient is applied once by the caller.
double accumulate_tuple(const Logits& z, const std::vector<int>& members,
                        int label, Eigen::VectorXd& gradient) {
  const double lse = log_sum_exp(z, members);
  for (int k : members) gradient[k] += std::exp(z[k] - lse);
  return lse - z[label];
}

// Lexicographic (n-1)-combinations out of the pool of classes != label.
// `indices` holds positions into `pool`; returns false when exhausted.
bool advance_combination(std::vector<int>& indices, int pool_size) {
  const int r = static_cast<int>(indices.size());
  for (int i = r - 1; i >= 0; --i) {
    if (indices[i] < pool_size - (r - i)) {
      ++indices[i];
      for (int j = i + 1; j < r; ++j) indices[j] = indices[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<int> distractor_pool(int num_classes, int label) {
  std::vector<int> pool;
  pool.reserve(num_classes - 1);
  for (int k = 0; k < num_classes; ++k)
    if (k != label) pool.push_back(k);
  return pool;
}

}  // namespace

CandidateTuple::CandidateTuple(std::vector<int> members) : members_(std::move(members)) {
  if (members_.empty()) throw InvalidInputError("candidate tuple: empty");
  std::sort(members_.begin(), members_.end());
  if (members_.front() < 0) throw InvalidInputError("candidate tuple: negative class index");
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
    throw InvalidInputError("candidate tuple: duplicate class index");
}

bool CandidateTuple::contains(int k) const {
  return std::binary_search(members_.begin(), members_.end(), k);
}

TupleSizePrior::TupleSizePrior(std::map<int, double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidInputError("tuple-size prior: empty");
  double total = 0.0;
  for (const auto& [n, p] : weights_) {
    if (n < 2) throw InvalidInputError("tuple-size prior: size " + std::to_string(n) + " < 2");
    if (!(p >= 0.0)) throw InvalidInputError("tuple-size prior: negative weight");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidInputError("tuple-size prior: weights sum to " + std::to_string(total) +
                            ", expected 1");
}

TupleSizePrior TupleSizePrior::single_size(int n) {
  return TupleSizePrior(std::map<int, double>{{n, 1.0}});
}

void TupleSizePrior::validate(int num_classes) const {
  if (weights_.rbegin()->first > num_classes)
    throw InvalidInputError("tuple-size prior: size " + std::to_string(weights_.rbegin()->first) +
                            " exceeds class count " + std::to_string(num_classes));
}

std::int64_t count_tuples(int num_classes, int tuple_size) {
  check_tuple_size(num_classes, tuple_size);
  const int m = num_classes - 1;
  int r = tuple_size - 1;
  r = std::min(r, m - r);
  constexpr std::int64_t saturation = std::int64_t{1} << 62;
  unsigned __int128 acc = 1;
  for (int i = 1; i <= r; ++i) {
    acc = acc * static_cast<unsigned>(m - r + i) / static_cast<unsigned>(i);
    if (acc > static_cast<unsigned __int128>(saturation)) return saturation;
  }
  return static_cast<std::int64_t>(acc);
}

LossResult softmax_loss(const Logits& z, int label) {
  check_logits(z);
  check_label(z, label);
  const double hi = z.maxCoeff();
  Eigen::VectorXd expz = (z.array() - hi).exp();
  const double total = expz.sum();
  LossResult out;
  out.value = hi + std::log(total) - z[label];
  out.gradient = expz / total;
  out.gradient[label] -= 1.0;
  return out;
}

LossResult pairwise_loss(const Logits& z, int label) {
  check_logits(z);
  check_label(z, label);
  const int n = static_cast<int>(z.size());
  LossResult out;
  out.value = 0.0;
  out.gradient = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    if (k == label) continue;
    const double hi = std::max(z[label], z[k]);
    const double lo = std::min(z[label], z[k]);
    out.value += hi + std::log(1.0 + std::exp(lo - hi)) - z[label];
    // d/dz_k of the pair term is sigmoid(z_k - z_y); d/dz_y is its negative.
    const double s = 1.0 / (1.0 + std::exp(z[label] - z[k]));
    out.gradient[k] += s;
    out.gradient[label] -= s;
  }
  out.value /= n - 1;
  out.gradient /= n - 1;
  return out;
}

std::vector<CandidateTuple> enumerate_tuples(int num_classes, int label, int tuple_size) {
  check_tuple_size(num_classes, tuple_size);
  if (label < 0 || label >= num_classes) throw InvalidInputError("label out of range");
  const std::int64_t count = count_tuples(num_classes, tuple_size);
  if (count > kEnumerationCap)
    throw EnumerationInfeasibleError(
        "enumerating " + std::to_string(count) + " tuples exceeds cap " +
        std::to_string(kEnumerationCap) + "; use tuple_loss_sampled");

  const std::vector<int> pool = distractor_pool(num_classes, label);
  const int r = tuple_size - 1;
  std::vector<int> indices(r);
  for (int i = 0; i < r; ++i) indices[i] = i;

  std::vector<CandidateTuple> tuples;
  tuples.reserve(static_cast<std::size_t>(count));
  std::vector<int> members(tuple_size);
  do {
    members.clear();
    for (int i : indices) members.push_back(pool[i]);
    members.push_back(label);
    tuples.push_back(CandidateTuple(members));  // sorts; lexicographic order is preserved
  } while (r > 0 && advance_combination(indices, static_cast<int>(pool.size())));
  return tuples;
}

LossResult tuple_loss_exact(const Logits& z, int label, int tuple_size) {
  check_logits(z);
  check_label(z, label);
  const int n = static_cast<int>(z.size());
  check_tuple_size(n, tuple_size);
  const std::int64_t count = count_tuples(n, tuple_size);
  if (count > kEnumerationCap)
    throw EnumerationInfeasibleError(
        "tuple_loss_exact: " + std::to_string(count) + " tuples exceed cap " +
        std::to_string(kEnumerationCap) + "; use tuple_loss_sampled");

  const std::vector<int> pool = distractor_pool(n, label);
  const int r = tuple_size - 1;
  std::vector<int> indices(r);
  for (int i = 0; i < r; ++i) indices[i] = i;

  LossResult out;
  out.value = 0.0;
  out.gradient = Eigen::VectorXd::Zero(n);
  std::vector<int> members(tuple_size);
  do {
    members.clear();
    members.push_back(label);
    for (int i : indices) members.push_back(pool[i]);
    out.value += accumulate_tuple(z, members, label, out.gradient);
  } while (r > 0 && advance_combination(indices, static_cast<int>(pool.size())));

  out.value /= static_cast<double>(count);
  out.gradient /= static_cast<double>(count);
  out.gradient[label] -= 1.0;
  return out;
}

LossResult tuple_loss_sampled(const Logits& z, int label, int tuple_size,
                              const SamplingConfig& cfg) {
  check_logits(z);
  check_label(z, label);
  const int n = static_cast<int>(z.size());
  check_tuple_size(n, tuple_size);
  if (cfg.num_samples < 1) throw InvalidInputError("sampling: num_samples must be >= 1");

  // Degenerate sample space: a single tuple exists, the estimator is exact.
  if (tuple_size == n) return tuple_loss_exact(z, label, tuple_size);

  Rng rng(cfg.seed);
  std::vector<int> pool = distractor_pool(n, label);
  const int r = tuple_size - 1;

  LossResult out;
  out.value = 0.0;
  out.gradient = Eigen::VectorXd::Zero(n);
  std::vector<int> members(tuple_size);
  for (std::int64_t s = 0; s < cfg.num_samples; ++s) {
    // Partial Fisher-Yates: the first r pool entries become a uniform draw
    // of r distinct distractors.
    for (int i = 0; i < r; ++i) {
      const std::size_t j = i + rng.uniform_int(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    members.clear();
    members.push_back(label);
    members.insert(members.end(), pool.begin(), pool.begin() + r);
    out.value += accumulate_tuple(z, members, label, out.gradient);
  }
  out.value /= static_cast<double>(cfg.num_samples);
  out.gradient /= static_cast<double>(cfg.num_samples);
  out.gradient[label] -= 1.0;
  return out;
}

LossResult tuplemax_loss(const Logits& z, int label, const TupleSizePrior& prior,
                         const std::optional<SamplingConfig>& sampling) {
  check_logits(z);
  check_label(z, label);
  const int n = static_cast<int>(z.size());
  prior.validate(n);

  LossResult out;
  out.value = 0.0;
  out.gradient = Eigen::VectorXd::Zero(n);
  for (const auto& [size, p] : prior.weights()) {
    if (p == 0.0) continue;
    LossResult term;
    if (count_tuples(n, size) <= kEnumerationCap) {
      term = tuple_loss_exact(z, label, size);
    } else if (sampling) {
      SamplingConfig per_size = *sampling;
      per_size.seed = Rng::derive_seed(sampling->seed, static_cast<std::uint64_t>(size));
      term = tuple_loss_sampled(z, label, size, per_size);
    } else {
      throw EnumerationInfeasibleError(
          "tuplemax_loss: size " + std::to_string(size) +
          " exceeds the enumeration cap and no SamplingConfig was given");
    }
    out.value += p * term.value;
    out.gradient += p * term.gradient;
  }
  return out;
}

}  // namespace tuplemax
