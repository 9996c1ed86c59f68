#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "fequiv/network.hpp"
#include "fequiv/rng.hpp"

namespace fequiv {

// A bijection on {0, ..., n-1} stored as a gather index: applying it to the
// rows of a matrix A gives rows (A[p[0]], A[p[1]], ...). This is the action of
// the permutation matrix P with P[i][p[i]] = 1; columns gathered with the same
// index realize A P^T.
class Permutation {
 public:
  Permutation() = default;
  // Throws DomainError unless `index` is a bijection on 0..n-1.
  explicit Permutation(std::vector<std::size_t> index);

  static Permutation identity(std::size_t n);
  static Permutation random(std::size_t n, Rng& rng);

  std::size_t size() const noexcept { return index_.size(); }
  std::size_t operator[](std::size_t i) const { return index_[i]; }
  const std::vector<std::size_t>& index() const noexcept { return index_; }

  bool is_identity() const noexcept;
  Permutation inverse() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> index_;
};

// compose(second, first) acts as `first` followed by `second`.
Permutation compose(const Permutation& second, const Permutation& first);

// One permutation per hidden layer, (P_1, ..., P_L).
struct PermutationSpec {
  std::vector<Permutation> perms;

  static PermutationSpec identity(const Architecture& arch);
  static PermutationSpec random(const Architecture& arch, Rng& rng);

  // Throws StructuralError when the layer count or sizes disagree.
  void check(const Architecture& arch) const;
  bool is_identity() const noexcept;
  PermutationSpec inverse() const;

  friend bool operator==(const PermutationSpec&, const PermutationSpec&) = default;
};

PermutationSpec compose(const PermutationSpec& second, const PermutationSpec& first);

// Every PermutationSpec of the architecture, in lexicographic order per layer.
// Throws DomainError when prod d_l! exceeds `limit`.
std::vector<PermutationSpec> all_permutation_specs(const Architecture& arch,
                                                   std::size_t limit = 1'000'000);

// W1 <- P1 W1, b1 <- P1 b1; Wl <- Pl Wl P_{l-1}^T, bl <- Pl bl; W_{L+1} <- W_{L+1} P_L^T.
// Entries are moved, never recomputed.
NetworkParams apply_permutation(const Architecture& arch, const NetworkParams& params,
                                const PermutationSpec& spec);

// Per-neuron positive rescaling of hidden layer `layer` (1-based).
struct ScalingSpec {
  std::size_t layer = 1;
  std::vector<double> factors;
};

// Row i of (W^(l), b^(l)) times alpha_i, column i of W^(l+1) divided by
// alpha_i. Requires a positive-homogeneous activation on layer l.
NetworkParams apply_scaling(const Architecture& arch, const NetworkParams& params,
                            const ScalingSpec& spec);

// Rows of (W^(l), b^(l)) and columns of W^(l+1) multiplied by mask entries in
// {-1, +1}. Requires an odd activation on layer l.
NetworkParams apply_sign_flip(const Architecture& arch, const NetworkParams& params,
                              std::size_t layer, std::span<const int> mask);

enum class PoolKind { kMax, kMin, kAvg };

// Non-overlapping row regions I_1..I_K covering 0..rows-1.
struct PoolingPartition {
  std::vector<std::vector<std::size_t>> regions;
  PoolKind kind = PoolKind::kMax;

  // Throws DomainError unless the regions are nonempty, disjoint and cover.
  void check(std::size_t rows) const;
};

// Pooled value of each region, in region order.
std::vector<double> pool(const PoolingPartition& partition, std::span<const double> values);

// Pool(W x + b).
std::vector<double> pooled_forward(const Matrix& weights, std::span<const double> bias,
                                   const PoolingPartition& partition, std::span<const double> x);

struct AffineMap {
  Matrix weights;
  std::vector<double> bias;
};

// Row permutation of (W, b) that must map every region onto itself.
AffineMap apply_pooling_permutation(const Matrix& weights, std::span<const double> bias,
                                    const PoolingPartition& partition, const Permutation& perm);

// Single-head self-attention softmax(X W_Q W_K^T X^T / sqrt(d_k)) X W_V.
Matrix attention(const Matrix& x, const Matrix& query, const Matrix& key, const Matrix& value);

struct AttentionWeights {
  Matrix query;
  Matrix key;
  Matrix value;
};

// (W_Q P, W_K P, W_V) for a d_k x d_k permutation matrix P.
AttentionWeights attention_permutation_equivalent(const Matrix& query, const Matrix& key,
                                                  const Matrix& value, const Matrix& perm);

using VectorMap = std::function<std::vector<double>(std::span<const double>)>;

// True iff max over samples of ||(x + F1(x)) - (x + F2(x))||_inf <= tolerance.
// A sampled check: it cannot certify equivalence on the whole domain.
bool residual_equivalence_check(const VectorMap& inner_a, const VectorMap& inner_b,
                                std::span<const std::vector<double>> samples,
                                double tolerance = 1e-9);

// Default absolute tolerance for sampled function-preservation checks.
inline constexpr double kEquivalenceTolerance = 1e-9;

}  // namespace fequiv
