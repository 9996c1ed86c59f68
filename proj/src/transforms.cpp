#include "fequiv/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fequiv/errors.hpp"

namespace fequiv {

Permutation::Permutation(std::vector<std::size_t> index) : index_(std::move(index)) {
  std::vector<bool> seen(index_.size(), false);
  for (std::size_t v : index_) {
    if (v >= index_.size() || seen[v]) throw DomainError("not a permutation");
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return Permutation(std::move(idx));
}

Permutation Permutation::random(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return Permutation(std::move(idx));
}

bool Permutation::is_identity() const noexcept {
  for (std::size_t i = 0; i < index_.size(); ++i) {
    if (index_[i] != i) return false;
  }
  return true;
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(index_.size());
  for (std::size_t i = 0; i < index_.size(); ++i) inv[index_[i]] = i;
  return Permutation(std::move(inv));
}

Permutation compose(const Permutation& second, const Permutation& first) {
  if (second.size() != first.size()) throw StructuralError("permutation sizes differ");
  // (P2 P1 A)[i] = (P1 A)[p2[i]] = A[p1[p2[i]]].
  std::vector<std::size_t> idx(first.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = first[second[i]];
  return Permutation(std::move(idx));
}

PermutationSpec PermutationSpec::identity(const Architecture& arch) {
  PermutationSpec spec;
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    spec.perms.push_back(Permutation::identity(arch.width(l)));
  }
  return spec;
}

PermutationSpec PermutationSpec::random(const Architecture& arch, Rng& rng) {
  PermutationSpec spec;
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    spec.perms.push_back(Permutation::random(arch.width(l), rng));
  }
  return spec;
}

void PermutationSpec::check(const Architecture& arch) const {
  if (perms.size() != arch.depth()) {
    throw StructuralError("permutation spec has " + std::to_string(perms.size()) +
                          " layers, architecture has " + std::to_string(arch.depth()));
  }
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    if (perms[l - 1].size() != arch.width(l)) {
      throw StructuralError("permutation size mismatch at layer " + std::to_string(l));
    }
  }
}

bool PermutationSpec::is_identity() const noexcept {
  return std::all_of(perms.begin(), perms.end(),
                     [](const Permutation& p) { return p.is_identity(); });
}

PermutationSpec PermutationSpec::inverse() const {
  PermutationSpec out;
  for (const auto& p : perms) out.perms.push_back(p.inverse());
  return out;
}

PermutationSpec compose(const PermutationSpec& second, const PermutationSpec& first) {
  if (second.perms.size() != first.perms.size()) throw StructuralError("spec depths differ");
  PermutationSpec out;
  for (std::size_t l = 0; l < first.perms.size(); ++l) {
    out.perms.push_back(compose(second.perms[l], first.perms[l]));
  }
  return out;
}

std::vector<PermutationSpec> all_permutation_specs(const Architecture& arch,
                                                   std::size_t limit) {
  std::vector<std::vector<Permutation>> per_layer;
  std::size_t total = 1;
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    std::vector<Permutation> layer;
    std::vector<std::size_t> idx(arch.width(l));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    do {
      layer.emplace_back(idx);
      if (layer.size() > limit) throw DomainError("too many permutations to enumerate");
    } while (std::next_permutation(idx.begin(), idx.end()));
    if (total > limit / layer.size()) throw DomainError("too many permutations to enumerate");
    total *= layer.size();
    per_layer.push_back(std::move(layer));
  }
  std::vector<PermutationSpec> out;
  out.reserve(total);
  std::vector<std::size_t> counter(per_layer.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    PermutationSpec spec;
    for (std::size_t l = 0; l < per_layer.size(); ++l) spec.perms.push_back(per_layer[l][counter[l]]);
    out.push_back(std::move(spec));
    for (std::size_t l = per_layer.size(); l-- > 0;) {
      if (++counter[l] < per_layer[l].size()) break;
      counter[l] = 0;
    }
  }
  return out;
}

namespace {

Matrix gather(const Matrix& m, const Permutation* rows, const Permutation* cols) {
  Matrix out(m.rows, m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const std::size_t src_r = rows ? (*rows)[r] : r;
    for (std::size_t c = 0; c < m.cols; ++c) {
      out(r, c) = m(src_r, cols ? (*cols)[c] : c);
    }
  }
  return out;
}

std::vector<double> gather(const std::vector<double>& v, const Permutation& p) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[p[i]];
  return out;
}

void check_hidden_layer(const Architecture& arch, std::size_t layer) {
  if (layer == 0 || layer > arch.depth()) throw DomainError("hidden layer index out of range");
}

}  // namespace

NetworkParams apply_permutation(const Architecture& arch, const NetworkParams& params,
                                const PermutationSpec& spec) {
  check_shapes(arch, params);
  spec.check(arch);
  const std::size_t L = arch.depth();
  NetworkParams out;
  out.layers.reserve(L + 1);
  for (std::size_t l = 1; l <= L + 1; ++l) {
    const Layer& in = params.layers[l - 1];
    const Permutation* rows = l <= L ? &spec.perms[l - 1] : nullptr;
    const Permutation* cols = l >= 2 ? &spec.perms[l - 2] : nullptr;
    Layer layer{gather(in.weights, rows, cols), rows ? gather(in.bias, *rows) : in.bias};
    out.layers.push_back(std::move(layer));
  }
  return out;
}

NetworkParams apply_scaling(const Architecture& arch, const NetworkParams& params,
                            const ScalingSpec& spec) {
  check_shapes(arch, params);
  check_hidden_layer(arch, spec.layer);
  if (!arch.activation(spec.layer).is_positive_homogeneous()) {
    throw UnsupportedTransformError("scaling requires a positive-homogeneous activation, layer " +
                                    std::to_string(spec.layer) + " uses " +
                                    arch.activation(spec.layer).name());
  }
  if (spec.factors.size() != arch.width(spec.layer)) {
    throw StructuralError("scaling factor count does not match layer width");
  }
  for (double a : spec.factors) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("scaling factors must be positive");
  }
  NetworkParams out = params;
  Layer& cur = out.layers[spec.layer - 1];
  Layer& next = out.layers[spec.layer];
  for (std::size_t i = 0; i < spec.factors.size(); ++i) {
    const double a = spec.factors[i];
    if (a == 1.0) continue;
    for (double& w : cur.weights.row(i)) w *= a;
    cur.bias[i] *= a;
    for (std::size_t r = 0; r < next.weights.rows; ++r) next.weights(r, i) /= a;
  }
  return out;
}

NetworkParams apply_sign_flip(const Architecture& arch, const NetworkParams& params,
                              std::size_t layer, std::span<const int> mask) {
  check_shapes(arch, params);
  check_hidden_layer(arch, layer);
  if (!arch.activation(layer).is_odd()) {
    throw UnsupportedTransformError("sign flip requires an odd activation, layer " +
                                    std::to_string(layer) + " uses " +
                                    arch.activation(layer).name());
  }
  if (mask.size() != arch.width(layer)) throw StructuralError("mask length mismatch");
  for (int s : mask) {
    if (s != 1 && s != -1) throw DomainError("sign mask entries must be +1 or -1");
  }
  NetworkParams out = params;
  Layer& cur = out.layers[layer - 1];
  Layer& next = out.layers[layer];
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 1) continue;
    for (double& w : cur.weights.row(i)) w = -w;
    cur.bias[i] = -cur.bias[i];
    for (std::size_t r = 0; r < next.weights.rows; ++r) next.weights(r, i) = -next.weights(r, i);
  }
  return out;
}

void PoolingPartition::check(std::size_t rows) const {
  std::vector<bool> seen(rows, false);
  std::size_t count = 0;
  for (const auto& region : regions) {
    if (region.empty()) throw DomainError("pooling region is empty");
    for (std::size_t r : region) {
      if (r >= rows || seen[r]) throw DomainError("pooling regions overlap or exceed rows");
      seen[r] = true;
      ++count;
    }
  }
  if (count != rows) throw DomainError("pooling regions do not cover every row");
}

std::vector<double> pool(const PoolingPartition& partition, std::span<const double> values) {
  partition.check(values.size());
  std::vector<double> out;
  out.reserve(partition.regions.size());
  for (const auto& region : partition.regions) {
    double acc = values[region.front()];
    switch (partition.kind) {
      case PoolKind::kMax:
        for (std::size_t r : region) acc = std::max(acc, values[r]);
        break;
      case PoolKind::kMin:
        for (std::size_t r : region) acc = std::min(acc, values[r]);
        break;
      case PoolKind::kAvg: {
        // Summed in sorted order so the value depends only on the multiset.
        std::vector<double> v;
        for (std::size_t r : region) v.push_back(values[r]);
        std::sort(v.begin(), v.end());
        acc = 0.0;
        for (double x : v) acc += x;
        acc /= static_cast<double>(v.size());
        break;
      }
    }
    out.push_back(acc);
  }
  return out;
}

std::vector<double> pooled_forward(const Matrix& weights, std::span<const double> bias,
                                   const PoolingPartition& partition, std::span<const double> x) {
  if (weights.cols != x.size() || weights.rows != bias.size()) {
    throw StructuralError("pooled_forward: shape mismatch");
  }
  std::vector<double> z(bias.begin(), bias.end());
  for (std::size_t r = 0; r < weights.rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < weights.cols; ++c) acc += weights(r, c) * x[c];
    z[r] += acc;
  }
  return pool(partition, z);
}

AffineMap apply_pooling_permutation(const Matrix& weights, std::span<const double> bias,
                                    const PoolingPartition& partition, const Permutation& perm) {
  if (weights.rows != bias.size() || perm.size() != weights.rows) {
    throw StructuralError("pooling permutation: shape mismatch");
  }
  partition.check(weights.rows);
  std::vector<std::size_t> region_of(weights.rows);
  for (std::size_t k = 0; k < partition.regions.size(); ++k) {
    for (std::size_t r : partition.regions[k]) region_of[r] = k;
  }
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (region_of[perm[i]] != region_of[i]) {
      throw DomainError("permutation moves row " + std::to_string(perm[i]) +
                        " across a pooling region boundary");
    }
  }
  AffineMap out{Matrix(weights.rows, weights.cols), std::vector<double>(bias.size())};
  for (std::size_t r = 0; r < weights.rows; ++r) {
    for (std::size_t c = 0; c < weights.cols; ++c) out.weights(r, c) = weights(perm[r], c);
    out.bias[r] = bias[perm[r]];
  }
  return out;
}

Matrix attention(const Matrix& x, const Matrix& query, const Matrix& key, const Matrix& value) {
  if (x.cols != query.rows || x.cols != key.rows || x.cols != value.rows ||
      query.cols != key.cols) {
    throw StructuralError("attention: shape mismatch");
  }
  const Matrix q = matmul(x, query);
  const Matrix k = matmul(x, key);
  const Matrix v = matmul(x, value);
  const double scale = 1.0 / std::sqrt(static_cast<double>(query.cols));
  Matrix scores = matmul(q, transpose(k));
  for (std::size_t i = 0; i < scores.rows; ++i) {
    auto row = scores.row(i);
    double m = -std::numeric_limits<double>::infinity();
    for (double& s : row) {
      s *= scale;
      m = std::max(m, s);
    }
    double total = 0.0;
    for (double& s : row) {
      s = std::exp(s - m);
      total += s;
    }
    for (double& s : row) s /= total;
  }
  return matmul(scores, v);
}

AttentionWeights attention_permutation_equivalent(const Matrix& query, const Matrix& key,
                                                  const Matrix& value, const Matrix& perm) {
  if (perm.rows != perm.cols || perm.rows != query.cols || query.cols != key.cols) {
    throw StructuralError("attention permutation: shape mismatch");
  }
  std::vector<std::size_t> col_source(perm.cols, perm.rows);
  for (std::size_t r = 0; r < perm.rows; ++r) {
    std::size_t ones = 0;
    for (std::size_t c = 0; c < perm.cols; ++c) {
      const double v = perm(r, c);
      if (v == 1.0) {
        ++ones;
        if (col_source[c] != perm.rows) throw DomainError("not a permutation matrix");
        col_source[c] = r;
      } else if (v != 0.0) {
        throw DomainError("not a permutation matrix");
      }
    }
    if (ones != 1) throw DomainError("not a permutation matrix");
  }
  // (W P)[:, c] = W[:, r] where P[r][c] = 1; a column gather, exact.
  auto gather_cols = [&](const Matrix& w) {
    Matrix out(w.rows, w.cols);
    for (std::size_t i = 0; i < w.rows; ++i)
      for (std::size_t c = 0; c < w.cols; ++c) out(i, c) = w(i, col_source[c]);
    return out;
  };
  return {gather_cols(query), gather_cols(key), value};
}

bool residual_equivalence_check(const VectorMap& inner_a, const VectorMap& inner_b,
                                std::span<const std::vector<double>> samples, double tolerance) {
  double sup = 0.0;
  for (const auto& x : samples) {
    const auto fa = inner_a(x);
    const auto fb = inner_b(x);
    if (fa.size() != x.size() || fb.size() != x.size()) {
      throw StructuralError("residual inner map must preserve the input dimension");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      sup = std::max(sup, std::abs((x[i] + fa[i]) - (x[i] + fb[i])));
    }
  }
  return sup <= tolerance;
}

}  // namespace fequiv
