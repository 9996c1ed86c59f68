#include "fequiv/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <numeric>
#include <set>
#include <span>

#include "fequiv/errors.hpp"

namespace fequiv {

namespace {

// Lexicographic comparison under the total order on doubles.
std::strong_ordering compare_seq(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = total_order_key(a[i]) <=> total_order_key(b[i]);
    if (c != 0) return c;
  }
  return a.size() <=> b.size();
}

// Row i of layer l as (b_i, W_i[cols[0]], W_i[cols[1]], ...).
std::vector<double> row_key(const Layer& layer, std::size_t i, const Permutation* cols) {
  std::vector<double> key;
  key.reserve(layer.weights.cols + 1);
  key.push_back(layer.bias[i]);
  for (std::size_t c = 0; c < layer.weights.cols; ++c) {
    key.push_back(layer.weights(i, cols ? (*cols)[c] : c));
  }
  return key;
}

// Candidate partial canonicalization: permutations fixed for layers 1..depth.
struct Candidate {
  std::vector<Permutation> perms;
};

// Sorted row order of layer l (descending) given the previous layer's
// permutation, plus the tie groups (runs of identical keys) in that order.
struct SortedLayer {
  std::vector<std::size_t> order;
  std::vector<std::pair<std::size_t, std::size_t>> ties;  // [begin, end) in `order`
  std::vector<std::vector<double>> keys;                   // in sorted order
};

SortedLayer sort_layer(const Layer& layer, const Permutation* prev) {
  const std::size_t n = layer.bias.size();
  std::vector<std::vector<double>> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = row_key(layer, i, prev);
  SortedLayer out;
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
    return compare_seq(keys[a], keys[b]) == std::strong_ordering::greater;
  });
  for (std::size_t i : out.order) out.keys.push_back(keys[i]);
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || compare_seq(out.keys[i], out.keys[begin]) != 0) {
      if (i - begin > 1) out.ties.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

// Every arrangement of the tie groups that can change downstream values.
// Members of a group whose outgoing columns in `next` are bit-equal are
// interchangeable, so only distinct multiset arrangements are produced.
std::vector<std::vector<std::size_t>> tie_arrangements(const SortedLayer& sorted,
                                                       const Layer& next,
                                                       std::size_t cap) {
  std::vector<std::vector<std::size_t>> results{sorted.order};
  for (const auto& [begin, end] : sorted.ties) {
    // Class id per member by outgoing column content.
    std::vector<std::vector<double>> cols;
    std::vector<std::size_t> members(sorted.order.begin() + static_cast<std::ptrdiff_t>(begin),
                                     sorted.order.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::size_t> cls(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
      std::vector<double> col(next.weights.rows);
      for (std::size_t r = 0; r < next.weights.rows; ++r) col[r] = next.weights(r, members[m]);
      std::size_t id = cols.size();
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (bit_equal(cols[k], col)) {
          id = k;
          break;
        }
      }
      if (id == cols.size()) cols.push_back(col);
      cls[m] = id;
    }
    if (cols.size() == 1) continue;
    // Representative member per class, consumed in order for each arrangement.
    std::vector<std::vector<std::size_t>> by_class(cols.size());
    for (std::size_t m = 0; m < members.size(); ++m) by_class[cls[m]].push_back(members[m]);
    std::vector<std::size_t> pattern = cls;
    std::sort(pattern.begin(), pattern.end());
    std::vector<std::vector<std::size_t>> next_results;
    do {
      std::vector<std::size_t> used(cols.size(), 0);
      std::vector<std::size_t> arrangement;
      for (std::size_t c : pattern) arrangement.push_back(by_class[c][used[c]++]);
      for (const auto& base : results) {
        auto order = base;
        std::copy(arrangement.begin(), arrangement.end(),
                  order.begin() + static_cast<std::ptrdiff_t>(begin));
        next_results.push_back(std::move(order));
        if (next_results.size() > cap) return {};
      }
    } while (std::next_permutation(pattern.begin(), pattern.end()));
    results = std::move(next_results);
  }
  return results;
}

constexpr std::size_t kArrangementCap = 1u << 16;
constexpr std::size_t kBeamCap = 1u << 12;

}  // namespace

CanonicalForm canonicalize(const Architecture& arch, const NetworkParams& params) {
  check_shapes(arch, params);
  const std::size_t L = arch.depth();

  // Beam over the lexicographically best prefixes; almost always size 1.
  std::vector<Candidate> beam{Candidate{}};
  for (std::size_t l = 1; l <= L; ++l) {
    const Layer& layer = params.layers[l - 1];
    const Layer& next = params.layers[l];
    std::vector<Candidate> expanded;
    for (const auto& cand : beam) {
      const Permutation* prev = l >= 2 ? &cand.perms[l - 2] : nullptr;
      const SortedLayer sorted = sort_layer(layer, prev);
      auto arrangements = tie_arrangements(sorted, next, kArrangementCap);
      if (arrangements.empty()) {
        // Too many equivalent tie arrangements; keep the stable-sort order.
        // FIXME: orbit invariance is not guaranteed on this path.
        arrangements = {sorted.order};
      }
      for (auto& order : arrangements) {
        Candidate c = cand;
        c.perms.emplace_back(std::move(order));
        expanded.push_back(std::move(c));
      }
    }
    if (expanded.size() == 1) {
      beam = std::move(expanded);
      continue;
    }
    // Score each candidate by what it fixes downstream: the sorted rows of
    // layer l+1 (or W^(L+1) with permuted columns when l == L).
    std::vector<std::vector<double>> scores(expanded.size());
    for (std::size_t k = 0; k < expanded.size(); ++k) {
      const Permutation& p = expanded[k].perms.back();
      if (l < L) {
        const SortedLayer s = sort_layer(next, &p);
        for (const auto& key : s.keys) scores[k].insert(scores[k].end(), key.begin(), key.end());
      } else {
        for (std::size_t r = 0; r < next.weights.rows; ++r)
          for (std::size_t c = 0; c < next.weights.cols; ++c)
            scores[k].push_back(next.weights(r, p[c]));
      }
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < expanded.size(); ++k) {
      if (compare_seq(scores[k], scores[best]) == std::strong_ordering::greater) best = k;
    }
    // Every best-scoring candidate shares the parameter prefix so far; they
    // can only differ downstream through the last permutation.
    std::vector<Candidate> kept;
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t k = 0; k < expanded.size(); ++k) {
      if (compare_seq(scores[k], scores[best]) != 0) continue;
      if (!seen.insert(expanded[k].perms.back().index()).second) continue;
      kept.push_back(std::move(expanded[k]));
      if (kept.size() >= kBeamCap) break;
    }
    beam = std::move(kept);
  }

  CanonicalForm form;
  form.witness.perms = std::move(beam.front().perms);
  form.params = apply_permutation(arch, params, form.witness);
  return form;
}

boost::multiprecision::cpp_int factorial(std::size_t n) {
  boost::multiprecision::cpp_int f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

SymmetryProfile symmetry_profile(const Architecture& arch, const NetworkParams& params,
                                 double row_tolerance) {
  check_shapes(arch, params);
  if (row_tolerance < 0.0) throw DomainError("row tolerance must be nonnegative");
  SymmetryProfile profile;
  profile.delta_min = std::numeric_limits<double>::infinity();
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    const Layer& layer = params.layers[l - 1];
    const std::size_t n = layer.bias.size();
    std::vector<std::vector<double>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      rows[i].assign(layer.weights.row(i).begin(), layer.weights.row(i).end());
      rows[i].push_back(layer.bias[i]);
    }
    // Group identical rows (union-find for the tolerance case).
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool same = row_tolerance == 0.0 ? bit_equal(rows[i], rows[j])
                                               : linf_distance(rows[i], rows[j]) <= row_tolerance;
        if (same) parent[find(i)] = find(j);
      }
    }
    std::vector<std::size_t> multiplicity(n, 0);
    for (std::size_t i = 0; i < n; ++i) ++multiplicity[find(i)];
    boost::multiprecision::cpp_int count = factorial(n);
    for (std::size_t m : multiplicity) count /= factorial(m);
    profile.distinct_perm_counts.push_back(count);
    profile.total_multiplicity *= count;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (find(i) != find(j)) {
          profile.delta_min = std::min(profile.delta_min, linf_distance(rows[i], rows[j]));
        }
      }
    }
  }
  return profile;
}

std::vector<NetworkParams> distinct_permutation_images(const Architecture& arch,
                                                       const NetworkParams& params,
                                                       std::size_t limit) {
  std::vector<NetworkParams> images;
  std::set<std::vector<long long>> seen;
  for (const auto& spec : all_permutation_specs(arch, limit)) {
    NetworkParams image = apply_permutation(arch, params, spec);
    std::vector<long long> key;
    for (double v : image.flatten()) key.push_back(total_order_key(v));
    if (seen.insert(std::move(key)).second) images.push_back(std::move(image));
  }
  return images;
}

VolumeReport effective_volume(const Architecture& arch, double weight_bound) {
  if (!(weight_bound > 0.0)) throw DomainError("weight bound must be positive");
  VolumeReport report;
  report.log_total = static_cast<double>(arch.param_count()) * std::log(2.0 * weight_bound);
  double discount = 0.0;
  for (std::size_t w : arch.hidden_widths()) discount += std::lgamma(static_cast<double>(w) + 1.0);
  report.log_effective = report.log_total - discount;
  constexpr double kMaxLog = 709.0;
  constexpr double kMinLog = -708.0;
  auto linear = [&](double lg) -> std::optional<double> {
    if (lg > kMaxLog || lg < kMinLog) return std::nullopt;
    return std::exp(lg);
  };
  report.total = linear(report.log_total);
  report.effective = linear(report.log_effective);
  return report;
}

}  // namespace fequiv
