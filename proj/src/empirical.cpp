#include "fequiv/empirical.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "fequiv/canonical.hpp"
#include "fequiv/equivalence.hpp"
#include "fequiv/errors.hpp"

namespace fequiv {

double MetricSpaceSample::distance(std::size_t i, std::size_t j) const {
  return linf_distance(points[i], points[j]);
}

void MetricSpaceSample::check() const {
  for (const auto& p : points) {
    if (p.size() != points.front().size()) throw StructuralError("sample points differ in dimension");
  }
}

MetricSpaceSample grid_sample(std::size_t dim, std::size_t per_dim, double half_width) {
  if (dim == 0 || per_dim == 0) throw DomainError("grid needs dim >= 1 and per_dim >= 1");
  MetricSpaceSample space;
  space.metric = MetricKind::kLinfParams;
  space.provenance = "grid dim=" + std::to_string(dim) + " per_dim=" + std::to_string(per_dim);
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) total *= per_dim;
  std::vector<std::size_t> idx(dim, 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::vector<double> p(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      p[k] = per_dim == 1 ? 0.0
                          : -half_width + 2.0 * half_width * static_cast<double>(idx[k]) /
                                              static_cast<double>(per_dim - 1);
    }
    space.points.push_back(std::move(p));
    for (std::size_t k = dim; k-- > 0;) {
      if (++idx[k] < per_dim) break;
      idx[k] = 0;
    }
  }
  return space;
}

namespace {

void require_nonempty(const MetricSpaceSample& space, double epsilon) {
  if (space.points.empty()) throw DomainError("metric space sample is empty");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  space.check();
}

constexpr std::size_t kMaxBits = 256;
using Bits = std::bitset<kMaxBits>;

std::vector<Bits> neighborhoods(const MetricSpaceSample& space, double radius, bool closed) {
  const std::size_t n = space.points.size();
  std::vector<Bits> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        if (closed) nb[i].set(j);
      } else if (space.distance(i, j) <= radius) {
        nb[i].set(j);
      }
    }
  }
  return nb;
}

template <typename F>
void for_each_bit(const Bits& b, F&& f) {
  for (std::size_t i = b._Find_first(); i < kMaxBits; i = b._Find_next(i)) f(i);
}

class SetCoverSearch {
 public:
  explicit SetCoverSearch(std::vector<Bits> cover) : cover_(std::move(cover)) {}

  std::size_t solve(std::size_t n) {
    Bits all;
    for (std::size_t i = 0; i < n; ++i) all.set(i);
    best_ = greedy(all) ;
    search(all, 0);
    return best_;
  }

 private:
  std::size_t greedy(Bits uncovered) const {
    std::size_t count = 0;
    while (uncovered.any()) {
      std::size_t best_j = 0;
      std::size_t best_gain = 0;
      for (std::size_t j = 0; j < cover_.size(); ++j) {
        const std::size_t gain = (cover_[j] & uncovered).count();
        if (gain > best_gain) {
          best_gain = gain;
          best_j = j;
        }
      }
      uncovered &= ~cover_[best_j];
      ++count;
    }
    return count;
  }

  // Uncovered points whose candidate center sets are pairwise disjoint each
  // need their own center.
  std::size_t lower_bound(const Bits& uncovered) const {
    std::vector<std::pair<std::size_t, std::size_t>> order;
    for_each_bit(uncovered, [&](std::size_t e) { order.emplace_back(cover_[e].count(), e); });
    std::sort(order.begin(), order.end());
    Bits used;
    std::size_t lb = 0;
    for (const auto& [sz, e] : order) {
      if ((cover_[e] & used).none()) {
        used |= cover_[e];
        ++lb;
      }
    }
    return lb;
  }

  void search(const Bits& uncovered, std::size_t depth) {
    if (uncovered.none()) {
      best_ = std::min(best_, depth);
      return;
    }
    if (depth + lower_bound(uncovered) >= best_) return;
    // Branch on the uncovered point with the fewest candidate centers.
    std::size_t pick = 0;
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for_each_bit(uncovered, [&](std::size_t e) {
      const std::size_t c = cover_[e].count();
      if (c < fewest) {
        fewest = c;
        pick = e;
      }
    });
    std::vector<std::pair<std::size_t, std::size_t>> cands;
    for_each_bit(cover_[pick], [&](std::size_t j) {
      cands.emplace_back((cover_[j] & uncovered).count(), j);
    });
    std::sort(cands.begin(), cands.end(), [](auto a, auto b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    // Drop candidates dominated by an earlier one.
    std::vector<Bits> kept;
    for (const auto& [gain, j] : cands) {
      const Bits gained = cover_[j] & uncovered;
      bool dominated = false;
      for (const auto& k : kept) {
        if ((gained & ~k).none()) {
          dominated = true;
          break;
        }
      }
      if (dominated) continue;
      kept.push_back(gained);
      search(uncovered & ~cover_[j], depth + 1);
    }
  }

  std::vector<Bits> cover_;
  std::size_t best_ = 0;
};

// Maximum clique with greedy-coloring bounds; run on the "compatible" graph
// (distance > 2 eps) it yields the maximum packing.
class MaxCliqueSearch {
 public:
  explicit MaxCliqueSearch(std::vector<Bits> adj) : adj_(std::move(adj)) {}

  std::size_t solve(std::size_t n) {
    Bits all;
    for (std::size_t i = 0; i < n; ++i) all.set(i);
    best_ = 0;
    expand(all, 0);
    return best_;
  }

 private:
  void expand(Bits candidates, std::size_t size) {
    std::vector<std::size_t> order;
    std::vector<std::size_t> colors;
    color_sort(candidates, order, colors);
    for (std::size_t k = order.size(); k-- > 0;) {
      if (size + colors[k] <= best_) return;
      const std::size_t v = order[k];
      const Bits next = candidates & adj_[v];
      if (next.none()) {
        best_ = std::max(best_, size + 1);
      } else {
        expand(next, size + 1);
      }
      candidates.reset(v);
    }
  }

  void color_sort(const Bits& candidates, std::vector<std::size_t>& order,
                  std::vector<std::size_t>& colors) const {
    Bits uncolored = candidates;
    std::size_t color = 0;
    while (uncolored.any()) {
      ++color;
      Bits q = uncolored;
      while (q.any()) {
        const std::size_t v = q._Find_first();
        q.reset(v);
        q &= ~adj_[v];
        uncolored.reset(v);
        order.push_back(v);
        colors.push_back(color);
      }
    }
  }

  std::vector<Bits> adj_;
  std::size_t best_ = 0;
};

void require_small(const MetricSpaceSample& space, std::size_t max_points) {
  if (space.points.size() > std::min(max_points, kMaxBits)) {
    throw DomainError("exact oracle limited to " + std::to_string(std::min(max_points, kMaxBits)) +
                      " points, sample has " + std::to_string(space.points.size()));
  }
}

}  // namespace

std::size_t greedy_covering_estimate(const MetricSpaceSample& space, double epsilon) {
  require_nonempty(space, epsilon);
  const std::size_t n = space.points.size();
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = space.distance(0, i);
  std::size_t centers = 1;
  while (true) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (dist[i] > dist[far]) far = i;
    }
    if (dist[far] <= epsilon) break;
    ++centers;
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], space.distance(far, i));
  }
  return centers;
}

std::size_t greedy_packing_estimate(const MetricSpaceSample& space, double epsilon) {
  require_nonempty(space, epsilon);
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < space.points.size(); ++i) {
    const bool fits = std::all_of(chosen.begin(), chosen.end(), [&](std::size_t j) {
      return space.distance(i, j) > 2.0 * epsilon;
    });
    if (fits) chosen.push_back(i);
  }
  return chosen.size();
}

std::size_t exact_covering_number(const MetricSpaceSample& space, double epsilon,
                                  std::size_t max_points) {
  require_nonempty(space, epsilon);
  require_small(space, max_points);
  SetCoverSearch search(neighborhoods(space, epsilon, true));
  return search.solve(space.points.size());
}

std::size_t exact_packing_number(const MetricSpaceSample& space, double epsilon,
                                 std::size_t max_points) {
  require_nonempty(space, epsilon);
  require_small(space, max_points);
  const std::size_t n = space.points.size();
  std::vector<Bits> compatible(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && space.distance(i, j) > 2.0 * epsilon) compatible[i].set(j);
    }
  }
  MaxCliqueSearch search(std::move(compatible));
  return search.solve(n);
}

FunctionClassSample function_class_sample(const Architecture& arch, double weight_bound,
                                          std::size_t resolution, double input_radius,
                                          std::size_t n_eval_points,
                                          const FunctionClassOptions& options) {
  if (resolution == 0) throw DomainError("grid resolution must be >= 1");
  if (n_eval_points == 0) throw DomainError("need at least one evaluation point");
  if (!(weight_bound > 0.0)) throw DomainError("weight bound must be positive");
  const std::size_t S = arch.param_count();
  // resolution^S against the budget, without overflow.
  double required = std::pow(static_cast<double>(resolution), static_cast<double>(S));
  if (required > static_cast<double>(options.budget)) {
    throw DomainError("grid of " + std::to_string(resolution) + "^" + std::to_string(S) +
                      " parameter points needs a budget of " + std::to_string(required) +
                      ", configured budget is " + std::to_string(options.budget));
  }
  const auto total = static_cast<std::size_t>(std::llround(required));

  FunctionClassSample out;
  out.parameter_points = total;
  out.eval_points = ball_samples(arch.input_dim(), input_radius, n_eval_points, options.eval_seed);
  out.space.metric = MetricKind::kSampledSupFunction;
  out.space.provenance = "function grid resolution=" + std::to_string(resolution) +
                         " B=" + std::to_string(weight_bound) +
                         (options.canonical_dedup ? " canonical-dedup" : "");

  std::vector<double> grid_values(resolution);
  for (std::size_t k = 0; k < resolution; ++k) {
    grid_values[k] = resolution == 1 ? 0.0
                                     : -weight_bound + 2.0 * weight_bound * static_cast<double>(k) /
                                                           static_cast<double>(resolution - 1);
  }
  std::set<std::vector<long long>> seen;
  std::vector<std::size_t> idx(S, 0);
  std::vector<double> theta(S);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t k = 0; k < S; ++k) theta[k] = grid_values[idx[k]];
    NetworkParams params = NetworkParams::unflatten(arch, theta);
    bool keep = true;
    if (options.canonical_dedup) {
      const CanonicalForm form = canonicalize(arch, params);
      std::vector<long long> key;
      for (double v : form.params.flatten()) key.push_back(total_order_key(v));
      keep = seen.insert(std::move(key)).second;
    }
    if (keep) {
      std::vector<double> values;
      values.reserve(out.eval_points.size() * arch.output_dim());
      for (const auto& x : out.eval_points) {
        const auto y = forward(arch, params, x);
        values.insert(values.end(), y.begin(), y.end());
      }
      out.space.points.push_back(std::move(values));
    }
    for (std::size_t k = S; k-- > 0;) {
      if (++idx[k] < resolution) break;
      idx[k] = 0;
    }
  }
  out.distinct_after_dedup = out.space.points.size();
  out.dedup_ratio = static_cast<double>(out.parameter_points) /
                    static_cast<double>(out.distinct_after_dedup);
  return out;
}

}  // namespace fequiv
