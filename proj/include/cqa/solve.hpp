#pragma once

// Exact solvers over hypergraphs.
//
// Independent sets are complements of hitting sets (vertex sets meeting every
// hyperedge), so every routine here searches hitting sets:
//   alpha(h)            = |V| - tau(h)
//   maximal independent = complement of an inclusion-minimal hitting set
//   maximum independent = complement of a minimum hitting set
//
// Two search procedures are kept apart on purpose:
//   * HittingSetEngine: branch and bound with a disjoint-packing lower bound,
//     used for alpha, weighted alpha and the enumerations;
//   * min_hitting_set: the plain bounded search tree of depth k for the
//     d-hitting-set decision problem, used by the incremental path.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "cqa/error.hpp"
#include "cqa/hypergraph.hpp"
#include "cqa/model.hpp"

namespace cqa {

struct SolveBudget {
    std::size_t max_vertices = 1'000'000;
    /// Cap on the depth k of the bounded hitting-set search.
    std::size_t max_depth = 64;
    std::optional<std::chrono::milliseconds> time_limit;
    std::size_t max_nodes = 200'000'000;
};

struct SolveStats {
    std::size_t nodes = 0;
    std::size_t max_depth = 0;
    std::size_t solver_calls = 0;
};

struct AlphaResult {
    std::size_t size = 0;
    VertexSet witness;
};

struct WeightedAlphaResult {
    Weight weight = 0;
    VertexSet witness;
};

struct HittingSetResult {
    std::size_t size = 0;
    VertexSet witness;
};

namespace detail {

enum class Mark : std::uint8_t { free, hit, independent };

inline void check_vertex_budget(const Hypergraph& h, const SolveBudget& budget) {
    if (h.vertex_count() > budget.max_vertices)
        throw BudgetExceeded("hypergraph has " + std::to_string(h.vertex_count()) + " vertices, budget is " +
                             std::to_string(budget.max_vertices));
}

class SearchClock {
public:
    SearchClock(const SolveBudget& budget, SolveStats* stats) : budget_(budget), stats_(stats) {
        if (budget.time_limit) deadline_ = std::chrono::steady_clock::now() + *budget.time_limit;
    }

    void tick(std::size_t depth) {
        ++nodes_;
        if (stats_) {
            ++stats_->nodes;
            stats_->max_depth = std::max(stats_->max_depth, depth);
        }
        if (nodes_ > budget_.max_nodes) throw BudgetExceeded("search node budget exhausted");
        if (deadline_ && (nodes_ & 1023U) == 0 && std::chrono::steady_clock::now() > *deadline_)
            throw BudgetExceeded("search time limit exceeded");
    }

private:
    const SolveBudget& budget_;
    SolveStats* stats_;
    std::size_t nodes_ = 0;
    std::optional<std::chrono::steady_clock::time_point> deadline_;
};

/// Branch and bound over hitting sets of the non-isolated part of a
/// hypergraph, with vertex costs. Branching is disjoint: for the chosen
/// unhit edge with free vertices u1..ur, branch j puts u1..u(j-1) into the
/// independent side and uj into the hitting set, so each hitting set is
/// reached along exactly one path.
template <typename Cost>
class HittingSetEngine {
public:
    using Fixed = std::vector<std::pair<VertexId, Mark>>;

    HittingSetEngine(const Hypergraph& h, std::function<Cost(VertexId)> cost, const SolveBudget& budget,
                     SolveStats* stats)
        : clock_(budget, stats) {
        check_vertex_budget(h, budget);
        if (stats) ++stats->solver_calls;
        std::vector<std::int64_t> local(h.universe(), -1);
        for (const auto& e : h.edges())
            for (auto v : e.vertices) local[v] = 0;
        for (auto v : h.vertices())
            if (local[v] == 0) {
                local[v] = static_cast<std::int64_t>(global_.size());
                global_.push_back(v);
            }
        local_ = std::move(local);
        cost_.reserve(global_.size());
        for (auto v : global_) cost_.push_back(cost(v));
        degree_.assign(global_.size(), 0);
        for (const auto& e : h.edges()) {
            std::vector<std::uint32_t> le;
            for (auto v : e.vertices) le.push_back(static_cast<std::uint32_t>(local_[v]));
            for (auto u : le) ++degree_[u];
            edges_.push_back(std::move(le));
        }
        incident_.assign(global_.size(), {});
        for (std::uint32_t i = 0; i < edges_.size(); ++i)
            for (auto u : edges_[i]) incident_[u].push_back(i);
        mark_.assign(global_.size(), Mark::free);
        stamp_.assign(global_.size(), 0);
    }

    /// Vertices that lie on some hyperedge, ascending.
    const VertexSet& conflict_vertices() const noexcept { return global_; }

    /// Minimum-cost hitting set respecting `fixed`; nullopt if none exists.
    std::optional<std::pair<Cost, VertexSet>> optimize(const Fixed& fixed = {}) {
        if (!reset(fixed)) return std::nullopt;
        mode_ = Mode::optimize;
        best_.reset();
        search(base_cost_, 0);
        if (!best_) return std::nullopt;
        return std::make_pair(*best_, best_set_);
    }

    /// Whether a hitting set of cost <= target respects `fixed`.
    bool feasible(const Fixed& fixed, Cost target) {
        if (!reset(fixed)) return false;
        mode_ = Mode::feasible;
        target_ = target;
        found_ = false;
        search(base_cost_, 0);
        return found_;
    }

    /// All hitting sets with cost exactly `target` (the optimum).
    std::vector<VertexSet> all_with_cost(Cost target) {
        results_.clear();
        if (!reset({})) return {};
        mode_ = Mode::enumerate_optimal;
        target_ = target;
        search(base_cost_, 0);
        return std::move(results_);
    }

    /// All inclusion-minimal hitting sets.
    std::vector<VertexSet> all_minimal() {
        results_.clear();
        if (!reset({})) return {};
        mode_ = Mode::enumerate_minimal;
        search(base_cost_, 0);
        return std::move(results_);
    }

    std::optional<std::uint32_t> local(VertexId v) const {
        if (v >= local_.size() || local_[v] < 0) return std::nullopt;
        return static_cast<std::uint32_t>(local_[v]);
    }

private:
    enum class Mode { optimize, feasible, enumerate_optimal, enumerate_minimal };

    bool reset(const Fixed& fixed) {
        std::fill(mark_.begin(), mark_.end(), Mark::free);
        base_cost_ = Cost(0);
        for (const auto& [v, m] : fixed) {
            auto l = local(v);
            if (!l) {
                // An isolated vertex is never needed in a hitting set; forcing it
                // in only costs.
                if (m == Mark::hit) return false;
                continue;
            }
            mark_[*l] = m;
            if (m == Mark::hit) base_cost_ += cost_[*l];
        }
        return true;
    }

    VertexSet current_hitting_set() const {
        VertexSet out;
        for (std::size_t i = 0; i < global_.size(); ++i)
            if (mark_[i] == Mark::hit) out.push_back(global_[i]);
        return out;
    }

    bool is_hit(const std::vector<std::uint32_t>& e) const {
        return std::any_of(e.begin(), e.end(), [&](std::uint32_t u) { return mark_[u] == Mark::hit; });
    }

    // Every hit vertex still has an edge that no other hit vertex covers.
    bool hit_vertices_have_private_edges() const {
        for (std::size_t u = 0; u < global_.size(); ++u) {
            if (mark_[u] != Mark::hit) continue;
            bool has_private = false;
            for (auto ei : incident_[u]) {
                const auto& e = edges_[ei];
                if (std::none_of(e.begin(), e.end(), [&](std::uint32_t w) { return w != u && mark_[w] == Mark::hit; })) {
                    has_private = true;
                    break;
                }
            }
            if (!has_private) return false;
        }
        return true;
    }

    void search(Cost cost, std::size_t depth) {
        clock_.tick(depth);
        if (mode_ == Mode::feasible && found_) return;

        // Pick the unhit edge with fewest free vertices; collect a disjoint
        // packing of unhit edges for the lower bound.
        ++stamp_round_;
        Cost packing = Cost(0);
        std::int64_t chosen = -1;
        std::size_t chosen_free = std::numeric_limits<std::size_t>::max();
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const auto& e = edges_[i];
            if (is_hit(e)) continue;
            std::size_t free = 0;
            bool disjoint = true;
            std::optional<Cost> cheapest;
            for (auto u : e) {
                if (mark_[u] != Mark::free) continue;
                ++free;
                if (stamp_[u] == stamp_round_) disjoint = false;
                if (!cheapest || cost_[u] < *cheapest) cheapest = cost_[u];
            }
            if (free == 0) return;  // every vertex committed to the independent side
            if (disjoint) {
                packing += *cheapest;
                for (auto u : e)
                    if (mark_[u] == Mark::free) stamp_[u] = stamp_round_;
            }
            if (free < chosen_free) {
                chosen_free = free;
                chosen = static_cast<std::int64_t>(i);
            }
        }

        const Cost bound = cost + packing;
        switch (mode_) {
            case Mode::optimize:
                if (best_ && bound >= *best_) return;
                break;
            case Mode::feasible:
            case Mode::enumerate_optimal:
                if (bound > target_) return;
                break;
            case Mode::enumerate_minimal:
                if (!hit_vertices_have_private_edges()) return;
                break;
        }

        if (chosen < 0) {
            leaf(cost);
            return;
        }

        std::vector<std::uint32_t> order;
        for (auto u : edges_[static_cast<std::size_t>(chosen)])
            if (mark_[u] == Mark::free) order.push_back(u);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (degree_[a] != degree_[b]) return degree_[a] > degree_[b];
            return a < b;
        });
        std::size_t j = 0;
        for (; j < order.size(); ++j) {
            mark_[order[j]] = Mark::hit;
            search(cost + cost_[order[j]], depth + 1);
            mark_[order[j]] = Mark::independent;
            if (mode_ == Mode::feasible && found_) break;
        }
        for (std::size_t i = 0; i < order.size(); ++i) mark_[order[i]] = Mark::free;
    }

    void leaf(Cost cost) {
        switch (mode_) {
            case Mode::optimize:
                if (!best_ || cost < *best_) {
                    best_ = cost;
                    best_set_ = current_hitting_set();
                }
                break;
            case Mode::feasible:
                if (cost <= target_) found_ = true;
                break;
            case Mode::enumerate_optimal:
                if (cost == target_) results_.push_back(current_hitting_set());
                break;
            case Mode::enumerate_minimal:
                if (hit_vertices_have_private_edges()) results_.push_back(current_hitting_set());
                break;
        }
    }

    SearchClock clock_;
    VertexSet global_;
    std::vector<std::int64_t> local_;
    std::vector<Cost> cost_;
    std::vector<std::size_t> degree_;
    std::vector<std::vector<std::uint32_t>> edges_;
    std::vector<std::vector<std::uint32_t>> incident_;
    std::vector<Mark> mark_;
    std::vector<std::uint64_t> stamp_;
    std::uint64_t stamp_round_ = 0;

    Mode mode_ = Mode::optimize;
    Cost base_cost_{};
    Cost target_{};
    bool found_ = false;
    std::optional<Cost> best_;
    VertexSet best_set_;
    std::vector<VertexSet> results_;
};

inline VertexSet complement(const VertexSet& all, const VertexSet& removed) {
    VertexSet out;
    std::set_difference(all.begin(), all.end(), removed.begin(), removed.end(), std::back_inserter(out));
    return out;
}

/// Among optimal hitting sets, the one whose complement is lexicographically
/// least: decide vertices in id order, keeping a vertex on the independent
/// side whenever the optimum remains reachable.
template <typename Cost>
VertexSet lex_least_optimal_independent(const Hypergraph& h, HittingSetEngine<Cost>& engine, Cost optimum) {
    typename HittingSetEngine<Cost>::Fixed fixed;
    for (auto v : engine.conflict_vertices()) {
        fixed.emplace_back(v, Mark::independent);
        if (!engine.feasible(fixed, optimum)) fixed.back().second = Mark::hit;
    }
    VertexSet hit;
    for (const auto& [v, m] : fixed)
        if (m == Mark::hit) hit.push_back(v);
    return complement(h.vertices(), hit);
}

inline void sort_canonical(std::vector<VertexSet>& sets) { std::sort(sets.begin(), sets.end()); }

}  // namespace detail

/// Maximum independent set size with the lexicographically least witness.
inline AlphaResult alpha(const Hypergraph& h, const SolveBudget& budget = {}, SolveStats* stats = nullptr) {
    detail::HittingSetEngine<std::int64_t> engine(h, [](VertexId) { return std::int64_t{1}; }, budget, stats);
    auto opt = engine.optimize();
    if (!opt) throw Error("hypergraph has a hyperedge that cannot be hit");
    AlphaResult r;
    r.size = h.vertex_count() - static_cast<std::size_t>(opt->first);
    r.witness = detail::lex_least_optimal_independent(h, engine, opt->first);
    return r;
}

/// Maximum total weight of an independent set. `weights` is indexed by vertex id.
inline WeightedAlphaResult alpha_weighted(const Hypergraph& h, const std::vector<Weight>& weights,
                                          const SolveBudget& budget = {}, SolveStats* stats = nullptr) {
    detail::HittingSetEngine<Weight> engine(h, [&](VertexId v) { return weights.at(v); }, budget, stats);
    auto opt = engine.optimize();
    if (!opt) throw Error("hypergraph has a hyperedge that cannot be hit");
    Weight total = 0;
    for (auto v : h.vertices()) total += weights.at(v);
    WeightedAlphaResult r;
    r.weight = total - opt->first;
    r.witness = detail::lex_least_optimal_independent(h, engine, opt->first);
    return r;
}

/// Vertex weights taken from the hypergraph's tuple table (1 without one).
inline std::vector<Weight> vertex_weights(const Hypergraph& h) {
    std::vector<Weight> w(h.universe(), Weight(1));
    if (h.has_labels())
        for (std::size_t i = 0; i < h.table()->weights.size(); ++i) w[i] = h.table()->weights[i];
    return w;
}

/// All maximal independent sets, each once, in lexicographic order.
inline std::vector<VertexSet> enumerate_maximal_is(const Hypergraph& h, const SolveBudget& budget = {},
                                                   SolveStats* stats = nullptr) {
    detail::HittingSetEngine<std::int64_t> engine(h, [](VertexId) { return std::int64_t{1}; }, budget, stats);
    std::vector<VertexSet> out;
    for (const auto& hs : engine.all_minimal()) out.push_back(detail::complement(h.vertices(), hs));
    detail::sort_canonical(out);
    return out;
}

/// All maximum-cardinality independent sets, in lexicographic order.
inline std::vector<VertexSet> enumerate_maximum_is(const Hypergraph& h, const SolveBudget& budget = {},
                                                   SolveStats* stats = nullptr) {
    detail::HittingSetEngine<std::int64_t> engine(h, [](VertexId) { return std::int64_t{1}; }, budget, stats);
    auto opt = engine.optimize();
    if (!opt) return {};
    std::vector<VertexSet> out;
    for (const auto& hs : engine.all_with_cost(opt->first)) out.push_back(detail::complement(h.vertices(), hs));
    detail::sort_canonical(out);
    return out;
}

/// All maximum-weight independent sets, in lexicographic order.
inline std::vector<VertexSet> enumerate_maximum_weight_is(const Hypergraph& h, const std::vector<Weight>& weights,
                                                          const SolveBudget& budget = {},
                                                          SolveStats* stats = nullptr) {
    detail::HittingSetEngine<Weight> engine(h, [&](VertexId v) { return weights.at(v); }, budget, stats);
    auto opt = engine.optimize();
    if (!opt) return {};
    std::vector<VertexSet> out;
    for (const auto& hs : engine.all_with_cost(opt->first)) out.push_back(detail::complement(h.vertices(), hs));
    detail::sort_canonical(out);
    return out;
}

// ---------------------------------------------------------------------------
// Bounded search tree for d-hitting set

namespace detail {

class BoundedHittingSearch {
public:
    BoundedHittingSearch(const Hypergraph& h, const SolveBudget& budget, SolveStats* stats)
        : h_(h), clock_(budget, stats), in_(h.universe(), false) {
        if (stats) ++stats->solver_calls;
    }

    /// A hitting set of size <= k, or nullopt.
    std::optional<VertexSet> decide(std::size_t k) {
        chosen_.clear();
        if (!search(k, 0)) return std::nullopt;
        VertexSet out = chosen_;
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    bool search(std::size_t k, std::size_t depth) {
        clock_.tick(depth);
        const Hyperedge* smallest = nullptr;
        for (const auto& e : h_.edges()) {
            if (std::any_of(e.vertices.begin(), e.vertices.end(), [&](VertexId v) { return in_[v]; })) continue;
            if (!smallest || e.vertices.size() < smallest->vertices.size()) smallest = &e;
            if (smallest->vertices.size() == 1) break;
        }
        if (!smallest) return true;
        if (k == 0) return false;
        // Any hitting set contains one of the <= d vertices of this edge.
        const VertexSet branch = smallest->vertices;
        for (VertexId v : branch) {
            in_[v] = true;
            chosen_.push_back(v);
            bool ok = search(k - 1, depth + 1);
            if (ok) {
                in_[v] = false;
                return true;
            }
            chosen_.pop_back();
            in_[v] = false;
        }
        return false;
    }

    const Hypergraph& h_;
    SearchClock clock_;
    std::vector<bool> in_;
    VertexSet chosen_;
};

}  // namespace detail

/// Size of a minimum hitting set if it is at most `k_max`, else nullopt.
/// Binary search over k, each probe a bounded search tree of depth k, so the
/// work is O(log k_max * d^k_max * |E|).
inline std::optional<HittingSetResult> min_hitting_set(const Hypergraph& h, std::size_t k_max,
                                                       const SolveBudget& budget = {}, SolveStats* stats = nullptr) {
    if (k_max > budget.max_depth)
        throw BudgetExceeded("hitting-set depth " + std::to_string(k_max) + " exceeds budget " +
                             std::to_string(budget.max_depth));
    detail::BoundedHittingSearch search(h, budget, stats);
    auto at_max = search.decide(k_max);
    if (!at_max) return std::nullopt;
    std::size_t lo = 0;
    std::size_t hi = at_max->size();
    VertexSet best = *at_max;
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo) / 2;
        if (auto w = search.decide(mid)) {
            hi = w->size() < mid ? w->size() : mid;
            best = *w;
        } else {
            lo = mid + 1;
        }
    }
    return HittingSetResult{hi, best};
}

namespace detail {

template <typename Cost>
bool optimum_admits(HittingSetEngine<Cost>& engine, const VertexSet& include, const VertexSet& exclude) {
    for (auto v : include)
        if (std::find(exclude.begin(), exclude.end(), v) != exclude.end()) return false;
    auto opt = engine.optimize();
    if (!opt) return false;
    typename HittingSetEngine<Cost>::Fixed fixed;
    for (auto v : include) fixed.emplace_back(v, Mark::independent);
    for (auto v : exclude) fixed.emplace_back(v, Mark::hit);
    return engine.feasible(fixed, opt->first);
}

}  // namespace detail

/// Whether some maximum independent set contains all of `include` and none
/// of `exclude`: one constrained feasibility check at the optimum.
inline bool exists_maximum_is_with(const Hypergraph& h, const VertexSet& include, const VertexSet& exclude,
                                   const SolveBudget& budget = {}, SolveStats* stats = nullptr) {
    detail::HittingSetEngine<std::int64_t> engine(h, [](VertexId) { return std::int64_t{1}; }, budget, stats);
    return detail::optimum_admits(engine, include, exclude);
}

inline bool exists_maximum_weight_is_with(const Hypergraph& h, const std::vector<Weight>& weights,
                                          const VertexSet& include, const VertexSet& exclude,
                                          const SolveBudget& budget = {}, SolveStats* stats = nullptr) {
    detail::HittingSetEngine<Weight> engine(h, [&](VertexId v) { return weights.at(v); }, budget, stats);
    return detail::optimum_admits(engine, include, exclude);
}

/// Whether `v` belongs to every maximum independent set: removing v must not
/// change the minimum hitting set size, i.e. alpha(h - v) = alpha(h) - 1.
inline bool in_all_maximum_is(const Hypergraph& h, VertexId v, const SolveBudget& budget = {},
                              SolveStats* stats = nullptr) {
    if (!h.has_vertex(v)) throw Error("vertex " + std::to_string(v) + " not present");
    const std::size_t a = alpha(h, budget, stats).size;
    const std::size_t a_minus = alpha(h.restrict({v}), budget, stats).size;
    return a_minus + 1 == a;
}

/// Whether `v` belongs to some maximum independent set:
/// 1 + alpha(condition_on(h, v)) = alpha(h).
inline bool in_some_maximum_is(const Hypergraph& h, VertexId v, const SolveBudget& budget = {},
                               SolveStats* stats = nullptr) {
    if (!h.has_vertex(v)) throw Error("vertex " + std::to_string(v) + " not present");
    Hypergraph conditioned;
    try {
        conditioned = h.condition_on(v);
    } catch (const ForcedOut&) {
        return false;
    }
    return 1 + alpha(conditioned, budget, stats).size == alpha(h, budget, stats).size;
}

/// Weighted variant: v is in every maximum-weight independent set iff
/// deleting it lowers the optimum.
inline bool in_all_maximum_weight_is(const Hypergraph& h, const std::vector<Weight>& weights, VertexId v,
                                     const SolveBudget& budget = {}, SolveStats* stats = nullptr) {
    if (!h.has_vertex(v)) throw Error("vertex " + std::to_string(v) + " not present");
    return alpha_weighted(h.restrict({v}), weights, budget, stats).weight <
           alpha_weighted(h, weights, budget, stats).weight;
}

inline bool in_some_maximum_weight_is(const Hypergraph& h, const std::vector<Weight>& weights, VertexId v,
                                      const SolveBudget& budget = {}, SolveStats* stats = nullptr) {
    if (!h.has_vertex(v)) throw Error("vertex " + std::to_string(v) + " not present");
    Hypergraph conditioned;
    try {
        conditioned = h.condition_on(v);
    } catch (const ForcedOut&) {
        return false;
    }
    return weights.at(v) + alpha_weighted(conditioned, weights, budget, stats).weight ==
           alpha_weighted(h, weights, budget, stats).weight;
}

}  // namespace cqa
