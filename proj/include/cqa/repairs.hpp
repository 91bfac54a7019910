#pragma once

// Repair semantics. Tuple-based repairs under denial constraints delete
// tuples only, so they are read back from independent sets of the conflict
// hypergraph. Attribute-based repairs change cell values drawn from a fixed
// candidate set and are found by uniform-cost search over change maps.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cqa/denial.hpp"
#include "cqa/error.hpp"
#include "cqa/hypergraph.hpp"
#include "cqa/join.hpp"
#include "cqa/model.hpp"
#include "cqa/solve.hpp"

namespace cqa {

enum class ChangeWeight { unit, quadratic };

/// Attribute-change repairs with values from `candidates`.
/// Quadratic cost of a change is coefficient(R, A) * (old - new)^2 over
/// integer constants; unlisted coefficients are 1. Costs are summed.
struct BoundedA {
    std::set<Constant> candidates;
    ChangeWeight weight = ChangeWeight::unit;
    std::map<std::pair<std::string, std::size_t>, Weight> coefficients;
    std::size_t max_states = 2'000'000;

    Weight coefficient(const std::string& relation, std::size_t attribute) const {
        auto it = coefficients.find({relation, attribute});
        return it == coefficients.end() ? Weight(1) : it->second;
    }

    Weight cost(const DbTuple& t, std::size_t attribute, const Constant& value) const {
        if (weight == ChangeWeight::unit) return 1;
        const Constant& old = t.args.at(attribute);
        if (!old.is_int() || !value.is_int())
            throw Error("quadratic change weight needs integer values at " + to_string(t) + " attr " +
                        std::to_string(attribute));
        const std::int64_t diff = old.as_int() - value.as_int();
        return coefficient(t.relation, attribute) * Weight(diff * diff);
    }
};

struct SemS {};
struct SemC {};
struct SemWeightedC {};

using Semantics = std::variant<SemS, SemC, SemWeightedC, BoundedA>;

inline std::string semantics_name(const Semantics& s) {
    switch (s.index()) {
        case 0: return "S";
        case 1: return "C";
        case 2: return "WC";
        default: return "A";
    }
}

inline bool is_tuple_based(const Semantics& s) { return !std::holds_alternative<BoundedA>(s); }

struct TupleRepair {
    std::vector<DbTuple> retained;  // sorted
    std::vector<DbTuple> deleted;   // sorted
    Weight distance = 0;

    Instance instance(const Instance& original) const {
        Instance out(original.schema());
        for (const auto& t : retained) out.insert(t, original.weight(t));
        return out;
    }

    friend bool operator==(const TupleRepair&, const TupleRepair&) = default;
};

struct CellChange {
    DbTuple tuple;
    std::size_t attribute = 0;
    Constant value;

    friend bool operator==(const CellChange&, const CellChange&) = default;
    friend auto operator<=>(const CellChange&, const CellChange&) = default;
};

inline std::string to_string(const CellChange& c) {
    return "change " + to_string(c.tuple) + " attr " + std::to_string(c.attribute) + " -> " + to_string(c.value);
}

struct ARepair {
    std::vector<CellChange> changes;  // sorted, at most one per cell
    Weight cost = 0;

    friend bool operator==(const ARepair&, const ARepair&) = default;
};

/// Instance obtained by applying a change map. Rows that become equal merge.
inline Instance apply_changes(const Instance& d, const std::vector<CellChange>& changes) {
    std::map<DbTuple, DbTuple> rewritten;
    for (const auto& c : changes) {
        if (!d.contains(c.tuple)) throw ChangeTargetMissing("no tuple " + to_string(c.tuple));
        auto [it, fresh] = rewritten.emplace(c.tuple, c.tuple);
        it->second.args.at(c.attribute) = c.value;
    }
    Instance out(d.schema());
    for (const auto& [t, w] : d) {
        auto it = rewritten.find(t);
        out.insert(it == rewritten.end() ? t : it->second, w);
    }
    return out;
}

namespace detail {

inline TupleRepair repair_from_independent_set(const Hypergraph& h, const VertexSet& is, bool weighted) {
    TupleRepair r;
    std::size_t j = 0;
    for (auto v : h.vertices()) {
        if (j < is.size() && is[j] == v) {
            r.retained.push_back(h.label(v));
            ++j;
        } else {
            r.deleted.push_back(h.label(v));
            r.distance += weighted ? h.weight(v) : Weight(1);
        }
    }
    return r;
}

inline std::vector<TupleRepair> read_back(const Hypergraph& h, const std::vector<VertexSet>& sets, bool weighted) {
    std::vector<TupleRepair> out;
    out.reserve(sets.size());
    for (const auto& s : sets) out.push_back(repair_from_independent_set(h, s, weighted));
    std::sort(out.begin(), out.end(),
              [](const TupleRepair& a, const TupleRepair& b) { return a.retained < b.retained; });
    return out;
}

}  // namespace detail

/// Set-inclusion repairs: maximal independent sets.
inline std::vector<TupleRepair> s_repairs(const Instance& d, const ConstraintSet& ics, const SolveBudget& budget = {}) {
    auto h = build_conflict_hypergraph(d, ics);
    return detail::read_back(h, enumerate_maximal_is(h, budget), false);
}

/// Cardinality repairs: maximum independent sets; distance |D| - alpha.
inline std::vector<TupleRepair> c_repairs(const Instance& d, const ConstraintSet& ics, const SolveBudget& budget = {}) {
    auto h = build_conflict_hypergraph(d, ics);
    return detail::read_back(h, enumerate_maximum_is(h, budget), false);
}

/// Weighted cardinality repairs: maximum-weight independent sets; distance
/// is the deleted weight.
inline std::vector<TupleRepair> wc_repairs(const Instance& d, const ConstraintSet& ics,
                                           const SolveBudget& budget = {}) {
    auto h = build_conflict_hypergraph(d, ics);
    return detail::read_back(h, enumerate_maximum_weight_is(h, vertex_weights(h), budget), true);
}

inline std::vector<TupleRepair> tuple_repairs(const Instance& d, const ConstraintSet& ics, const Semantics& sem,
                                              const SolveBudget& budget = {}) {
    if (std::holds_alternative<SemS>(sem)) return s_repairs(d, ics, budget);
    if (std::holds_alternative<SemC>(sem)) return c_repairs(d, ics, budget);
    if (std::holds_alternative<SemWeightedC>(sem)) return wc_repairs(d, ics, budget);
    throw UnsupportedQueryClass("attribute-based semantics has no tuple repairs");
}

// ---------------------------------------------------------------------------
// Attribute-change search

namespace detail {

/// Tuple sets of all violating assignments (not minimized).
using WitnessSet = std::set<std::vector<DbTuple>>;

inline std::vector<DbTuple> to_tuples(const TuplePtrSet& s) {
    std::vector<DbTuple> out;
    out.reserve(s.size());
    for (const auto* p : s) out.push_back(*p);
    return out;
}

inline WitnessSet all_witnesses(const Instance& d, const ConstraintSet& ics) {
    TupleIndex index(d);
    WitnessSet out;
    for (const auto& c : ics)
        for (const auto& s : raw_violations(index, c)) out.insert(to_tuples(s));
    return out;
}

inline WitnessSet witnesses_through(const Instance& d, const ConstraintSet& ics, const DbTuple& t) {
    WitnessSet out;
    auto it = d.find(t);
    if (it == d.end()) return out;
    TupleIndex index(d);
    for (const auto& c : ics)
        for (const auto& s : raw_violations(index, c, &it->first)) out.insert(to_tuples(s));
    return out;
}

enum class WitnessRoute { recompute, maintain };

/// Uniform-cost search over change maps. A state is a set of cell changes
/// (row, attribute, candidate); only cells of rows used by some current
/// violation are expanded. Every optimal map stays reachable: if a state is
/// inconsistent, some change of the optimum still missing from it touches a
/// row of a current violation, or that violation would survive.
class ChangeSearch {
public:
    ChangeSearch(const Instance& d, const ConstraintSet& ics, const BoundedA& sem, WitnessRoute route,
                 std::optional<WitnessSet> initial = std::nullopt)
        : d_(d), ics_(ics), sem_(sem), route_(route), candidates_(sem.candidates.begin(), sem.candidates.end()) {
        for (const auto& [t, w] : d) rows_.push_back(t);
        initial_ = initial ? std::move(*initial) : all_witnesses(d, ics);
    }

    std::vector<ARepair> run() {
        struct Node {
            Weight cost;
            Key key;
            std::shared_ptr<const WitnessSet> parent;
            std::optional<Change> last;
        };
        auto later = [](const Node& a, const Node& b) {
            if (a.cost != b.cost) return a.cost > b.cost;
            return a.key > b.key;
        };
        std::priority_queue<Node, std::vector<Node>, decltype(later)> open(later);
        std::set<Key> seen;
        open.push(Node{Weight(0), {}, nullptr, std::nullopt});
        seen.insert(Key{});

        std::optional<Weight> best;
        std::vector<ARepair> out;
        std::size_t expanded = 0;
        while (!open.empty()) {
            Node node = open.top();
            open.pop();
            if (best && node.cost > *best) break;
            if (++expanded > sem_.max_states) throw BudgetExceeded("attribute-repair search state budget exhausted");

            auto state = current_rows(node.key);
            auto witnesses = std::make_shared<const WitnessSet>(witnesses_for(node, state));
            if (witnesses->empty()) {
                best = node.cost;
                out.push_back(to_repair(node.key, node.cost));
                continue;
            }
            std::set<DbTuple> hot;
            for (const auto& w : *witnesses) hot.insert(w.begin(), w.end());
            for (std::uint32_t r = 0; r < rows_.size(); ++r) {
                if (!hot.count(state[r])) continue;
                for (std::uint32_t a = 0; a < rows_[r].args.size(); ++a) {
                    if (changed(node.key, r, a)) continue;
                    for (std::uint32_t ci = 0; ci < candidates_.size(); ++ci) {
                        if (candidates_[ci] == rows_[r].args[a]) continue;
                        Key next = node.key;
                        Change ch{r, a, ci};
                        next.insert(std::upper_bound(next.begin(), next.end(), ch), ch);
                        if (!seen.insert(next).second) continue;
                        Weight c = node.cost + sem_.cost(rows_[r], a, candidates_[ci]);
                        if (c <= node.cost) throw Error("change weights must be positive");
                        open.push(Node{c, std::move(next), witnesses, ch});
                    }
                }
            }
        }
        if (!best) throw NoRepair("no change map over the candidate values restores consistency");
        std::sort(out.begin(), out.end(),
                  [](const ARepair& a, const ARepair& b) { return a.changes < b.changes; });
        return out;
    }

private:
    struct Change {
        std::uint32_t row;
        std::uint32_t attribute;
        std::uint32_t candidate;
        friend auto operator<=>(const Change&, const Change&) = default;
        friend bool operator==(const Change&, const Change&) = default;
    };
    using Key = std::vector<Change>;

    static bool changed(const Key& key, std::uint32_t r, std::uint32_t a) {
        return std::any_of(key.begin(), key.end(), [&](const Change& c) { return c.row == r && c.attribute == a; });
    }

    std::vector<DbTuple> current_rows(const Key& key) const {
        std::vector<DbTuple> state = rows_;
        for (const auto& c : key) state[c.row].args[c.attribute] = candidates_[c.candidate];
        return state;
    }

    Instance instance_of(const std::vector<DbTuple>& state) const {
        Instance out(d_.schema());
        for (const auto& t : state) out.insert(t);
        return out;
    }

    WitnessSet witnesses_for(const auto& node, const std::vector<DbTuple>& state) const {
        if (!node.last) return initial_;
        if (route_ == WitnessRoute::recompute) return all_witnesses(instance_of(state), ics_);
        // One row moved from `before` to `after`.
        const auto& ch = *node.last;
        DbTuple before = state[ch.row];
        before.args[ch.attribute] = rows_[ch.row].args[ch.attribute];
        const DbTuple& after = state[ch.row];
        const bool before_survives = std::count(state.begin(), state.end(), before) > 0;
        // If another row already held `after`, its witnesses are inherited.
        const bool after_was_present = std::count(state.begin(), state.end(), after) > 1;
        WitnessSet out;
        for (const auto& w : *node.parent)
            if (before_survives || std::find(w.begin(), w.end(), before) == w.end()) out.insert(w);
        if (!after_was_present) {
            auto fresh = witnesses_through(instance_of(state), ics_, after);
            out.insert(fresh.begin(), fresh.end());
        }
        return out;
    }

    ARepair to_repair(const Key& key, Weight cost) const {
        ARepair r;
        r.cost = cost;
        for (const auto& c : key) r.changes.push_back(CellChange{rows_[c.row], c.attribute, candidates_[c.candidate]});
        std::sort(r.changes.begin(), r.changes.end());
        return r;
    }

    const Instance& d_;
    const ConstraintSet& ics_;
    const BoundedA& sem_;
    WitnessRoute route_;
    std::vector<Constant> candidates_;
    std::vector<DbTuple> rows_;
    WitnessSet initial_;
};

}  // namespace detail

/// All cost-minimal change maps restoring consistency.
/// Throws NoRepair when no map over the candidates is consistent.
inline std::vector<ARepair> a_repairs_bounded(const Instance& d, const ConstraintSet& ics, const BoundedA& sem) {
    return detail::ChangeSearch(d, ics, sem, detail::WitnessRoute::recompute).run();
}

// ---------------------------------------------------------------------------
// Text dump

inline std::string format_tuple_repairs(const std::vector<TupleRepair>& repairs) {
    std::string out;
    for (std::size_t i = 0; i < repairs.size(); ++i) {
        const auto& r = repairs[i];
        if (i) out += "\n";
        out += "retained:";
        for (const auto& t : r.retained) out += " " + to_string(t);
        out += "\ndeleted:";
        for (const auto& t : r.deleted) out += " " + to_string(t);
        out += "\ndistance: " + to_string(r.distance) + "\n";
    }
    return out;
}

inline std::string format_a_repairs(const std::vector<ARepair>& repairs) {
    std::string out;
    for (std::size_t i = 0; i < repairs.size(); ++i) {
        if (i) out += "\n";
        for (const auto& c : repairs[i].changes) out += to_string(c) + "\n";
        out += "cost: " + to_string(repairs[i].cost) + "\n";
    }
    return out;
}

}  // namespace cqa
