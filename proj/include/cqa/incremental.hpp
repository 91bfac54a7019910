#pragma once

// Incremental consistent answering from a consistent base instance D and an
// update sequence U. Since D satisfies the constraints, every violation of
// U(D) uses a tuple of U(D) \ D, so the conflict hypergraph of U(D) is
// found by joins pinned to those tuples, and every tuple outside it belongs
// to every tuple-based repair.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "cqa/answer.hpp"
#include "cqa/denial.hpp"
#include "cqa/error.hpp"
#include "cqa/hypergraph.hpp"
#include "cqa/model.hpp"
#include "cqa/repairs.hpp"
#include "cqa/solve.hpp"

namespace cqa {

struct IncrementalProblem {
    Instance base;
    UpdateSequence seq;
    ConstraintSet ics;
    Query query;
    Semantics semantics = SemC{};
};

struct TouchedRegion {
    Instance updated;                     // U(D)
    std::vector<DbTuple> updated_tuples;  // U(D) \ D, sorted
    Hypergraph local;                     // vertices: tuples on some hyperedge, in tuple order

    bool contains(const DbTuple& t) const { return local.id_of(t).has_value(); }
};

struct IncrementalAnswer {
    AnswerSet answers;
    bool fell_back = false;  // answered on the static path
    std::string note;
};

/// The hyperedges of U(D)'s conflict hypergraph, found from the updated
/// tuples only. Throws BaseInconsistent if D violates the constraints.
inline TouchedRegion touched_region(const Instance& base, const UpdateSequence& seq, const ConstraintSet& ics) {
    if (!is_consistent(base, ics)) throw BaseInconsistent("the base instance violates the constraints");
    TouchedRegion region{apply_update(base, seq), {}, {}};
    for (const auto& [t, w] : region.updated)
        if (!base.contains(t)) region.updated_tuples.push_back(t);

    TupleIndex index(region.updated);
    std::vector<std::vector<const DbTuple*>> raw;
    std::vector<std::string> tags;
    for (const auto& t : region.updated_tuples) {
        const DbTuple* p = &region.updated.find(t)->first;
        for (const auto& c : ics)
            for (auto& s : raw_violations(index, c, p)) {
                raw.push_back(std::move(s));
                tags.push_back(c.id);
            }
    }
    std::map<const DbTuple*, VertexId, bool (*)(const DbTuple*, const DbTuple*)> ids(detail::tuple_ptr_less);
    for (const auto& s : raw)
        for (const auto* p : s) ids.emplace(p, 0);
    auto table = std::make_shared<VertexTable>();
    VertexId next = 0;
    for (auto& [p, id] : ids) {
        id = next++;
        table->tuples.push_back(*p);
        table->weights.push_back(region.updated.weight(*p));
    }
    std::vector<Hyperedge> edges;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        Hyperedge e{{}, tags[i]};
        for (const auto* p : raw[i]) e.vertices.push_back(ids.at(p));
        edges.push_back(std::move(e));
    }
    region.local = Hypergraph(table->tuples.size(), std::move(edges), table);
    return region;
}

/// Search depth bound: m for insert-only sequences, m * a otherwise.
inline std::size_t incremental_k_max(const UpdateSequence& seq, const Instance& base) {
    const std::size_t m = seq.size();
    if (is_insert_only(seq)) return m;
    std::size_t a = std::max<std::size_t>(1, base.schema().max_arity());
    for (const auto& op : seq) std::visit([&](const auto& o) { a = std::max(a, o.tuple.args.size()); }, op);
    return m * a;
}

namespace detail {

inline std::size_t region_tau(const Hypergraph& h, std::size_t k_max, const SolveBudget& budget) {
    auto r = min_hitting_set(h, k_max, budget);
    if (!r) throw Error("minimum hitting set exceeds the update bound " + std::to_string(k_max));
    return r->size;
}

/// Whether a minimum hitting set of size `tau` avoids `include` and
/// contains `exclude`. Committing vertices of `include` forces the partners
/// of their 2-edges into the hitting set; the rest is one bounded decision.
inline bool tau_admits(const Hypergraph& h, std::size_t tau, const VertexSet& include, const VertexSet& exclude,
                       const SolveBudget& budget) {
    for (auto v : include)
        if (std::binary_search(exclude.begin(), exclude.end(), v)) return false;
    Hypergraph g = h.restrict(exclude);
    std::size_t committed = exclude.size();
    for (auto v : include) {
        if (!g.has_vertex(v)) return false;
        const std::size_t before = g.vertex_count();
        try {
            g = g.condition_on(v);
        } catch (const ForcedOut&) {
            return false;
        }
        committed += before - g.vertex_count() - 1;
    }
    if (committed > tau) return false;
    return min_hitting_set(g, tau - committed, budget).has_value();
}

struct RegionLiterals {
    bool decided = false;
    bool value = false;
    VertexSet include;
    VertexSet exclude;
};

// Positive literals outside U(D) fail, those outside the region hold in
// every repair; negated literals outside the region are decided by absence.
inline RegionLiterals locate(const TouchedRegion& region, const Query& q) {
    RegionLiterals out;
    for (const auto& a : q.positives) {
        DbTuple t = ground_tuple(a);
        if (!region.updated.contains(t)) {
            out.decided = true;
            return out;
        }
        if (auto v = region.local.id_of(t)) out.include.push_back(*v);
    }
    for (const auto& a : q.negatives) {
        DbTuple t = ground_tuple(a);
        if (!region.updated.contains(t)) continue;
        auto v = region.local.id_of(t);
        if (!v) {
            out.decided = true;
            return out;
        }
        out.exclude.push_back(*v);
    }
    std::sort(out.include.begin(), out.include.end());
    out.include.erase(std::unique(out.include.begin(), out.include.end()), out.include.end());
    std::sort(out.exclude.begin(), out.exclude.end());
    out.exclude.erase(std::unique(out.exclude.begin(), out.exclude.end()), out.exclude.end());
    return out;
}

inline bool is_ground_literal_query(const Query& q) {
    return q.kind() == QueryKind::ground_atomic || q.kind() == QueryKind::ground_literals;
}

inline IncrementalAnswer static_fallback(const IncrementalProblem& p, AnswerMode mode, const SolveBudget& budget,
                                         std::string why) {
    Instance u = apply_update(p.base, p.seq);
    IncrementalAnswer out{answer_query(u, p.ics, p.query, p.semantics, mode, budget), true, std::move(why)};
    return out;
}

}  // namespace detail

/// Minimum number of deletions restoring consistency of U(D), by binary
/// search over bounded hitting-set decisions on the touched region.
inline std::size_t incremental_c_distance(const Instance& base, const UpdateSequence& seq, const ConstraintSet& ics,
                                          const SolveBudget& budget = {}) {
    auto region = touched_region(base, seq, ics);
    return detail::region_tau(region.local, incremental_k_max(seq, base), budget);
}

/// Ground literal certainty under C: a positive literal holds in every repair
/// iff removing its vertex leaves the minimum hitting set size unchanged; a
/// negated literal iff its vertex lies in no minimum-size independent set.
inline bool incremental_certain_ground(const TouchedRegion& region, const Query& q, std::size_t k_max,
                                       const SolveBudget& budget = {}) {
    const auto lits = detail::locate(region, q);
    if (lits.decided) return lits.value;
    if (lits.include.empty() && lits.exclude.empty()) return true;
    const std::size_t tau = detail::region_tau(region.local, k_max, budget);
    for (auto v : lits.include) {
        auto without = min_hitting_set(region.local.restrict({v}), tau, budget);
        if (!without || without->size != tau) return false;
    }
    for (auto v : lits.exclude)
        if (detail::tau_admits(region.local, tau, {v}, {}, budget)) return false;
    return true;
}

/// Ground literal possibility under C: one minimum hitting set avoiding the
/// positive literals and containing the negated ones.
inline bool incremental_possible_ground(const TouchedRegion& region, const Query& q, std::size_t k_max,
                                        const SolveBudget& budget = {}) {
    const auto lits = detail::locate(region, q);
    if (lits.decided) return lits.value;
    if (lits.include.empty() && lits.exclude.empty()) return true;
    const std::size_t tau = detail::region_tau(region.local, k_max, budget);
    return detail::tau_admits(region.local, tau, lits.include, lits.exclude, budget);
}

namespace detail {

// Tuple repairs of U(D) from independent sets of the region: every tuple
// off the region is kept.
inline std::vector<AnswerSet> per_repair_answers(const TouchedRegion& region, const std::vector<VertexSet>& sets,
                                                 const Query& q) {
    Instance untouched = region.updated;
    for (auto v : region.local.vertices()) untouched.erase(region.local.label(v));
    std::vector<AnswerSet> out;
    for (const auto& s : sets) {
        Instance r = untouched;
        for (auto v : s) r.insert(region.local.label(v), region.updated.weight(region.local.label(v)));
        out.push_back(evaluate(r, q));
    }
    return out;
}

inline IncrementalAnswer s_path(const IncrementalProblem& p, AnswerMode mode, const SolveBudget& budget) {
    check_safety(p.query);
    auto region = touched_region(p.base, p.seq, p.ics);
    auto sets = enumerate_maximal_is(region.local, budget);
    return IncrementalAnswer{combine(p.query, per_repair_answers(region, sets, p.query), mode), false, {}};
}

inline IncrementalAnswer c_path(const IncrementalProblem& p, AnswerMode mode, const SolveBudget& budget) {
    if (!std::holds_alternative<SemC>(p.semantics))
        return static_fallback(p, mode, budget, "incremental path supports C, S and A semantics");
    if (!is_ground_literal_query(p.query))
        return static_fallback(p, mode, budget, "incremental C path answers ground literal queries");
    check_safety(p.query);
    auto region = touched_region(p.base, p.seq, p.ics);
    const std::size_t k_max = incremental_k_max(p.seq, p.base);
    const bool yes = mode == AnswerMode::certain ? incremental_certain_ground(region, p.query, k_max, budget)
                                                 : incremental_possible_ground(region, p.query, k_max, budget);
    return IncrementalAnswer{boolean_answer(yes), false, {}};
}

}  // namespace detail

/// Certain answers to `p.query` over U(D) without rebuilding the full
/// conflict hypergraph. Unsupported combinations fall back to the static path.
inline IncrementalAnswer incremental_certain(const IncrementalProblem& p, const SolveBudget& budget = {}) {
    if (std::holds_alternative<SemS>(p.semantics)) return detail::s_path(p, AnswerMode::certain, budget);
    return detail::c_path(p, AnswerMode::certain, budget);
}

inline IncrementalAnswer incremental_possible(const IncrementalProblem& p, const SolveBudget& budget = {}) {
    if (std::holds_alternative<SemS>(p.semantics)) return detail::s_path(p, AnswerMode::possible, budget);
    return detail::c_path(p, AnswerMode::possible, budget);
}

/// S-repairs of U(D) are the maximal independent sets of the region, each
/// extended by all tuples off the region.
inline AnswerSet incremental_s_certain(const IncrementalProblem& p, const SolveBudget& budget = {}) {
    return detail::s_path(p, AnswerMode::certain, budget).answers;
}

inline AnswerSet incremental_s_possible(const IncrementalProblem& p, const SolveBudget& budget = {}) {
    return detail::s_path(p, AnswerMode::possible, budget).answers;
}

/// Attribute-repair answers after a change-only sequence. The search starts
/// from the violations pinned to the changed tuples and maintains them per
/// state instead of recomputing.
inline AnswerSet incremental_a_answers(const IncrementalProblem& p, const BoundedA& sem, AnswerMode mode) {
    if (!is_change_only(p.seq)) throw UnsupportedQueryClass("attribute-repair path needs change-only updates");
    check_safety(p.query);
    auto region = touched_region(p.base, p.seq, p.ics);
    detail::WitnessSet initial;
    for (const auto& t : region.updated_tuples) {
        auto w = detail::witnesses_through(region.updated, p.ics, t);
        initial.insert(w.begin(), w.end());
    }
    std::vector<ARepair> repairs;
    try {
        repairs = detail::ChangeSearch(region.updated, p.ics, sem, detail::WitnessRoute::maintain, std::move(initial))
                      .run();
    } catch (const NoRepair&) {
        AnswerSet out = mode == AnswerMode::certain ? evaluate(region.updated, p.query)
                                                    : AnswerSet{p.query.head, false, {}, false};
        if (mode == AnswerMode::certain && p.query.is_boolean()) out.yes = true;
        out.vacuous = true;
        return out;
    }
    std::vector<AnswerSet> per_repair;
    for (const auto& r : repairs) per_repair.push_back(evaluate(apply_changes(region.updated, r.changes), p.query));
    return detail::combine(p.query, per_repair, mode);
}

inline AnswerSet incremental_a_certain(const IncrementalProblem& p, const BoundedA& sem) {
    return incremental_a_answers(p, sem, AnswerMode::certain);
}

/// Dispatch on semantics and mode.
inline IncrementalAnswer incremental_answer(const IncrementalProblem& p, AnswerMode mode,
                                            const SolveBudget& budget = {}) {
    if (const auto* a = std::get_if<BoundedA>(&p.semantics)) {
        if (!is_change_only(p.seq)) return detail::static_fallback(p, mode, budget, "A path needs change-only updates");
        return IncrementalAnswer{incremental_a_answers(p, *a, mode), false, {}};
    }
    return mode == AnswerMode::certain ? incremental_certain(p, budget) : incremental_possible(p, budget);
}

}  // namespace cqa
