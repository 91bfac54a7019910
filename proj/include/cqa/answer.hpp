#pragma once

// Queries and consistent answers.
//
// Query text:  ? P(x,y,z)
//              ? P(a,c,d), not P(a,b,c)
//              ? exists z: P(x,y,z), x = a
// A bare identifier is a constant when it occurs in the instance's active
// domain and a variable otherwise; names bound by `exists` are always
// variables. Integers and quoted strings are constants.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cqa/denial.hpp"
#include "cqa/error.hpp"
#include "cqa/hypergraph.hpp"
#include "cqa/join.hpp"
#include "cqa/model.hpp"
#include "cqa/repairs.hpp"
#include "cqa/solve.hpp"
#include "cqa/text.hpp"

namespace cqa {

enum class QueryKind {
    ground_atomic,         // one positive ground atom
    ground_literals,       // ground atoms, some negated, nothing else
    quantifier_free,       // free variables, literals and comparisons
    conjunctive            // with existential variables
};

struct Query {
    std::vector<Atom> positives;
    std::vector<Atom> negatives;
    std::vector<Comparison> comparisons;
    std::vector<std::string> existentials;
    std::vector<std::string> head;  // free variables, in order of first appearance

    bool is_boolean() const noexcept { return head.empty(); }

    bool is_ground() const {
        auto ground = [](const Atom& a) {
            return std::none_of(a.args.begin(), a.args.end(), [](const Term& t) { return t.is_variable(); });
        };
        return std::all_of(positives.begin(), positives.end(), ground) &&
               std::all_of(negatives.begin(), negatives.end(), ground);
    }

    QueryKind kind() const {
        if (!existentials.empty()) return QueryKind::conjunctive;
        if (is_ground() && comparisons.empty()) {
            if (positives.size() == 1 && negatives.empty()) return QueryKind::ground_atomic;
            return QueryKind::ground_literals;
        }
        return QueryKind::quantifier_free;
    }

    friend bool operator==(const Query&, const Query&) = default;
};

inline DbTuple ground_tuple(const Atom& a) {
    DbTuple t{a.relation, {}};
    for (const auto& arg : a.args) {
        if (arg.is_variable()) throw UnsupportedQueryClass("atom " + to_string(a) + " is not ground");
        t.args.push_back(arg.constant_value());
    }
    return t;
}

inline Atom atom_of(const DbTuple& t) {
    Atom a{t.relation, {}};
    for (const auto& c : t.args) a.args.push_back(Term::constant(c));
    return a;
}

inline Query ground_query(const DbTuple& t) {
    Query q;
    q.positives.push_back(atom_of(t));
    return q;
}

inline std::string to_string(const Query& q) {
    std::string out = "? ";
    if (!q.existentials.empty()) {
        out += "exists ";
        for (std::size_t i = 0; i < q.existentials.size(); ++i) out += (i ? ", " : "") + q.existentials[i];
        out += ": ";
    }
    bool first = true;
    auto sep = [&] {
        if (!first) out += ", ";
        first = false;
    };
    for (const auto& a : q.positives) {
        sep();
        out += to_string(a);
    }
    for (const auto& a : q.negatives) {
        sep();
        out += "not " + to_string(a);
    }
    for (const auto& c : q.comparisons) {
        sep();
        out += to_string(c);
    }
    return out;
}

/// Every head, negated-atom and comparison variable occurs in a positive atom;
/// every existential variable occurs somewhere.
inline void check_safety(const Query& q) {
    std::set<std::string> bound;
    for (const auto& a : q.positives)
        for (const auto& t : a.args)
            if (t.is_variable()) bound.insert(t.variable());
    for (const auto& a : q.negatives)
        for (const auto& t : a.args)
            if (t.is_variable() && !bound.count(t.variable()))
                throw UnsafeQuery("variable " + t.variable() + " occurs only in a negated atom");
    for (const auto& c : q.comparisons)
        for (const Term* t : {&c.lhs, &c.rhs})
            if (t->is_variable() && !bound.count(t->variable()))
                throw UnsafeQuery("variable " + t->variable() + " occurs only in a comparison");
    for (const auto& v : q.existentials)
        if (!bound.count(v)) throw UnsafeQuery("existential variable " + v + " occurs in no positive atom");
    if (q.positives.empty()) throw UnsafeQuery("a query needs at least one positive atom");
}

namespace detail {

struct QueryTerms {
    const std::set<Constant>& adom;
    const std::set<std::string>& existentials;

    Term operator()(Lexer& lex) const {
        const Token& t = lex.peek();
        if (t.kind == TokenKind::identifier) {
            std::string name = lex.next().text;
            if (!existentials.count(name) && adom.count(Constant(name))) return Term::constant(Constant(name));
            return Term::var(std::move(name));
        }
        return Term::constant(parse_constant(lex));
    }
};

inline Atom parse_query_atom(Lexer& lex, const QueryTerms& terms) {
    Atom a;
    a.relation = lex.expect_identifier("relation name");
    lex.expect("(");
    do {
        a.args.push_back(terms(lex));
    } while (lex.accept(","));
    lex.expect(")");
    return a;
}

inline void note_variable(const Term& t, std::vector<std::string>& order) {
    if (t.is_variable() && std::find(order.begin(), order.end(), t.variable()) == order.end())
        order.push_back(t.variable());
}

}  // namespace detail

/// Parses one query. `adom` decides whether a bare identifier is a constant.
inline Query parse_query(std::string_view text, const std::set<Constant>& adom) {
    std::optional<Query> result;
    for (auto [line_no, line] : split_lines(text)) {
        Lexer lex(line, line_no);
        if (lex.at_end()) continue;
        if (result) lex.fail("only one query per file");
        lex.accept("?");
        Query q;
        std::set<std::string> ex;
        if (lex.accept_word("exists")) {
            do {
                auto name = lex.expect_identifier("variable name");
                if (ex.insert(name).second) q.existentials.push_back(name);
            } while (lex.accept(","));
            lex.expect(":");
        }
        detail::QueryTerms terms{adom, ex};
        std::vector<std::string> order;
        do {
            const bool negated = lex.peek().kind == TokenKind::identifier && lex.peek().text == "not" &&
                                 lex.peek(1).kind == TokenKind::identifier;
            if (negated) {
                lex.next();
                q.negatives.push_back(detail::parse_query_atom(lex, terms));
                for (const auto& t : q.negatives.back().args) detail::note_variable(t, order);
            } else if (lex.peek().kind == TokenKind::identifier && lex.peek(1).kind == TokenKind::punct &&
                       lex.peek(1).text == "(") {
                q.positives.push_back(detail::parse_query_atom(lex, terms));
                for (const auto& t : q.positives.back().args) detail::note_variable(t, order);
            } else {
                Comparison cmp;
                cmp.lhs = terms(lex);
                auto op = detail::parse_cmp_op(lex);
                if (!op) lex.fail("expected an atom or a comparison");
                cmp.op = *op;
                cmp.rhs = terms(lex);
                detail::note_variable(cmp.lhs, order);
                detail::note_variable(cmp.rhs, order);
                q.comparisons.push_back(std::move(cmp));
            }
        } while (lex.accept(","));
        lex.accept(".");
        lex.expect_end();
        for (const auto& v : order)
            if (!ex.count(v)) q.head.push_back(v);
        check_safety(q);
        result = std::move(q);
    }
    if (!result) throw SyntaxError("no query found", 1, 1);
    return *result;
}

enum class AnswerMode { certain, possible };

inline const char* to_string(AnswerMode m) { return m == AnswerMode::certain ? "certain" : "possible"; }

struct AnswerSet {
    std::vector<std::string> head;
    bool yes = false;                                // boolean queries
    std::vector<std::vector<Constant>> tuples;       // open queries, sorted
    bool vacuous = false;                            // no repairs exist

    bool is_boolean() const noexcept { return head.empty(); }
    bool empty() const noexcept { return is_boolean() ? !yes : tuples.empty(); }

    friend bool operator==(const AnswerSet&, const AnswerSet&) = default;
};

inline AnswerSet boolean_answer(bool yes) {
    AnswerSet a;
    a.yes = yes;
    return a;
}

/// Classical evaluation over one instance.
inline AnswerSet evaluate(const Instance& d, const Query& q) {
    check_safety(q);
    Join join(q.positives, q.negatives, q.comparisons);
    std::vector<std::size_t> slots;
    for (const auto& v : q.head) slots.push_back(*join.slot(v));
    AnswerSet out;
    out.head = q.head;
    std::set<std::vector<Constant>> found;
    TupleIndex index(d);
    join.run(index, [&](const std::vector<const DbTuple*>&, const std::vector<Constant>& values) {
        if (q.is_boolean()) {
            out.yes = true;
            return false;
        }
        std::vector<Constant> row;
        row.reserve(slots.size());
        for (auto s : slots) row.push_back(values[s]);
        found.insert(std::move(row));
        return true;
    });
    out.tuples.assign(found.begin(), found.end());
    if (!q.is_boolean()) out.yes = !out.tuples.empty();
    return out;
}

namespace detail {

inline AnswerSet combine(const Query& q, const std::vector<AnswerSet>& per_repair, AnswerMode mode) {
    AnswerSet out;
    out.head = q.head;
    if (per_repair.empty()) return out;
    if (q.is_boolean()) {
        out.yes = mode == AnswerMode::certain;
        for (const auto& a : per_repair) {
            if (mode == AnswerMode::certain) out.yes = out.yes && a.yes;
            else out.yes = out.yes || a.yes;
        }
        return out;
    }
    std::vector<std::vector<Constant>> acc = per_repair.front().tuples;
    for (std::size_t i = 1; i < per_repair.size(); ++i) {
        std::vector<std::vector<Constant>> next;
        const auto& t = per_repair[i].tuples;
        if (mode == AnswerMode::certain)
            std::set_intersection(acc.begin(), acc.end(), t.begin(), t.end(), std::back_inserter(next));
        else
            std::set_union(acc.begin(), acc.end(), t.begin(), t.end(), std::back_inserter(next));
        acc = std::move(next);
    }
    out.tuples = std::move(acc);
    out.yes = !out.tuples.empty();
    return out;
}

inline AnswerSet over_repairs(const Instance& d, const ConstraintSet& ics, const Query& q, const Semantics& sem,
                              AnswerMode mode, const SolveBudget& budget) {
    check_safety(q);
    std::vector<AnswerSet> per_repair;
    if (const auto* a = std::get_if<BoundedA>(&sem)) {
        std::vector<ARepair> repairs;
        try {
            repairs = a_repairs_bounded(d, ics, *a);
        } catch (const NoRepair&) {
            // No repairs: certain holds vacuously; open certain answers are
            // restricted to the classical answers to stay finite.
            AnswerSet out = mode == AnswerMode::certain ? evaluate(d, q) : AnswerSet{q.head, false, {}, false};
            if (mode == AnswerMode::certain && q.is_boolean()) out.yes = true;
            out.vacuous = true;
            return out;
        }
        for (const auto& r : repairs) per_repair.push_back(evaluate(apply_changes(d, r.changes), q));
    } else {
        for (const auto& r : tuple_repairs(d, ics, sem, budget)) per_repair.push_back(evaluate(r.instance(d), q));
    }
    return combine(q, per_repair, mode);
}

}  // namespace detail

/// Answers true in every repair, by repair enumeration.
inline AnswerSet certain_answers(const Instance& d, const ConstraintSet& ics, const Query& q, const Semantics& sem,
                                 const SolveBudget& budget = {}) {
    return detail::over_repairs(d, ics, q, sem, AnswerMode::certain, budget);
}

/// Answers true in some repair, by repair enumeration.
inline AnswerSet possible_answers(const Instance& d, const ConstraintSet& ics, const Query& q, const Semantics& sem,
                                  const SolveBudget& budget = {}) {
    return detail::over_repairs(d, ics, q, sem, AnswerMode::possible, budget);
}

namespace detail {

inline void require_cardinality(const Semantics& sem) {
    if (!std::holds_alternative<SemC>(sem) && !std::holds_alternative<SemWeightedC>(sem))
        throw UnsupportedQueryClass("the membership route needs C or WC semantics");
}

}  // namespace detail

/// Ground atom certainty without enumeration: membership in every maximum
/// (weight) independent set of the conflict hypergraph.
inline bool certain_ground_fast(const Instance& d, const ConstraintSet& ics, const DbTuple& t, const Semantics& sem,
                                const SolveBudget& budget = {}) {
    detail::require_cardinality(sem);
    if (!d.contains(t)) return false;
    auto h = build_conflict_hypergraph(d, ics);
    VertexId v = *h.id_of(t);
    if (std::holds_alternative<SemC>(sem)) return in_all_maximum_is(h, v, budget);
    return in_all_maximum_weight_is(h, vertex_weights(h), v, budget);
}

inline bool possible_ground_fast(const Instance& d, const ConstraintSet& ics, const DbTuple& t, const Semantics& sem,
                                 const SolveBudget& budget = {}) {
    detail::require_cardinality(sem);
    if (!d.contains(t)) return false;
    auto h = build_conflict_hypergraph(d, ics);
    VertexId v = *h.id_of(t);
    if (std::holds_alternative<SemC>(sem)) return in_some_maximum_is(h, v, budget);
    return in_some_maximum_weight_is(h, vertex_weights(h), v, budget);
}

/// Ground literal conjunction, certain: every positive literal lies in all
/// optimal independent sets and every negated one in none.
inline bool certain_literal_conjunction(const Instance& d, const ConstraintSet& ics, const Query& q,
                                        const Semantics& sem = SemC{}, const SolveBudget& budget = {}) {
    detail::require_cardinality(sem);
    if (q.kind() != QueryKind::ground_atomic && q.kind() != QueryKind::ground_literals)
        throw UnsupportedQueryClass("not a ground literal conjunction");
    auto h = build_conflict_hypergraph(d, ics);
    const bool weighted = std::holds_alternative<SemWeightedC>(sem);
    const auto w = vertex_weights(h);
    for (const auto& a : q.positives) {
        auto v = h.id_of(ground_tuple(a));
        if (!v) return false;
        if (!(weighted ? in_all_maximum_weight_is(h, w, *v, budget) : in_all_maximum_is(h, *v, budget))) return false;
    }
    for (const auto& a : q.negatives) {
        auto v = h.id_of(ground_tuple(a));
        if (!v) continue;
        if (weighted ? in_some_maximum_weight_is(h, w, *v, budget) : in_some_maximum_is(h, *v, budget)) return false;
    }
    return true;
}

/// Ground literal conjunction, possible: one optimal independent set
/// containing the positive literals and avoiding the negated ones.
inline bool possible_literal_conjunction(const Instance& d, const ConstraintSet& ics, const Query& q,
                                         const Semantics& sem = SemC{}, const SolveBudget& budget = {}) {
    detail::require_cardinality(sem);
    if (q.kind() != QueryKind::ground_atomic && q.kind() != QueryKind::ground_literals)
        throw UnsupportedQueryClass("not a ground literal conjunction");
    auto h = build_conflict_hypergraph(d, ics);
    VertexSet include, exclude;
    for (const auto& a : q.positives) {
        auto v = h.id_of(ground_tuple(a));
        if (!v) return false;
        include.push_back(*v);
    }
    for (const auto& a : q.negatives)
        if (auto v = h.id_of(ground_tuple(a))) exclude.push_back(*v);
    if (std::holds_alternative<SemWeightedC>(sem))
        return exists_maximum_weight_is_with(h, vertex_weights(h), include, exclude, budget);
    return exists_maximum_is_with(h, include, exclude, budget);
}

/// Dispatch used by the command line: ground literal queries under C and WC
/// take the membership route, everything else enumerates repairs.
inline AnswerSet answer_query(const Instance& d, const ConstraintSet& ics, const Query& q, const Semantics& sem,
                              AnswerMode mode, const SolveBudget& budget = {}) {
    const bool cardinality = std::holds_alternative<SemC>(sem) || std::holds_alternative<SemWeightedC>(sem);
    const auto kind = q.kind();
    if (cardinality && (kind == QueryKind::ground_atomic || kind == QueryKind::ground_literals)) {
        check_safety(q);
        return boolean_answer(mode == AnswerMode::certain ? certain_literal_conjunction(d, ics, q, sem, budget)
                                                          : possible_literal_conjunction(d, ics, q, sem, budget));
    }
    return mode == AnswerMode::certain ? certain_answers(d, ics, q, sem, budget)
                                       : possible_answers(d, ics, q, sem, budget);
}

inline std::string format_answer_tuple(const std::vector<Constant>& row) {
    std::string out = "(";
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ",";
        out += to_string(row[i]);
    }
    return out + ")";
}

/// Header line, then `yes`/`no` or one answer tuple per line.
inline std::string format_answers(const AnswerSet& a, AnswerMode mode, const std::string& semantics) {
    std::string out = "# " + std::string(to_string(mode)) + " answers under " + semantics;
    if (!a.is_boolean()) {
        out += " (";
        for (std::size_t i = 0; i < a.head.size(); ++i) out += (i ? "," : "") + a.head[i];
        out += ")";
    }
    out += "\n";
    if (a.vacuous) out += "# vacuous: no repair exists\n";
    if (a.is_boolean()) return out + (a.yes ? "yes\n" : "no\n");
    for (const auto& row : a.tuples) out += format_answer_tuple(row) + "\n";
    return out;
}

}  // namespace cqa
