#pragma once

// Denial constraints  :- A1, ..., Am, comparisons.
// A violation is an assignment mapping every atom to a tuple with all
// comparisons true; the tuples it uses form a violating set.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cqa/error.hpp"
#include "cqa/join.hpp"
#include "cqa/model.hpp"
#include "cqa/text.hpp"

namespace cqa {

struct DenialConstraint {
    std::string id;
    std::vector<Atom> atoms;
    std::vector<Comparison> comparisons;

    friend bool operator==(const DenialConstraint&, const DenialConstraint&) = default;
};

inline std::string to_string(const DenialConstraint& c) {
    std::string out = ":- ";
    bool first = true;
    for (const auto& a : c.atoms) {
        if (!first) out += ", ";
        out += to_string(a);
        first = false;
    }
    for (const auto& cmp : c.comparisons) out += ", " + to_string(cmp);
    return out + ".";
}

class ConstraintSet {
public:
    ConstraintSet() = default;
    explicit ConstraintSet(std::vector<DenialConstraint> cs) {
        for (auto& c : cs) add(std::move(c));
    }

    void add(DenialConstraint c) {
        if (c.atoms.empty()) throw SchemaError("constraint " + c.id + " has no atoms");
        for (const auto& e : constraints_)
            if (e.id == c.id) throw SchemaError("duplicate constraint id " + c.id);
        constraints_.push_back(std::move(c));
    }

    const std::vector<DenialConstraint>& constraints() const noexcept { return constraints_; }
    std::size_t size() const noexcept { return constraints_.size(); }
    bool empty() const noexcept { return constraints_.empty(); }
    auto begin() const noexcept { return constraints_.begin(); }
    auto end() const noexcept { return constraints_.end(); }

    /// Maximum atom count over the constraints: the hyperedge size bound.
    std::size_t max_atoms() const {
        std::size_t d = 0;
        for (const auto& c : constraints_) d = std::max(d, c.atoms.size());
        return d;
    }

    /// Throws SchemaError if an atom mentions an unknown relation or the wrong arity.
    void check_against(const Schema& schema) const {
        for (const auto& c : constraints_)
            for (const auto& a : c.atoms) {
                const auto& decl = schema.at(a.relation);
                if (decl.arity() != a.args.size())
                    throw SchemaError("constraint " + c.id + ": " + a.relation + " has arity " +
                                      std::to_string(decl.arity()));
            }
    }

private:
    std::vector<DenialConstraint> constraints_;
};

namespace detail {

inline Term parse_term(Lexer& lex) {
    const Token& t = lex.peek();
    if (t.kind == TokenKind::identifier) return Term::var(lex.next().text);
    return Term::constant(parse_constant(lex));
}

inline std::optional<CmpOp> parse_cmp_op(Lexer& lex) {
    static const std::pair<const char*, CmpOp> ops[] = {{"=", CmpOp::eq}, {"!=", CmpOp::ne}, {"<=", CmpOp::le},
                                                        {">=", CmpOp::ge}, {"<", CmpOp::lt},  {">", CmpOp::gt}};
    for (const auto& [s, op] : ops)
        if (lex.accept(s)) return op;
    return std::nullopt;
}

inline Atom parse_atom_with(Lexer& lex, Term (*term)(Lexer&)) {
    Atom a;
    a.relation = lex.expect_identifier("relation name");
    lex.expect("(");
    do {
        a.args.push_back(term(lex));
    } while (lex.accept(","));
    lex.expect(")");
    return a;
}

}  // namespace detail

/// Parses one constraint line `[label:] :- P(x,y,z), P(x,u,w), y != u.`
/// Bare identifiers are variables; constants are integers or quoted symbols.
inline DenialConstraint parse_constraint(std::string_view text, std::string default_id = "c1",
                                         std::size_t line_no = 1) {
    Lexer lex(text, line_no);
    DenialConstraint c;
    c.id = std::move(default_id);
    if (lex.peek().kind == TokenKind::identifier && lex.peek(1).kind == TokenKind::punct && lex.peek(1).text == ":") {
        c.id = lex.next().text;
        lex.next();
    }
    lex.expect(":-");
    do {
        if (lex.peek().kind == TokenKind::identifier && lex.peek(1).text == "(" &&
            lex.peek(1).kind == TokenKind::punct) {
            c.atoms.push_back(detail::parse_atom_with(lex, detail::parse_term));
        } else {
            Comparison cmp;
            cmp.lhs = detail::parse_term(lex);
            auto op = detail::parse_cmp_op(lex);
            if (!op) lex.fail("expected a comparison operator");
            cmp.op = *op;
            cmp.rhs = detail::parse_term(lex);
            c.comparisons.push_back(std::move(cmp));
        }
    } while (lex.accept(","));
    lex.accept(".");
    lex.expect_end();
    if (c.atoms.empty()) throw SyntaxError("a denial constraint needs at least one atom", line_no, 1);

    std::set<std::string> bound;
    for (const auto& a : c.atoms)
        for (const auto& t : a.args)
            if (t.is_variable()) bound.insert(t.variable());
    for (const auto& cmp : c.comparisons)
        for (const Term* t : {&cmp.lhs, &cmp.rhs})
            if (t->is_variable() && !bound.count(t->variable()))
                throw UnsafeVariable("constraint " + c.id + ": variable " + t->variable() +
                                     " occurs only in a comparison");
    return c;
}

/// Constraint file: one denial per line, `#` comments, blank lines ignored.
/// Unlabelled constraints get ids c1, c2, ... by position.
inline ConstraintSet parse_constraints(std::string_view text) {
    ConstraintSet out;
    std::size_t n = 0;
    for (auto [line_no, line] : split_lines(text)) {
        Lexer probe(line, line_no);
        if (probe.at_end()) continue;
        ++n;
        auto c = parse_constraint(line, "c" + std::to_string(n), line_no);
        try {
            out.add(std::move(c));
        } catch (const SchemaError& e) {
            throw SyntaxError(e.what(), line_no, 1);
        }
    }
    return out;
}

inline std::string format_constraints(const ConstraintSet& ics) {
    std::string out;
    for (const auto& c : ics) out += c.id + ": " + to_string(c) + "\n";
    return out;
}

/// A violating set as pointers into one instance, sorted by tuple order.
using TuplePtrSet = std::vector<const DbTuple*>;

namespace detail {

inline bool tuple_ptr_less(const DbTuple* a, const DbTuple* b) { return *a < *b; }

struct PtrSetHash {
    std::size_t operator()(const TuplePtrSet& s) const noexcept {
        std::size_t seed = s.size();
        for (const auto* p : s) hash_combine(seed, std::hash<const void*>{}(p));
        return seed;
    }
};

inline TuplePtrSet image_set(const std::vector<const DbTuple*>& images) {
    TuplePtrSet s(images.begin(), images.end());
    std::sort(s.begin(), s.end(), tuple_ptr_less);
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

/// Drops every set that strictly contains another set of the family, and
/// duplicates. Runs in O(|family| * 2^maxsize) by probing proper subsets.
inline std::vector<TuplePtrSet> keep_minimal(std::vector<TuplePtrSet> family) {
    std::unordered_set<TuplePtrSet, PtrSetHash> all(family.begin(), family.end());
    std::vector<TuplePtrSet> out;
    std::unordered_set<TuplePtrSet, PtrSetHash> emitted;
    for (auto& s : family) {
        if (emitted.count(s)) continue;
        bool minimal = true;
        const std::size_t n = s.size();
        if (n > 1 && n < 24) {
            TuplePtrSet sub;
            for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n) && minimal; ++mask) {
                sub.clear();
                for (std::size_t i = 0; i < n; ++i)
                    if (mask & (std::size_t{1} << i)) sub.push_back(s[i]);
                if (all.count(sub)) minimal = false;
            }
        } else if (n >= 24) {
            for (const auto& other : all)
                if (other.size() < n && std::includes(s.begin(), s.end(), other.begin(), other.end(), tuple_ptr_less))
                    minimal = false;
        }
        if (minimal) {
            emitted.insert(s);
            out.push_back(std::move(s));
        }
    }
    std::sort(out.begin(), out.end(), [](const TuplePtrSet& a, const TuplePtrSet& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            [](const DbTuple* x, const DbTuple* y) { return *x < *y; });
    });
    return out;
}

inline Join compile(const DenialConstraint& c) { return Join(c.atoms, {}, c.comparisons); }

}  // namespace detail

/// Violating sets of `c` (not yet minimized). With `pinned`, only
/// assignments that use `*pinned` for at least one atom are considered.
inline std::vector<TuplePtrSet> raw_violations(TupleIndex& index, const DenialConstraint& c,
                                               const DbTuple* pinned = nullptr) {
    Join join = detail::compile(c);
    std::vector<TuplePtrSet> out;
    auto collect = [&](const std::vector<const DbTuple*>& images, const std::vector<Constant>&) {
        out.push_back(detail::image_set(images));
        return true;
    };
    if (!pinned) {
        join.run(index, collect);
    } else {
        for (std::size_t i = 0; i < c.atoms.size(); ++i)
            if (c.atoms[i].relation == pinned->relation) join.run(index, collect, std::make_pair(i, pinned));
    }
    return out;
}

/// Set-minimal violating sets of one constraint, as pointers into `index`'s instance.
inline std::vector<TuplePtrSet> violating_ptr_sets(TupleIndex& index, const DenialConstraint& c) {
    return detail::keep_minimal(raw_violations(index, c));
}

/// Set-minimal sets of tuples of `d` that jointly violate `c`, in canonical order.
inline std::vector<std::vector<DbTuple>> violating_sets(const Instance& d, const DenialConstraint& c) {
    TupleIndex index(d);
    std::vector<std::vector<DbTuple>> out;
    for (const auto& s : violating_ptr_sets(index, c)) {
        std::vector<DbTuple> v;
        for (const auto* p : s) v.push_back(*p);
        out.push_back(std::move(v));
    }
    return out;
}

inline bool violates(TupleIndex& index, const DenialConstraint& c) {
    bool found = false;
    detail::compile(c).run(index, [&](const auto&, const auto&) {
        found = true;
        return false;
    });
    return found;
}

/// D |= IC.
inline bool is_consistent(const Instance& d, const ConstraintSet& ics) {
    TupleIndex index(d);
    return std::none_of(ics.begin(), ics.end(), [&](const DenialConstraint& c) { return violates(index, c); });
}

}  // namespace cqa
