#pragma once

// Backtracking nested-loop join over the tuples of an instance. Used both for
// denial-constraint violation search and for classical query evaluation.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "cqa/error.hpp"
#include "cqa/model.hpp"

namespace cqa {

struct Variable {
    std::string name;
    friend bool operator==(const Variable&, const Variable&) = default;
    friend auto operator<=>(const Variable&, const Variable&) = default;
};

struct Term {
    std::variant<Variable, Constant> value;

    static Term var(std::string name) { return Term{Variable{std::move(name)}}; }
    static Term constant(Constant c) { return Term{std::move(c)}; }

    bool is_variable() const noexcept { return std::holds_alternative<Variable>(value); }
    const std::string& variable() const { return std::get<Variable>(value).name; }
    const Constant& constant_value() const { return std::get<Constant>(value); }

    friend bool operator==(const Term&, const Term&) = default;
};

inline std::string to_string(const Term& t) {
    if (t.is_variable()) return t.variable();
    const auto& c = t.constant_value();
    // Bare identifiers in constraint and query text denote variables.
    if (c.is_symbol()) {
        std::string s = "'";
        for (char ch : c.as_symbol()) {
            if (ch == '\'' || ch == '\\') s += '\\';
            s += ch;
        }
        return s + "'";
    }
    return to_string(c);
}

struct Atom {
    std::string relation;
    std::vector<Term> args;
    friend bool operator==(const Atom&, const Atom&) = default;
};

inline std::string to_string(const Atom& a) {
    std::string out = a.relation + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ",";
        out += to_string(a.args[i]);
    }
    return out + ")";
}

enum class CmpOp { eq, ne, lt, le, gt, ge };

inline const char* to_string(CmpOp op) {
    switch (op) {
        case CmpOp::eq: return "=";
        case CmpOp::ne: return "!=";
        case CmpOp::lt: return "<";
        case CmpOp::le: return "<=";
        case CmpOp::gt: return ">";
        case CmpOp::ge: return ">=";
    }
    return "?";
}

inline bool compare(const Constant& a, CmpOp op, const Constant& b) {
    switch (op) {
        case CmpOp::eq: return a == b;
        case CmpOp::ne: return a != b;
        case CmpOp::lt: return a < b;
        case CmpOp::le: return a <= b;
        case CmpOp::gt: return a > b;
        case CmpOp::ge: return a >= b;
    }
    return false;
}

struct Comparison {
    Term lhs;
    CmpOp op = CmpOp::eq;
    Term rhs;
    friend bool operator==(const Comparison&, const Comparison&) = default;
};

inline std::string to_string(const Comparison& c) {
    return to_string(c.lhs) + " " + to_string(c.op) + " " + to_string(c.rhs);
}

/// Per-(relation, position) hash index, built lazily.
class TupleIndex {
public:
    explicit TupleIndex(const Instance& d) : d_(&d) {}

    const Instance& instance() const noexcept { return *d_; }

    const std::vector<const DbTuple*>& all(const std::string& relation) {
        auto it = scans_.find(relation);
        if (it != scans_.end()) return it->second;
        auto& v = scans_[relation];
        auto [first, last] = d_->relation_range(relation);
        for (auto i = first; i != last; ++i) v.push_back(&i->first);
        return v;
    }

    const std::vector<const DbTuple*>& lookup(const std::string& relation, std::size_t pos, const Constant& c) {
        auto key = std::make_pair(relation, pos);
        auto it = index_.find(key);
        if (it == index_.end()) {
            it = index_.emplace(key, PosIndex{}).first;
            for (const DbTuple* t : all(relation)) it->second[t->args[pos]].push_back(t);
        }
        auto hit = it->second.find(c);
        return hit == it->second.end() ? empty_ : hit->second;
    }

private:
    using PosIndex = std::unordered_map<Constant, std::vector<const DbTuple*>, ConstantHash>;
    const Instance* d_;
    std::unordered_map<std::string, std::vector<const DbTuple*>> scans_;
    std::map<std::pair<std::string, std::size_t>, PosIndex> index_;
    const std::vector<const DbTuple*> empty_;
};

/// A compiled conjunction: positive atoms, negated atoms checked for absence
/// once all variables are bound, and comparisons checked as early as possible.
class Join {
public:
    Join(std::vector<Atom> positives, std::vector<Atom> negatives, std::vector<Comparison> comparisons)
        : positives_(std::move(positives)), negatives_(std::move(negatives)), comparisons_(std::move(comparisons)) {
        for (const auto& a : positives_)
            for (const auto& t : a.args) slot_of(t);
        for (const auto& a : negatives_)
            for (const auto& t : a.args)
                if (t.is_variable() && !slots_.count(t.variable()))
                    throw UnsafeVariable("variable " + t.variable() + " occurs only in a negated atom");
        for (const auto& c : comparisons_)
            for (const Term* t : {&c.lhs, &c.rhs})
                if (t->is_variable() && !slots_.count(t->variable()))
                    throw UnsafeVariable("variable " + t->variable() + " occurs only in a comparison");
    }

    const std::vector<Atom>& positives() const noexcept { return positives_; }
    std::size_t variable_count() const noexcept { return names_.size(); }
    const std::vector<std::string>& variable_names() const noexcept { return names_; }
    std::optional<std::size_t> slot(const std::string& var) const {
        auto it = slots_.find(var);
        if (it == slots_.end()) return std::nullopt;
        return it->second;
    }

    /// Calls `on_match(images, bindings)` for every satisfying assignment.
    /// `images[i]` is the tuple bound to positive atom i. If `pin` is given,
    /// atom `pin->first` is bound only to `*pin->second`. The callback returns
    /// false to stop the search.
    template <typename F>
    void run(TupleIndex& index, F&& on_match,
             std::optional<std::pair<std::size_t, const DbTuple*>> pin = std::nullopt) const {
        State st{index, std::vector<std::optional<Constant>>(names_.size()),
                 std::vector<const DbTuple*>(positives_.size(), nullptr), plan(pin), pin};
        for (const auto& c : comparisons_)
            if (!c.lhs.is_variable() && !c.rhs.is_variable() &&
                !compare(c.lhs.constant_value(), c.op, c.rhs.constant_value()))
                return;
        search(st, 0, on_match);
    }

private:
    struct Step {
        std::size_t atom;
        std::vector<std::size_t> checks;  // comparisons fully bound after this step
    };

    struct State {
        TupleIndex& index;
        std::vector<std::optional<Constant>> binding;
        std::vector<const DbTuple*> images;
        std::vector<Step> steps;
        std::optional<std::pair<std::size_t, const DbTuple*>> pin;
    };

    void slot_of(const Term& t) {
        if (!t.is_variable()) return;
        if (slots_.emplace(t.variable(), names_.size()).second) names_.push_back(t.variable());
    }

    // Greedy order: pinned atom first, then the atom with most bound positions.
    std::vector<Step> plan(const std::optional<std::pair<std::size_t, const DbTuple*>>& pin) const {
        std::vector<Step> steps;
        std::vector<bool> used(positives_.size(), false);
        std::set<std::size_t> bound;
        auto bound_count = [&](const Atom& a) {
            std::size_t n = 0;
            for (const auto& t : a.args)
                if (!t.is_variable() || bound.count(slots_.at(t.variable()))) ++n;
            return n;
        };
        auto take = [&](std::size_t i) {
            used[i] = true;
            for (const auto& t : positives_[i].args)
                if (t.is_variable()) bound.insert(slots_.at(t.variable()));
            Step s{i, {}};
            steps.push_back(std::move(s));
        };
        if (pin) take(pin->first);
        while (steps.size() < positives_.size()) {
            std::size_t best = positives_.size();
            std::size_t best_score = 0;
            for (std::size_t i = 0; i < positives_.size(); ++i) {
                if (used[i]) continue;
                std::size_t sc = bound_count(positives_[i]);
                if (best == positives_.size() || sc > best_score) {
                    best = i;
                    best_score = sc;
                }
            }
            take(best);
        }
        // Attach each comparison to the first step after which it is ground.
        std::vector<bool> placed(comparisons_.size(), false);
        bound.clear();
        for (auto& s : steps) {
            for (const auto& t : positives_[s.atom].args)
                if (t.is_variable()) bound.insert(slots_.at(t.variable()));
            for (std::size_t c = 0; c < comparisons_.size(); ++c) {
                if (placed[c]) continue;
                const auto& cmp = comparisons_[c];
                bool ground = true;
                for (const Term* t : {&cmp.lhs, &cmp.rhs})
                    if (t->is_variable() && !bound.count(slots_.at(t->variable()))) ground = false;
                if (ground && (cmp.lhs.is_variable() || cmp.rhs.is_variable())) {
                    s.checks.push_back(c);
                    placed[c] = true;
                }
            }
        }
        return steps;
    }

    const Constant& value(const State& st, const Term& t) const {
        if (!t.is_variable()) return t.constant_value();
        return *st.binding[slots_.at(t.variable())];
    }

    template <typename F>
    bool search(State& st, std::size_t depth, F& on_match) const {
        if (depth == st.steps.size()) {
            for (const auto& neg : negatives_) {
                DbTuple g{neg.relation, {}};
                for (const auto& t : neg.args) g.args.push_back(value(st, t));
                if (st.index.instance().contains(g)) return true;
            }
            std::vector<Constant> values;
            values.reserve(st.binding.size());
            for (const auto& b : st.binding) values.push_back(*b);
            return on_match(static_cast<const std::vector<const DbTuple*>&>(st.images),
                            static_cast<const std::vector<Constant>&>(values));
        }
        const Step& step = st.steps[depth];
        const Atom& atom = positives_[step.atom];

        const std::vector<const DbTuple*>* candidates = nullptr;
        std::vector<const DbTuple*> pinned;
        if (depth == 0 && st.pin && st.pin->first == step.atom) {
            pinned.push_back(st.pin->second);
            candidates = &pinned;
        } else {
            for (std::size_t p = 0; p < atom.args.size() && !candidates; ++p) {
                const Term& t = atom.args[p];
                if (!t.is_variable()) {
                    candidates = &st.index.lookup(atom.relation, p, t.constant_value());
                } else if (const auto& b = st.binding[slots_.at(t.variable())]) {
                    candidates = &st.index.lookup(atom.relation, p, *b);
                }
            }
            if (!candidates) candidates = &st.index.all(atom.relation);
        }

        std::vector<std::size_t> newly_bound;
        for (const DbTuple* tuple : *candidates) {
            if (tuple->relation != atom.relation || tuple->args.size() != atom.args.size()) continue;
            newly_bound.clear();
            bool ok = true;
            for (std::size_t p = 0; p < atom.args.size() && ok; ++p) {
                const Term& t = atom.args[p];
                if (!t.is_variable()) {
                    ok = t.constant_value() == tuple->args[p];
                    continue;
                }
                auto& b = st.binding[slots_.at(t.variable())];
                if (b) {
                    ok = *b == tuple->args[p];
                } else {
                    b = tuple->args[p];
                    newly_bound.push_back(slots_.at(t.variable()));
                }
            }
            if (ok) {
                for (std::size_t c : step.checks) {
                    const auto& cmp = comparisons_[c];
                    if (!compare(value(st, cmp.lhs), cmp.op, value(st, cmp.rhs))) {
                        ok = false;
                        break;
                    }
                }
            }
            bool keep_going = true;
            if (ok) {
                st.images[step.atom] = tuple;
                keep_going = search(st, depth + 1, on_match);
                st.images[step.atom] = nullptr;
            }
            for (std::size_t s : newly_bound) st.binding[s].reset();
            if (!keep_going) return false;
        }
        return true;
    }

    std::vector<Atom> positives_;
    std::vector<Atom> negatives_;
    std::vector<Comparison> comparisons_;
    std::map<std::string, std::size_t> slots_;
    std::vector<std::string> names_;
};

}  // namespace cqa
