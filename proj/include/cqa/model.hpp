#pragma once

// Shared vocabulary: constants, schemas, tuples, weighted instances and
// update sequences.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <boost/rational.hpp>

#include "cqa/error.hpp"

namespace boost {

// Under C++20 rewritten comparisons, boost 1.74 resolves rational == integer
// to a self-recursive overload. Mixed equality must not compile; compare
// against rational values instead.
template <typename I>
    requires std::is_integral_v<I>
bool operator==(const rational<std::int64_t>&, const I&) = delete;

}  // namespace boost

namespace cqa {

/// Exact tuple weight. Sums of weights must compare exactly, so no floats.
using Weight = boost::rational<std::int64_t>;

inline std::string to_string(const Weight& w) {
    if (w.denominator() == 1) return std::to_string(w.numerator());
    return std::to_string(w.numerator()) + "/" + std::to_string(w.denominator());
}

/// A domain value: an integer or a symbol. Integers sort before symbols.
class Constant {
public:
    Constant() : value_(std::int64_t{0}) {}
    Constant(std::int64_t v) : value_(v) {}  // NOLINT(google-explicit-constructor)
    Constant(int v) : value_(std::int64_t{v}) {}  // NOLINT(google-explicit-constructor)
    Constant(std::string s) : value_(std::move(s)) {}  // NOLINT(google-explicit-constructor)
    Constant(const char* s) : value_(std::string(s)) {}  // NOLINT(google-explicit-constructor)

    bool is_int() const noexcept { return std::holds_alternative<std::int64_t>(value_); }
    bool is_symbol() const noexcept { return !is_int(); }
    std::int64_t as_int() const { return std::get<std::int64_t>(value_); }
    const std::string& as_symbol() const { return std::get<std::string>(value_); }

    friend bool operator==(const Constant&, const Constant&) = default;
    friend std::strong_ordering operator<=>(const Constant& a, const Constant& b) {
        if (a.is_int() != b.is_int()) return a.is_int() ? std::strong_ordering::less : std::strong_ordering::greater;
        if (a.is_int()) return a.as_int() <=> b.as_int();
        return a.as_symbol().compare(b.as_symbol()) <=> 0;
    }

    std::size_t hash() const noexcept {
        if (is_int()) return std::hash<std::int64_t>{}(as_int());
        return std::hash<std::string>{}(as_symbol()) ^ 0x9e3779b97f4a7c15ULL;
    }

private:
    std::variant<std::int64_t, std::string> value_;
};

namespace detail {

inline bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

inline bool is_bare_symbol(const std::string& s) {
    if (s.empty() || !is_ident_start(s.front())) return false;
    if (s == "not" || s == "exists") return false;
    return std::all_of(s.begin(), s.end(), is_ident_char);
}

inline void hash_combine(std::size_t& seed, std::size_t h) {
    seed ^= h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

}  // namespace detail

/// Symbols that are not plain identifiers are single-quoted so the text form
/// re-parses to the same value.
inline std::string to_string(const Constant& c) {
    if (c.is_int()) return std::to_string(c.as_int());
    const auto& s = c.as_symbol();
    if (detail::is_bare_symbol(s)) return s;
    std::string out = "'";
    for (char ch : s) {
        if (ch == '\'' || ch == '\\') out += '\\';
        out += ch;
    }
    out += '\'';
    return out;
}

struct RelationDecl {
    std::string name;
    std::vector<std::string> attributes;

    std::size_t arity() const noexcept { return attributes.size(); }
    friend bool operator==(const RelationDecl&, const RelationDecl&) = default;
};

class Schema {
public:
    Schema() = default;

    void add(RelationDecl decl) {
        if (decl.name.empty()) throw SchemaError("relation name must be nonempty");
        if (decl.attributes.empty()) throw SchemaError("relation " + decl.name + " must have arity >= 1");
        if (index_.count(decl.name)) throw SchemaError("duplicate relation " + decl.name);
        std::set<std::string> seen;
        for (const auto& a : decl.attributes) {
            if (!seen.insert(a).second)
                throw SchemaError("duplicate attribute " + a + " in relation " + decl.name);
        }
        index_.emplace(decl.name, relations_.size());
        relations_.push_back(std::move(decl));
    }

    /// Declares `name` with positional attribute names if it is not known yet.
    void add_default(const std::string& name, std::size_t arity) {
        if (contains(name)) return;
        RelationDecl decl{name, {}};
        for (std::size_t i = 0; i < arity; ++i) decl.attributes.push_back("a" + std::to_string(i));
        add(std::move(decl));
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    const RelationDecl& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw SchemaError("unknown relation " + name);
        return relations_[it->second];
    }

    const std::vector<RelationDecl>& relations() const noexcept { return relations_; }

    std::size_t max_arity() const {
        std::size_t a = 0;
        for (const auto& r : relations_) a = std::max(a, r.arity());
        return a;
    }

    friend bool operator==(const Schema& a, const Schema& b) { return a.relations_ == b.relations_; }

private:
    std::vector<RelationDecl> relations_;
    std::map<std::string, std::size_t> index_;
};

struct DbTuple {
    std::string relation;
    std::vector<Constant> args;

    friend bool operator==(const DbTuple&, const DbTuple&) = default;
    friend auto operator<=>(const DbTuple&, const DbTuple&) = default;
};

inline std::string to_string(const DbTuple& t) {
    std::string out = t.relation + "(";
    for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) out += ",";
        out += to_string(t.args[i]);
    }
    return out + ")";
}

struct DbTupleHash {
    std::size_t operator()(const DbTuple& t) const noexcept {
        std::size_t seed = std::hash<std::string>{}(t.relation);
        for (const auto& c : t.args) detail::hash_combine(seed, c.hash());
        return seed;
    }
};

struct ConstantHash {
    std::size_t operator()(const Constant& c) const noexcept { return c.hash(); }
};

/// A finite set of weighted ground tuples over a schema. Iteration order is
/// the tuple order (relation name, then arguments), which also fixes the
/// dense vertex ids used by the conflict hypergraph.
class Instance {
public:
    using Storage = std::map<DbTuple, Weight>;
    using const_iterator = Storage::const_iterator;

    Instance() = default;
    explicit Instance(Schema schema) : schema_(std::move(schema)) {}

    const Schema& schema() const noexcept { return schema_; }
    Schema& schema() noexcept { return schema_; }

    /// Returns false (and leaves the weight alone) if the tuple is present.
    bool insert(const DbTuple& t, Weight w = 1) {
        validate(t);
        if (w <= 0) throw SchemaError("weight of " + to_string(t) + " must be positive");
        return tuples_.emplace(t, w).second;
    }

    void set_weight(const DbTuple& t, Weight w) {
        auto it = tuples_.find(t);
        if (it == tuples_.end()) throw SchemaError("no tuple " + to_string(t));
        if (w <= 0) throw SchemaError("weight of " + to_string(t) + " must be positive");
        it->second = w;
    }

    bool erase(const DbTuple& t) { return tuples_.erase(t) != 0; }

    bool contains(const DbTuple& t) const { return tuples_.count(t) != 0; }

    Weight weight(const DbTuple& t) const {
        auto it = tuples_.find(t);
        if (it == tuples_.end()) throw SchemaError("no tuple " + to_string(t));
        return it->second;
    }

    std::size_t size() const noexcept { return tuples_.size(); }
    bool empty() const noexcept { return tuples_.empty(); }
    const_iterator begin() const noexcept { return tuples_.begin(); }
    const_iterator end() const noexcept { return tuples_.end(); }
    const_iterator find(const DbTuple& t) const { return tuples_.find(t); }

    /// Contiguous range of tuples of one relation.
    std::pair<const_iterator, const_iterator> relation_range(const std::string& relation) const {
        DbTuple lo{relation, {}};
        auto first = tuples_.lower_bound(lo);
        auto last = first;
        while (last != tuples_.end() && last->first.relation == relation) ++last;
        return {first, last};
    }

    std::vector<DbTuple> tuples() const {
        std::vector<DbTuple> out;
        out.reserve(tuples_.size());
        for (const auto& [t, w] : tuples_) out.push_back(t);
        return out;
    }

    Weight total_weight() const {
        Weight sum = 0;
        for (const auto& [t, w] : tuples_) sum += w;
        return sum;
    }

    std::set<Constant> active_domain() const {
        std::set<Constant> out;
        for (const auto& [t, w] : tuples_) out.insert(t.args.begin(), t.args.end());
        return out;
    }

    /// Equality of tuple sets, ignoring weights.
    bool same_tuples(const Instance& other) const {
        if (size() != other.size()) return false;
        return std::equal(begin(), end(), other.begin(),
                          [](const auto& a, const auto& b) { return a.first == b.first; });
    }

    friend bool operator==(const Instance& a, const Instance& b) { return a.tuples_ == b.tuples_; }

private:
    void validate(const DbTuple& t) const {
        const auto& decl = schema_.at(t.relation);
        if (decl.arity() != t.args.size())
            throw SchemaError(to_string(t) + ": relation " + t.relation + " has arity " +
                              std::to_string(decl.arity()));
    }

    Schema schema_;
    Storage tuples_;
};

// ---------------------------------------------------------------------------
// Updates

struct InsertOp {
    DbTuple tuple;
    Weight weight = 1;
    friend bool operator==(const InsertOp&, const InsertOp&) = default;
};

struct DeleteOp {
    DbTuple tuple;
    friend bool operator==(const DeleteOp&, const DeleteOp&) = default;
};

/// Sets attribute `attribute` (0-based) of `tuple` to `value`.
struct ChangeOp {
    DbTuple tuple;
    std::size_t attribute = 0;
    Constant value;
    friend bool operator==(const ChangeOp&, const ChangeOp&) = default;

    DbTuple result() const {
        DbTuple t = tuple;
        t.args.at(attribute) = value;
        return t;
    }
};

using UpdateOp = std::variant<InsertOp, DeleteOp, ChangeOp>;
using UpdateSequence = std::vector<UpdateOp>;

inline std::string to_string(const UpdateOp& op) {
    return std::visit(
        [](const auto& o) -> std::string {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, InsertOp>) {
                std::string s = "insert " + to_string(o.tuple);
                if (o.weight != Weight(1)) s += " @ " + to_string(o.weight);
                return s;
            } else if constexpr (std::is_same_v<T, DeleteOp>) {
                return "delete " + to_string(o.tuple);
            } else {
                return "change " + to_string(o.tuple) + " attr " + std::to_string(o.attribute) + " -> " +
                       to_string(o.value);
            }
        },
        op);
}

inline bool is_insert_only(const UpdateSequence& seq) {
    return std::all_of(seq.begin(), seq.end(), [](const UpdateOp& op) { return std::holds_alternative<InsertOp>(op); });
}

inline bool is_change_only(const UpdateSequence& seq) {
    return std::all_of(seq.begin(), seq.end(), [](const UpdateOp& op) { return std::holds_alternative<ChangeOp>(op); });
}

namespace detail {

inline void apply_one(Instance& d, const UpdateOp& op) {
    if (const auto* ins = std::get_if<InsertOp>(&op)) {
        d.insert(ins->tuple, ins->weight);
    } else if (const auto* del = std::get_if<DeleteOp>(&op)) {
        if (!d.erase(del->tuple)) throw DeleteTargetMissing("delete: no tuple " + to_string(del->tuple));
    } else {
        const auto& ch = std::get<ChangeOp>(op);
        auto it = d.find(ch.tuple);
        if (it == d.end()) throw ChangeTargetMissing("change: no tuple " + to_string(ch.tuple));
        if (ch.attribute >= ch.tuple.args.size())
            throw SchemaError("change: attribute " + std::to_string(ch.attribute) + " out of range for " +
                              to_string(ch.tuple));
        const Weight w = it->second;
        DbTuple next = ch.result();
        if (next == ch.tuple) return;
        d.erase(ch.tuple);
        // The changed tuple carries the weight of its source, also when it
        // collapses onto an existing tuple.
        if (!d.insert(next, w)) d.set_weight(next, w);
    }
}

}  // namespace detail

/// U(D). The sequence applies atomically: on error the input is untouched and
/// nothing is returned.
inline Instance apply_update(const Instance& d, const UpdateSequence& seq) {
    Instance out = d;
    for (const auto& op : seq) detail::apply_one(out, op);
    return out;
}

enum class ConstraintClass { denial, general };

struct MinimizedUpdate {
    UpdateSequence ops;
    /// Tuples whose last event in the original sequence is a deletion. Erasing
    /// them after applying `ops` reproduces the original final tuple set.
    std::vector<DbTuple> dropped_deletions;
};

/// Deletions cannot introduce denial violations, so for the denial class they
/// are split off. An insert immediately cancelled by a later delete of the
/// same tuple is removed as well.
inline MinimizedUpdate minimize_update(const UpdateSequence& seq, ConstraintClass cls) {
    MinimizedUpdate out;
    if (cls == ConstraintClass::general) {
        out.ops = seq;
        return out;
    }
    std::vector<bool> keep(seq.size(), true);
    // Index of the last kept insert that produced a tuple, while no later op
    // has touched that tuple.
    std::unordered_map<DbTuple, std::size_t, DbTupleHash> open_insert;
    // Last event per tuple: true when it is a deletion.
    std::map<DbTuple, bool> last_is_delete;

    for (std::size_t i = 0; i < seq.size(); ++i) {
        const auto& op = seq[i];
        if (const auto* ins = std::get_if<InsertOp>(&op)) {
            open_insert[ins->tuple] = i;
            last_is_delete[ins->tuple] = false;
        } else if (const auto* del = std::get_if<DeleteOp>(&op)) {
            keep[i] = false;
            if (auto it = open_insert.find(del->tuple); it != open_insert.end()) {
                keep[it->second] = false;
                open_insert.erase(it);
            }
            last_is_delete[del->tuple] = true;
        } else {
            const auto& ch = std::get<ChangeOp>(op);
            DbTuple next = ch.result();
            open_insert.erase(ch.tuple);
            open_insert.erase(next);
            last_is_delete[ch.tuple] = false;
            last_is_delete[next] = false;
        }
    }
    for (std::size_t i = 0; i < seq.size(); ++i)
        if (keep[i]) out.ops.push_back(seq[i]);
    for (const auto& [t, del] : last_is_delete)
        if (del) out.dropped_deletions.push_back(t);
    return out;
}

/// Optional guard for the assumption that update sequences are short relative
/// to the instance (m < c * |D|). Not enforced unless a ratio is given.
inline void check_update_ratio(const Instance& d, const UpdateSequence& seq, std::optional<double> c) {
    if (!c) return;
    if (static_cast<double>(seq.size()) >= *c * static_cast<double>(d.size()))
        throw BudgetExceeded("update sequence of length " + std::to_string(seq.size()) + " exceeds " +
                             std::to_string(*c) + " * |D|");
}

}  // namespace cqa

template <>
struct std::hash<cqa::Constant> {
    std::size_t operator()(const cqa::Constant& c) const noexcept { return c.hash(); }
};

template <>
struct std::hash<cqa::DbTuple> {
    std::size_t operator()(const cqa::DbTuple& t) const noexcept { return cqa::DbTupleHash{}(t); }
};
