#pragma once

// Conflict hypergraphs: tuples as dense vertex ids, minimal violating sets as
// hyperedges. Vertex ids stay stable under restrict/condition_on so witnesses
// always refer back to the same tuples.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cqa/denial.hpp"
#include "cqa/error.hpp"
#include "cqa/model.hpp"
#include "cqa/text.hpp"

namespace cqa {

using VertexId = std::uint32_t;
using VertexSet = std::vector<VertexId>;  // sorted, duplicate-free

struct Hyperedge {
    VertexSet vertices;
    std::string constraint;  // originating constraint id, empty for plain graphs

    friend bool operator==(const Hyperedge&, const Hyperedge&) = default;
};

/// Tuple and weight per vertex id.
struct VertexTable {
    std::vector<DbTuple> tuples;
    std::vector<Weight> weights;
};

namespace detail {

struct VertexSetHash {
    std::size_t operator()(const VertexSet& s) const noexcept {
        std::size_t seed = s.size();
        for (auto v : s) hash_combine(seed, v);
        return seed;
    }
};

inline bool is_subset(const VertexSet& small, const VertexSet& big) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace detail

class Hypergraph {
public:
    Hypergraph() = default;

    /// Vertices 0..n-1.
    Hypergraph(std::size_t n, std::vector<Hyperedge> edges, std::shared_ptr<const VertexTable> table = nullptr)
        : table_(std::move(table)) {
        vertices_.resize(n);
        for (std::size_t i = 0; i < n; ++i) vertices_[i] = static_cast<VertexId>(i);
        universe_ = n;
        set_edges(std::move(edges));
    }

    Hypergraph(VertexSet vertices, std::vector<Hyperedge> edges, std::shared_ptr<const VertexTable> table = nullptr)
        : vertices_(std::move(vertices)), table_(std::move(table)) {
        std::sort(vertices_.begin(), vertices_.end());
        vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
        universe_ = vertices_.empty() ? 0 : vertices_.back() + std::size_t{1};
        if (table_) universe_ = std::max(universe_, table_->tuples.size());
        set_edges(std::move(edges));
    }

    const VertexSet& vertices() const noexcept { return vertices_; }
    const std::vector<Hyperedge>& edges() const noexcept { return edges_; }
    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    /// Exclusive upper bound on vertex ids.
    std::size_t universe() const noexcept { return universe_; }

    bool has_vertex(VertexId v) const { return std::binary_search(vertices_.begin(), vertices_.end(), v); }

    std::size_t max_edge_size() const {
        std::size_t d = 0;
        for (const auto& e : edges_) d = std::max(d, e.vertices.size());
        return d;
    }

    bool has_labels() const noexcept { return table_ != nullptr; }
    const std::shared_ptr<const VertexTable>& table() const noexcept { return table_; }
    const DbTuple& label(VertexId v) const { return table_->tuples.at(v); }
    Weight weight(VertexId v) const { return table_ ? table_->weights.at(v) : Weight(1); }

    std::optional<VertexId> id_of(const DbTuple& t) const {
        if (!table_) return std::nullopt;
        auto it = std::find(table_->tuples.begin(), table_->tuples.end(), t);
        if (it == table_->tuples.end()) return std::nullopt;
        auto v = static_cast<VertexId>(it - table_->tuples.begin());
        if (!has_vertex(v)) return std::nullopt;
        return v;
    }

    /// No hyperedge is contained in `s`.
    bool is_independent(const VertexSet& s) const {
        return std::none_of(edges_.begin(), edges_.end(),
                            [&](const Hyperedge& e) { return detail::is_subset(e.vertices, s); });
    }

    /// Vertices that lie in no hyperedge.
    VertexSet isolated() const {
        std::vector<bool> in_edge(universe_, false);
        for (const auto& e : edges_)
            for (auto v : e.vertices) in_edge[v] = true;
        VertexSet out;
        for (auto v : vertices_)
            if (!in_edge[v]) out.push_back(v);
        return out;
    }

    /// Vertex deletion: drops `removed` and every hyperedge meeting it.
    Hypergraph restrict(const VertexSet& removed) const {
        std::unordered_set<VertexId> gone(removed.begin(), removed.end());
        Hypergraph out;
        out.table_ = table_;
        out.universe_ = universe_;
        for (auto v : vertices_)
            if (!gone.count(v)) out.vertices_.push_back(v);
        for (const auto& e : edges_) {
            if (std::none_of(e.vertices.begin(), e.vertices.end(), [&](VertexId v) { return gone.count(v); }))
                out.edges_.push_back(e);
        }
        return out;
    }

    /// The hypergraph of choices left once `v` is committed to the
    /// independent set: v is removed, every vertex that would complete a
    /// hyperedge with v is deleted, and larger hyperedges through v shrink.
    Hypergraph condition_on(VertexId v) const {
        if (!has_vertex(v)) throw Error("condition_on: vertex " + std::to_string(v) + " not present");
        std::unordered_set<VertexId> forced;
        for (const auto& e : edges_) {
            if (!std::binary_search(e.vertices.begin(), e.vertices.end(), v)) continue;
            if (e.vertices.size() == 1) throw ForcedOut("vertex " + std::to_string(v) + " lies in a singleton hyperedge");
            if (e.vertices.size() == 2) forced.insert(e.vertices[0] == v ? e.vertices[1] : e.vertices[0]);
        }
        Hypergraph out;
        out.table_ = table_;
        out.universe_ = universe_;
        for (auto u : vertices_)
            if (u != v && !forced.count(u)) out.vertices_.push_back(u);
        std::vector<Hyperedge> edges;
        for (const auto& e : edges_) {
            if (std::any_of(e.vertices.begin(), e.vertices.end(), [&](VertexId u) { return forced.count(u); }))
                continue;
            Hyperedge r = e;
            r.vertices.erase(std::remove(r.vertices.begin(), r.vertices.end(), v), r.vertices.end());
            edges.push_back(std::move(r));
        }
        out.set_edges(std::move(edges));
        return out;
    }

    /// Edges as a sorted list of vertex sets, ignoring tags.
    std::vector<VertexSet> edge_sets() const {
        std::vector<VertexSet> out;
        out.reserve(edges_.size());
        for (const auto& e : edges_) out.push_back(e.vertices);
        return out;
    }

private:
    // Normalizes: sorts each edge, checks it, removes duplicates and
    // non-minimal edges, sorts the family.
    void set_edges(std::vector<Hyperedge> edges) {
        for (auto& e : edges) {
            std::sort(e.vertices.begin(), e.vertices.end());
            e.vertices.erase(std::unique(e.vertices.begin(), e.vertices.end()), e.vertices.end());
            if (e.vertices.empty()) throw Error("empty hyperedge");
            for (auto v : e.vertices)
                if (!has_vertex(v)) throw Error("hyperedge vertex " + std::to_string(v) + " not in the vertex set");
        }
        std::stable_sort(edges.begin(), edges.end(), [](const Hyperedge& a, const Hyperedge& b) {
            if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size();
            return a.vertices < b.vertices;
        });
        std::unordered_set<VertexSet, detail::VertexSetHash> kept;
        edges_.clear();
        VertexSet sub;
        for (auto& e : edges) {
            if (kept.count(e.vertices)) continue;
            const std::size_t n = e.vertices.size();
            bool minimal = true;
            if (n < 24) {
                for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n) && minimal; ++mask) {
                    sub.clear();
                    for (std::size_t i = 0; i < n; ++i)
                        if (mask & (std::size_t{1} << i)) sub.push_back(e.vertices[i]);
                    if (kept.count(sub)) minimal = false;
                }
            } else {
                for (const auto& k : edges_)
                    if (detail::is_subset(k.vertices, e.vertices)) minimal = false;
            }
            if (minimal) {
                kept.insert(e.vertices);
                edges_.push_back(std::move(e));
            }
        }
        std::sort(edges_.begin(), edges_.end(),
                  [](const Hyperedge& a, const Hyperedge& b) { return a.vertices < b.vertices; });
    }

    VertexSet vertices_;
    std::vector<Hyperedge> edges_;
    std::size_t universe_ = 0;
    std::shared_ptr<const VertexTable> table_;
};

using ConflictHypergraph = Hypergraph;

inline std::shared_ptr<const VertexTable> vertex_table(const Instance& d) {
    auto table = std::make_shared<VertexTable>();
    table->tuples.reserve(d.size());
    table->weights.reserve(d.size());
    for (const auto& [t, w] : d) {
        table->tuples.push_back(t);
        table->weights.push_back(w);
    }
    return table;
}

/// Vertices are all tuples of `d` (ids follow tuple order); hyperedges are
/// the minimal violating sets of every constraint, re-minimized globally.
inline ConflictHypergraph build_conflict_hypergraph(const Instance& d, const ConstraintSet& ics) {
    auto table = vertex_table(d);
    std::unordered_map<const DbTuple*, VertexId> rank;
    {
        VertexId i = 0;
        for (const auto& kv : d) rank.emplace(&kv.first, i++);
    }
    TupleIndex index(d);
    std::vector<Hyperedge> edges;
    for (const auto& c : ics) {
        for (const auto& s : violating_ptr_sets(index, c)) {
            Hyperedge e{{}, c.id};
            for (const DbTuple* p : s) e.vertices.push_back(rank.at(p));
            edges.push_back(std::move(e));
        }
    }
    return Hypergraph(d.size(), std::move(edges), std::move(table));
}

/// Text export: `v <id> <tuple> [@ w]` lines, then `e <constraint> <id>...`
/// (`_` for an untagged edge).
inline std::string format_hypergraph(const Hypergraph& h) {
    std::string out = "# " + std::to_string(h.vertex_count()) + " vertices, " + std::to_string(h.edge_count()) +
                      " hyperedges\n";
    for (auto v : h.vertices()) {
        out += "v " + std::to_string(v);
        if (h.has_labels()) {
            out += " " + to_string(h.label(v));
            if (h.weight(v) != Weight(1)) out += " @ " + to_string(h.weight(v));
        }
        out += "\n";
    }
    for (const auto& e : h.edges()) {
        out += "e " + (e.constraint.empty() ? std::string("_") : e.constraint);
        for (auto v : e.vertices) out += " " + std::to_string(v);
        out += "\n";
    }
    return out;
}

inline Hypergraph parse_hypergraph(std::string_view text) {
    std::vector<std::pair<VertexId, std::optional<std::pair<DbTuple, Weight>>>> verts;
    std::vector<Hyperedge> edges;
    for (auto [line_no, line] : split_lines(text)) {
        Lexer lex(line, line_no);
        if (lex.at_end()) continue;
        auto kind = lex.expect_identifier("'v' or 'e'");
        if (kind == "v") {
            auto id = static_cast<VertexId>(lex.expect_index());
            std::optional<std::pair<DbTuple, Weight>> label;
            if (!lex.at_end()) {
                auto t = parse_ground_tuple(lex);
                Weight w = 1;
                if (lex.accept("@")) w = parse_weight(lex);
                label.emplace(std::move(t), w);
            }
            lex.expect_end();
            verts.emplace_back(id, std::move(label));
        } else if (kind == "e") {
            Hyperedge e;
            e.constraint = lex.expect_identifier("constraint id");
            if (e.constraint == "_") e.constraint.clear();
            while (!lex.at_end()) e.vertices.push_back(static_cast<VertexId>(lex.expect_index()));
            edges.push_back(std::move(e));
        } else {
            throw SyntaxError("expected 'v' or 'e'", line_no, 1);
        }
    }
    VertexSet ids;
    for (const auto& [id, label] : verts) ids.push_back(id);
    std::shared_ptr<const VertexTable> table;
    if (!verts.empty() && std::all_of(verts.begin(), verts.end(), [](const auto& p) { return p.second.has_value(); })) {
        auto t = std::make_shared<VertexTable>();
        std::size_t n = 0;
        for (const auto& [id, label] : verts) n = std::max<std::size_t>(n, id + 1);
        t->tuples.resize(n);
        t->weights.assign(n, Weight(1));
        for (const auto& [id, label] : verts) {
            t->tuples[id] = label->first;
            t->weights[id] = label->second;
        }
        table = std::move(t);
    }
    return Hypergraph(std::move(ids), std::move(edges), std::move(table));
}

}  // namespace cqa
