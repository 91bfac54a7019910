#pragma once

// Graph constructions relating "in some" and "in every" maximum independent
// set, the counting block, and the encoding of a graph as a database whose
// cardinality repairs are its maximum independent sets.
// Fresh vertices always get ids n, n+1, ... above the input's vertices.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cqa/denial.hpp"
#include "cqa/error.hpp"
#include "cqa/hypergraph.hpp"
#include "cqa/model.hpp"
#include "cqa/text.hpp"

namespace cqa {

/// Undirected simple graph on vertices 0..n-1.
class SimpleGraph {
public:
    SimpleGraph() = default;
    explicit SimpleGraph(std::size_t n) : n_(n) {}
    SimpleGraph(std::size_t n, const std::vector<std::pair<VertexId, VertexId>>& edges) : n_(n) {
        for (auto [u, v] : edges) add_edge(u, v);
    }

    std::size_t vertex_count() const noexcept { return n_; }
    const std::set<std::pair<VertexId, VertexId>>& edges() const noexcept { return edges_; }

    VertexId add_vertex() { return static_cast<VertexId>(n_++); }

    void add_edge(VertexId u, VertexId v) {
        if (u == v) throw Error("self-loop on vertex " + std::to_string(u));
        if (u >= n_ || v >= n_) throw Error("edge {" + std::to_string(u) + "," + std::to_string(v) + "} out of range");
        edges_.emplace(std::min(u, v), std::max(u, v));
    }

    bool adjacent(VertexId u, VertexId v) const { return edges_.count({std::min(u, v), std::max(u, v)}) != 0; }

    std::vector<VertexId> neighbors(VertexId v) const {
        std::vector<VertexId> out;
        for (auto [a, b] : edges_) {
            if (a == v) out.push_back(b);
            if (b == v) out.push_back(a);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    Hypergraph to_hypergraph() const {
        std::vector<Hyperedge> es;
        for (auto [u, v] : edges_) es.push_back(Hyperedge{{u, v}, {}});
        return Hypergraph(n_, std::move(es));
    }

    friend bool operator==(const SimpleGraph&, const SimpleGraph&) = default;

private:
    std::size_t n_ = 0;
    std::set<std::pair<VertexId, VertexId>> edges_;
};

/// Adds a vertex adjacent exactly to the neighbours of `v`. Then v lies in
/// some maximum independent set of g iff it lies in every maximum
/// independent set of the result, iff alpha grows by one.
inline SimpleGraph twin_extension(const SimpleGraph& g, VertexId v) {
    if (v >= g.vertex_count()) throw Error("vertex " + std::to_string(v) + " not in graph");
    SimpleGraph out = g;
    VertexId twin = out.add_vertex();
    for (auto u : g.neighbors(v)) out.add_edge(twin, u);
    return out;
}

/// Hangs a rhombus from `v`: x and y adjacent to v, z adjacent to x and y.
/// Then v lies in every maximum independent set of g iff it lies in some
/// maximum independent set of the result.
inline SimpleGraph rhombus_extension(const SimpleGraph& g, VertexId v) {
    if (v >= g.vertex_count()) throw Error("vertex " + std::to_string(v) + " not in graph");
    SimpleGraph out = g;
    VertexId x = out.add_vertex();
    VertexId y = out.add_vertex();
    VertexId z = out.add_vertex();
    out.add_edge(v, x);
    out.add_edge(v, y);
    out.add_edge(x, z);
    out.add_edge(y, z);
    return out;
}

enum class BlockPart : std::uint8_t { first_copy, second_copy, small_side, large_side, top, bottom };

/// Two copies of g, independent sets of k and k+1 vertices, and an edge t-b.
/// The k-set is complete to the first copy and to t; the (k+1)-set is
/// complete to the second copy and to b. t lies in every maximum independent
/// set of the block iff alpha(g) = k.
struct Block {
    SimpleGraph graph;
    VertexId t = 0;
    VertexId b = 0;
    std::vector<BlockPart> parts;  // indexed by vertex id
};

inline Block block(const SimpleGraph& g, std::size_t k) {
    if (k < 1) throw Error("block size k must be at least 1");
    const std::size_t n = g.vertex_count();
    Block out;
    out.graph = SimpleGraph(2 * n + 2 * k + 3);
    auto first = [&](VertexId v) { return v; };
    auto second = [&](VertexId v) { return static_cast<VertexId>(n + v); };
    auto small = [&](std::size_t i) { return static_cast<VertexId>(2 * n + i); };
    auto large = [&](std::size_t i) { return static_cast<VertexId>(2 * n + k + i); };
    out.t = static_cast<VertexId>(2 * n + 2 * k + 1);
    out.b = out.t + 1;

    out.parts.assign(out.graph.vertex_count(), BlockPart::first_copy);
    for (VertexId v = 0; v < n; ++v) out.parts[second(v)] = BlockPart::second_copy;
    for (std::size_t i = 0; i < k; ++i) out.parts[small(i)] = BlockPart::small_side;
    for (std::size_t i = 0; i <= k; ++i) out.parts[large(i)] = BlockPart::large_side;
    out.parts[out.t] = BlockPart::top;
    out.parts[out.b] = BlockPart::bottom;

    for (auto [u, v] : g.edges()) {
        out.graph.add_edge(first(u), first(v));
        out.graph.add_edge(second(u), second(v));
    }
    for (VertexId v = 0; v < n; ++v) {
        for (std::size_t i = 0; i < k; ++i) out.graph.add_edge(first(v), small(i));
        for (std::size_t i = 0; i <= k; ++i) out.graph.add_edge(second(v), large(i));
    }
    for (std::size_t i = 0; i < k; ++i) out.graph.add_edge(small(i), out.t);
    for (std::size_t i = 0; i <= k; ++i) out.graph.add_edge(large(i), out.b);
    out.graph.add_edge(out.t, out.b);
    return out;
}

struct GraphDatabase {
    Instance instance;
    ConstraintSet constraints;
};

/// Vertex(v) per vertex and, per edge, n = |V| copies Edges(u,v,e) with
/// distinct e in 1..n|E|, under  :- Vertex(v1), Vertex(v2), Edges(v1,v2,e).
/// Deleting an Edges tuple never pays off, so cardinality repairs delete
/// exactly the Vertex tuples outside one maximum independent set.
/// `labels[v]` names vertex v; integer ids by default.
inline GraphDatabase graph_to_database(const SimpleGraph& g, const std::vector<Constant>& labels = {}) {
    const std::size_t n = g.vertex_count();
    if (!labels.empty() && labels.size() != n) throw Error("label count does not match vertex count");
    if (std::set<Constant>(labels.begin(), labels.end()).size() != labels.size())
        throw Error("vertex labels must be distinct");
    auto label = [&](VertexId v) { return labels.empty() ? Constant(static_cast<std::int64_t>(v)) : labels[v]; };

    Schema schema;
    schema.add(RelationDecl{"Vertex", {"v"}});
    schema.add(RelationDecl{"Edges", {"v1", "v2", "e"}});
    GraphDatabase out{Instance(std::move(schema)), {}};
    for (VertexId v = 0; v < n; ++v) out.instance.insert(DbTuple{"Vertex", {label(v)}});
    std::int64_t e = 0;
    for (auto [u, v] : g.edges())
        for (std::size_t copy = 0; copy < n; ++copy)
            out.instance.insert(DbTuple{"Edges", {label(u), label(v), Constant(++e)}});
    out.constraints.add(parse_constraint(":- Vertex(v1), Vertex(v2), Edges(v1,v2,e).", "edge"));
    return out;
}

/// Graph text: first line `n`, then `u v` per edge. `t <id>` and `b <id>`
/// marker lines are accepted and reported through `markers`.
inline SimpleGraph parse_graph(std::string_view text,
                               std::vector<std::pair<std::string, VertexId>>* markers = nullptr) {
    std::optional<SimpleGraph> g;
    for (auto [line_no, line] : split_lines(text)) {
        Lexer lex(line, line_no);
        if (lex.at_end()) continue;
        if (!g) {
            g = SimpleGraph(lex.expect_index());
            lex.expect_end();
            continue;
        }
        if (lex.peek().kind == TokenKind::identifier) {
            auto name = lex.next().text;
            if (name != "t" && name != "b") throw SyntaxError("unknown marker '" + name + "'", line_no, 1);
            auto id = static_cast<VertexId>(lex.expect_index());
            lex.expect_end();
            if (id >= g->vertex_count()) throw SyntaxError("marker vertex out of range", line_no, 1);
            if (markers) markers->emplace_back(name, id);
            continue;
        }
        auto col = lex.peek().column;
        auto u = static_cast<VertexId>(lex.expect_index());
        auto v = static_cast<VertexId>(lex.expect_index());
        lex.expect_end();
        try {
            g->add_edge(u, v);
        } catch (const Error& e) {
            throw SyntaxError(e.what(), line_no, col);
        }
    }
    if (!g) throw SyntaxError("missing vertex count", 1, 1);
    return *g;
}

inline std::string format_graph(const SimpleGraph& g, const std::vector<std::pair<std::string, VertexId>>& markers = {}) {
    std::string out = std::to_string(g.vertex_count()) + "\n";
    for (auto [u, v] : g.edges()) out += std::to_string(u) + " " + std::to_string(v) + "\n";
    for (const auto& [name, id] : markers) out += name + " " + std::to_string(id) + "\n";
    return out;
}

}  // namespace cqa
