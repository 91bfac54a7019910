#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "cqa/gadgets.hpp"
#include "cqa/repairs.hpp"
#include "cqa/solve.hpp"
#include "oracle.hpp"

using namespace cqa;

namespace {

SimpleGraph path3() { return SimpleGraph(3, {{0, 1}, {1, 2}}); }
SimpleGraph cycle5() { return SimpleGraph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}); }

std::size_t alpha_of(const SimpleGraph& g) { return oracle::alpha(oracle::from_graph(g)); }
bool in_all(const SimpleGraph& g, VertexId v) { return oracle::in_all_maximum(oracle::from_graph(g), v); }
bool in_some(const SimpleGraph& g, VertexId v) { return oracle::in_some_maximum(oracle::from_graph(g), v); }

}  // namespace

TEST(SimpleGraph, RejectsSelfLoopsAndUnknownVertices) {
    SimpleGraph g(3);
    EXPECT_THROW(g.add_edge(1, 1), Error);
    EXPECT_THROW(g.add_edge(0, 3), Error);
    g.add_edge(2, 0);
    EXPECT_TRUE(g.adjacent(0, 2));
    EXPECT_EQ(g.edges().size(), 1u);
    EXPECT_EQ(g.neighbors(0), (std::vector<VertexId>{2}));
    EXPECT_EQ(g.add_vertex(), 3u);
    EXPECT_EQ(g.vertex_count(), 4u);
}

TEST(TwinExtension, PathEndpoint) {
    auto g = path3();
    auto g2 = twin_extension(g, 0);
    ASSERT_EQ(g2.vertex_count(), 4u);
    EXPECT_EQ(g2.neighbors(3), g.neighbors(0));
    EXPECT_EQ(alpha_of(g), 2u);
    EXPECT_EQ(alpha_of(g2), 3u);
    EXPECT_TRUE(in_all(g2, 0));
}

TEST(TwinExtension, IsolatedVertex) {
    SimpleGraph g(1);
    auto g2 = twin_extension(g, 0);
    EXPECT_TRUE(g2.neighbors(1).empty());
    EXPECT_EQ(alpha_of(g2), alpha_of(g) + 1);
}

TEST(TwinExtension, PathMiddle) {
    auto g2 = twin_extension(path3(), 1);
    EXPECT_EQ(alpha_of(g2), 2u);
    EXPECT_FALSE(in_all(g2, 1));
    // b and its twin form a maximum independent set of their own.
    EXPECT_TRUE(in_some(g2, 1));
}

TEST(TwinExtension, RejectsUnknownVertex) { EXPECT_THROW(twin_extension(path3(), 3), Error); }

TEST(RhombusExtension, Shape) {
    auto g2 = rhombus_extension(path3(), 1);
    ASSERT_EQ(g2.vertex_count(), 6u);
    EXPECT_EQ(g2.neighbors(3), (std::vector<VertexId>{1, 5}));
    EXPECT_EQ(g2.neighbors(4), (std::vector<VertexId>{1, 5}));
    EXPECT_EQ(g2.neighbors(5), (std::vector<VertexId>{3, 4}));
}

TEST(RhombusExtension, SingleVertex) {
    SimpleGraph g(1);
    EXPECT_TRUE(in_all(g, 0));
    EXPECT_TRUE(in_some(rhombus_extension(g, 0), 0));
}

TEST(RhombusExtension, SingleEdge) {
    SimpleGraph g(2, {{0, 1}});
    EXPECT_FALSE(in_all(g, 0));
    EXPECT_FALSE(in_some(rhombus_extension(g, 0), 0));
}

TEST(RhombusExtension, PathMiddle) {
    EXPECT_FALSE(in_all(path3(), 1));
    EXPECT_FALSE(in_some(rhombus_extension(path3(), 1), 1));
}

TEST(Block, Layout) {
    auto g = path3();
    auto b = block(g, 2);
    const std::size_t n = 3, k = 2;
    ASSERT_EQ(b.graph.vertex_count(), 2 * n + 2 * k + 3);
    EXPECT_EQ(b.t, 2 * n + 2 * k + 1);
    EXPECT_EQ(b.b, b.t + 1);
    EXPECT_TRUE(b.graph.adjacent(b.t, b.b));
    for (VertexId i = 2 * n; i < 2 * n + k; ++i) {
        EXPECT_EQ(b.parts[i], BlockPart::small_side);
        EXPECT_TRUE(b.graph.adjacent(i, b.t));
        for (VertexId v = 0; v < n; ++v) EXPECT_TRUE(b.graph.adjacent(i, v));
        for (VertexId j = 2 * n; j <= 2 * n + 2 * k; ++j)
            if (j != i) {
                EXPECT_FALSE(b.graph.adjacent(i, j));
            }
    }
    for (VertexId i = 2 * n + k; i <= 2 * n + 2 * k; ++i) {
        EXPECT_EQ(b.parts[i], BlockPart::large_side);
        EXPECT_TRUE(b.graph.adjacent(i, b.b));
        EXPECT_FALSE(b.graph.adjacent(i, b.t));
        for (VertexId v = 0; v < n; ++v) EXPECT_TRUE(b.graph.adjacent(i, n + v));
        for (VertexId v = 0; v < n; ++v) EXPECT_FALSE(b.graph.adjacent(i, v));
    }
    for (auto [u, v] : g.edges()) {
        EXPECT_TRUE(b.graph.adjacent(u, v));
        EXPECT_TRUE(b.graph.adjacent(n + u, n + v));
    }
    // Edges: 2|E| copies, k*n + (k+1)*n completions, k + k+1 spokes, t-b.
    EXPECT_EQ(b.graph.edges().size(), 2 * 2 + k * n + (k + 1) * n + k + (k + 1) + 1);
    EXPECT_THROW(block(g, 0), Error);
}

TEST(Block, CycleWithMatchingK) {
    auto b = block(cycle5(), 2);
    EXPECT_TRUE(in_all(b.graph, b.t));
}

TEST(Block, CycleWithSmallerK) {
    auto b = block(cycle5(), 1);
    EXPECT_FALSE(in_all(b.graph, b.t));
}

TEST(Block, EdgelessPair) {
    auto b = block(SimpleGraph(2), 2);
    EXPECT_TRUE(in_all(b.graph, b.t));
}

TEST(Property, BlockCharacterisesAlphaSmallGraphs) {
    // Exhaustive masks on blocks up to 2*3 + 2*3 + 3 = 15 vertices.
    for (std::size_t n = 0; n <= 3; ++n)
        for (const auto& g : oracle::all_graphs(n))
            for (std::size_t k = 1; k <= 3; ++k) {
                auto b = block(g, k);
                EXPECT_EQ(in_all(b.graph, b.t), alpha_of(g) == k) << format_graph(g) << "k=" << k;
            }
}

TEST(Property, TwinExtensionTripleEquivalence) {
    for (std::size_t n = 1; n <= 5; ++n)
        for (const auto& g : oracle::all_graphs(n))
            for (VertexId v = 0; v < n; ++v) {
                auto g2 = twin_extension(g, v);
                bool some = in_some(g, v);
                EXPECT_EQ(some, in_all(g2, v));
                EXPECT_EQ(some, alpha_of(g2) == alpha_of(g) + 1);
                EXPECT_EQ(some, in_all_maximum_is(g2.to_hypergraph(), v));
                EXPECT_EQ(some, in_some_maximum_is(g.to_hypergraph(), v));
            }
}

TEST(Property, RhombusExtensionBiconditional) {
    for (std::size_t n = 1; n <= 5; ++n)
        for (const auto& g : oracle::all_graphs(n))
            for (VertexId v = 0; v < n; ++v)
                EXPECT_EQ(in_all(g, v), in_some(rhombus_extension(g, v), v)) << format_graph(g) << "v=" << v;
}

TEST(GraphToDatabase, SingleEdge) {
    SimpleGraph g(2, {{0, 1}});
    auto db = graph_to_database(g, {Constant("a"), Constant("b")});
    EXPECT_EQ(db.instance.size(), 4u);
    EXPECT_TRUE(db.instance.contains(DbTuple{"Vertex", {Constant("a")}}));
    EXPECT_TRUE(db.instance.contains(DbTuple{"Edges", {Constant("a"), Constant("b"), Constant(std::int64_t{1})}}));
    EXPECT_TRUE(db.instance.contains(DbTuple{"Edges", {Constant("a"), Constant("b"), Constant(std::int64_t{2})}}));
    auto rs = c_repairs(db.instance, db.constraints);
    ASSERT_EQ(rs.size(), 2u);
    for (const auto& r : rs) {
        ASSERT_EQ(r.deleted.size(), 1u);
        EXPECT_EQ(r.deleted[0].relation, "Vertex");
    }
}

TEST(GraphToDatabase, EdgelessIsConsistent) {
    auto db = graph_to_database(SimpleGraph(3));
    EXPECT_TRUE(is_consistent(db.instance, db.constraints));
    auto rs = c_repairs(db.instance, db.constraints);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(rs[0].retained, db.instance.tuples());
}

TEST(GraphToDatabase, PathHasOneRepair) {
    auto db = graph_to_database(path3(), {Constant("a"), Constant("b"), Constant("c")});
    auto rs = c_repairs(db.instance, db.constraints);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(rs[0].deleted, (std::vector<DbTuple>{DbTuple{"Vertex", {Constant("b")}}}));
}

TEST(GraphToDatabase, RejectsBadLabels) {
    EXPECT_THROW(graph_to_database(path3(), {Constant("a")}), Error);
    EXPECT_THROW(graph_to_database(path3(), {Constant("a"), Constant("a"), Constant("b")}), Error);
}

TEST(Property, CardinalityRepairsAreMaximumIndependentSets) {
    for (std::size_t n = 1; n <= 4; ++n)
        for (const auto& g : oracle::all_graphs(n)) {
            auto db = graph_to_database(g);
            std::set<std::vector<DbTuple>> expected;
            for (auto mask : oracle::scan(oracle::from_graph(g)).maximum) {
                std::vector<DbTuple> kept;
                for (const auto& t : db.instance.tuples()) {
                    bool vertex = t.relation == "Vertex";
                    if (!vertex || (mask & (1U << t.args[0].as_int()))) kept.push_back(t);
                }
                expected.insert(kept);
            }
            std::set<std::vector<DbTuple>> got;
            for (const auto& r : c_repairs(db.instance, db.constraints)) got.insert(r.retained);
            EXPECT_EQ(got, expected) << format_graph(g);
        }
}

TEST(GraphText, RoundTrip) {
    auto b = block(path3(), 1);
    std::vector<std::pair<std::string, VertexId>> markers{{"t", b.t}};
    auto text = format_graph(b.graph, markers);
    std::vector<std::pair<std::string, VertexId>> read;
    EXPECT_EQ(parse_graph(text, &read), b.graph);
    EXPECT_EQ(read, markers);
}

TEST(GraphText, Errors) {
    EXPECT_THROW(parse_graph(""), SyntaxError);
    EXPECT_THROW(parse_graph("2\n0 0\n"), SyntaxError);
    EXPECT_THROW(parse_graph("2\n0 2\n"), SyntaxError);
    EXPECT_THROW(parse_graph("2\nx 1\n"), SyntaxError);
    try {
        parse_graph("3\n0 1\n  1 1\n");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.column(), 3u);
    }
}
