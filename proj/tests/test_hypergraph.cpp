#include <gtest/gtest.h>

#include "cqa/hypergraph.hpp"
#include "generators.hpp"
#include "oracle.hpp"

using namespace cqa;

namespace {

ConflictHypergraph key_conflict() {
    return build_conflict_hypergraph(parse_instance("P(a,b,c)\nP(a,c,d)\nP(a,c,e)\n"),
                                     parse_constraints(":- P(x,y,z), P(x,u,w), y != u."));
}

}  // namespace

TEST(Build, KeyConflict) {
    auto h = key_conflict();
    EXPECT_EQ(h.vertex_count(), 3u);
    EXPECT_EQ(h.edge_sets(), (std::vector<VertexSet>{{0, 1}, {0, 2}}));
    EXPECT_EQ(to_string(h.label(0)), "P(a,b,c)");
    EXPECT_EQ(h.id_of(DbTuple{"P", {"a", "c", "e"}}), VertexId{2});
    EXPECT_FALSE(h.id_of(DbTuple{"P", {"z", "z", "z"}}));
}

TEST(Build, StarHasThreeEdgesThroughS0) {
    auto h = build_conflict_hypergraph(parse_instance("R(1)\nR(2)\nR(3)\nS(0)\n"), parse_constraints(":- R(x), S(y)."));
    ASSERT_EQ(h.edge_count(), 3u);
    const VertexId s0 = *h.id_of(DbTuple{"S", {0}});
    for (const auto& e : h.edges()) EXPECT_TRUE(std::binary_search(e.vertices.begin(), e.vertices.end(), s0));
}

TEST(Normalize, DropsDuplicateAndNonMinimalEdges) {
    Hypergraph h(4, {{{0, 1, 2}, "a"}, {{1, 0}, "b"}, {{0, 1}, "c"}, {{3}, "d"}, {{2, 3}, "e"}});
    EXPECT_EQ(h.edge_sets(), (std::vector<VertexSet>{{0, 1}, {3}}));
    EXPECT_THROW(Hypergraph(2, {{{0, 5}, "x"}}), Error);
    EXPECT_THROW(Hypergraph(2, {{{}, "x"}}), Error);
}

TEST(Queries, IndependenceAndIsolated) {
    auto h = key_conflict();
    EXPECT_TRUE(h.is_independent({1, 2}));
    EXPECT_FALSE(h.is_independent({0, 2}));
    Hypergraph g(4, {{{0, 1}, ""}});
    EXPECT_EQ(g.isolated(), (VertexSet{2, 3}));
}

TEST(Restrict, RemovesVerticesAndIncidentEdges) {
    auto h = key_conflict().restrict({0});
    EXPECT_EQ(h.vertices(), (VertexSet{1, 2}));
    EXPECT_EQ(h.edge_count(), 0u);
    EXPECT_TRUE(h.has_labels());
}

TEST(ConditionOn, ForcesPartnersOutAndShrinksLargerEdges) {
    Hypergraph h(5, {{{0, 1}, ""}, {{0, 2, 3}, ""}, {{1, 4}, ""}, {{3, 4}, ""}});
    auto c = h.condition_on(0);
    EXPECT_EQ(c.vertices(), (VertexSet{2, 3, 4}));
    EXPECT_EQ(c.edge_sets(), (std::vector<VertexSet>{{2, 3}, {3, 4}}));
    Hypergraph s(2, {{{0}, ""}});
    EXPECT_THROW(s.condition_on(0), ForcedOut);
}

TEST(ConditionOn, MatchesMaskScanOfIndependentSetsThroughVertex) {
    // alpha(condition_on(h, v)) + 1 equals the largest independent set containing v.
    gen::Gen g(7);
    for (int round = 0; round < 300; ++round) {
        const std::size_t n = g.uniform(1, 7);
        std::vector<Hyperedge> es;
        for (std::size_t i = 0, m = g.uniform(0, 6); i < m; ++i) {
            VertexSet e;
            for (std::size_t j = 0, k = g.uniform(1, 3); j < k; ++j) e.push_back(static_cast<VertexId>(g.uniform(0, n - 1)));
            es.push_back({e, ""});
        }
        Hypergraph h(n, es);
        auto fam = oracle::from_hypergraph(h);
        for (VertexId v = 0; v < n; ++v) {
            std::size_t best = 0;
            bool any = false;
            for (std::uint32_t s = 0; s < (1U << n); ++s)
                if ((s & (1U << v)) && fam.independent(s)) {
                    any = true;
                    best = std::max<std::size_t>(best, __builtin_popcount(s));
                }
            if (!any) {
                EXPECT_THROW(h.condition_on(v), ForcedOut);
                continue;
            }
            auto c = h.condition_on(v);
            // Vertices kept by conditioning are a subset; scan them directly.
            std::uint32_t allowed = 0;
            for (auto u : c.vertices()) allowed |= 1U << u;
            auto cf = oracle::from_hypergraph(c);
            cf.n = n;
            EXPECT_EQ(oracle::alpha(cf, allowed) + 1, best) << "round " << round << " v " << v;
        }
    }
}

TEST(Text, RoundTripWithLabels) {
    auto d = parse_instance("P(a,b,c) @ 2\nP(a,c,d)\nP(a,c,e)\n");
    auto h = build_conflict_hypergraph(d, parse_constraints("fd: :- P(x,y,z), P(x,u,w), y != u."));
    auto text = format_hypergraph(h);
    auto back = parse_hypergraph(text);
    EXPECT_EQ(back.vertices(), h.vertices());
    EXPECT_EQ(back.edge_sets(), h.edge_sets());
    EXPECT_EQ(back.label(0), h.label(0));
    EXPECT_EQ(back.weight(0), Weight(2));
    EXPECT_EQ(format_hypergraph(back), text);
}

TEST(Text, RoundTripUnlabelled) {
    Hypergraph h(4, {{{0, 1, 3}, ""}, {{2}, "k"}});
    auto back = parse_hypergraph(format_hypergraph(h));
    EXPECT_EQ(back.edge_sets(), h.edge_sets());
    EXPECT_EQ(back.edges()[0].constraint, h.edges()[0].constraint);
}

TEST(Build, EdgesMatchNaiveMinimalViolations) {
    gen::Shape shape;
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        gen::Gen g(seed);
        Instance d = g.instance(shape, 7);
        ConstraintSet ics = g.constraints(shape);
        auto h = build_conflict_hypergraph(d, ics);
        // Minimal inconsistent subsets by mask scan.
        auto all = d.tuples();
        std::vector<VertexSet> expected;
        std::set<std::uint32_t> bad;
        for (std::uint32_t m = 1; m < (1U << all.size()); ++m)
            if (!oracle::consistent(oracle::subset(all, m), ics)) bad.insert(m);
        for (auto m : bad) {
            bool minimal = true;
            for (std::size_t i = 0; i < all.size() && minimal; ++i)
                if ((m & (1U << i)) && bad.count(m & ~(1U << i))) minimal = false;
            if (minimal) expected.push_back(oracle::to_set(m));
        }
        std::sort(expected.begin(), expected.end());
        auto got = h.edge_sets();
        std::sort(got.begin(), got.end());
        EXPECT_EQ(got, expected) << "seed " << seed;
    }
}

TEST(Build, ConsistentInstanceIsEdgeless) {
    auto h = build_conflict_hypergraph(parse_instance("P(a,c,d)\nP(a,c,e)\n"),
                                       parse_constraints(":- P(x,y,z), P(x,u,w), y != u."));
    EXPECT_EQ(h.edge_count(), 0u);
    EXPECT_TRUE(h.is_independent({}));
}

TEST(Restrict, StarMinusHubIsEdgeless) {
    auto h = build_conflict_hypergraph(parse_instance("R(1)\nR(2)\nR(3)\nS(0)\n"), parse_constraints(":- R(x), S(y)."));
    auto r = h.restrict({*h.id_of(DbTuple{"S", {0}})});
    EXPECT_EQ(r.vertex_count(), 3u);
    EXPECT_EQ(r.edge_count(), 0u);
    EXPECT_EQ(h.restrict({}).edge_sets(), h.edge_sets());
}

TEST(ConditionOn, ThreeUniformEdgeShrinksToPair) {
    Hypergraph h(3, {{{0, 1, 2}, ""}});
    EXPECT_EQ(h.condition_on(0).edge_sets(), (std::vector<VertexSet>{{1, 2}}));
    Hypergraph path(3, {{{0, 1}, ""}, {{1, 2}, ""}});
    auto c = path.condition_on(1);
    EXPECT_EQ(c.vertex_count(), 0u);
    Hypergraph edgeless(3, {});
    EXPECT_EQ(edgeless.condition_on(2).vertices(), (VertexSet{0, 1}));
}

TEST(Build, EmptyEdgeSetIffConsistent) {
    gen::Shape shape;
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        gen::Gen g(seed);
        Instance d = g.instance(shape, 8);
        ConstraintSet ics = g.constraints(shape);
        EXPECT_EQ(build_conflict_hypergraph(d, ics).edge_count() == 0, is_consistent(d, ics)) << "seed " << seed;
    }
}

TEST(Build, MaximalIndependentSetsAreSRepairs) {
    gen::Shape shape;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        gen::Gen g(seed);
        Instance d = g.instance(shape, 8);
        ConstraintSet ics = g.constraints(shape);
        auto h = build_conflict_hypergraph(d, ics);
        auto fam = oracle::from_hypergraph(h);
        std::vector<std::vector<DbTuple>> from_graph;
        for (auto m : oracle::scan(fam).maximal) {
            std::vector<DbTuple> r;
            for (auto v : oracle::to_set(m)) r.push_back(h.label(v));
            std::sort(r.begin(), r.end());
            from_graph.push_back(r);
        }
        std::sort(from_graph.begin(), from_graph.end());
        EXPECT_EQ(from_graph, oracle::repairs(d, ics).s) << "seed " << seed;
    }
}

TEST(Alpha, RestrictAndConditionBounds) {
    gen::Gen g(99);
    for (int round = 0; round < 300; ++round) {
        const std::size_t n = g.uniform(1, 7);
        std::vector<Hyperedge> es;
        for (std::size_t i = 0, m = g.uniform(0, 7); i < m; ++i) {
            VertexSet e;
            for (std::size_t j = 0, k = g.uniform(1, 3); j < k; ++j) e.push_back(static_cast<VertexId>(g.uniform(0, n - 1)));
            es.push_back({e, ""});
        }
        Hypergraph h(n, es);
        auto a = [&](const Hypergraph& x) {
            std::uint32_t allowed = 0;
            for (auto u : x.vertices()) allowed |= 1U << u;
            auto f = oracle::from_hypergraph(x);
            f.n = n;
            return oracle::alpha(f, allowed);
        };
        const std::size_t ah = a(h);
        for (VertexId v = 0; v < n; ++v) {
            const std::size_t ar = a(h.restrict({v}));
            EXPECT_LE(ar, ah);
            EXPECT_GE(ar + 1, ah);
            try {
                EXPECT_EQ(ah, std::max(ar, 1 + a(h.condition_on(v))));
            } catch (const ForcedOut&) {
                EXPECT_EQ(ah, ar);
            }
        }
    }
}
