// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cqa/answer.hpp"
#include "cqa/gadgets.hpp"
#include "cqa/incremental.hpp"
#include "cqa/repairs.hpp"
#include "cqa/solve.hpp"
#include "cqa/text.hpp"
#include "generators.hpp"
#include "oracle.hpp"

using namespace cqa;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Median wall time of `runs` calls, in milliseconds.
double median_ms(int runs, const std::function<void()>& f) {
    std::vector<double> ts;
    for (int i = 0; i < runs; ++i) {
        auto start = Clock::now();
        f();
        ts.push_back(ms_since(start));
    }
    std::sort(ts.begin(), ts.end());
    return ts[ts.size() / 2];
}

struct Report {
    std::vector<std::string> failures;
    std::string detail;

    void expect(bool ok, const std::string& what) {
        if (!ok && failures.size() < 5) failures.push_back(what);
        if (!ok) ++mismatches;
    }
    std::size_t mismatches = 0;
};

using Tuples = std::vector<DbTuple>;
using TupleSets = std::set<Tuples>;

Tuples tuples(const std::string& text) { return parse_instance(text).tuples(); }

TupleSets retained(const std::vector<TupleRepair>& rs) {
    TupleSets out;
    for (const auto& r : rs) out.insert(r.retained);
    return out;
}

const char* kFd = ":- P(x,y,z), P(x,u,w), y != u.";
const char* kStar = ":- R(x), S(y).";

// ---------------------------------------------------------------------------

Report key_conflict_repairs() {
    Report r;
    auto d = parse_instance("P(a,b,c)\nP(a,c,d)\nP(a,c,e)\n");
    auto ics = parse_constraints(kFd);
    const Tuples d1 = tuples("P(a,b,c)"), d2 = tuples("P(a,c,d)\nP(a,c,e)");
    std::vector<TupleRepair> s, c;
    double t = median_ms(5, [&] {
        s = s_repairs(d, ics);
        c = c_repairs(d, ics);
    });
    r.expect(retained(s) == TupleSets{d1, d2}, "S-repairs differ from {D1, D2}");
    r.expect(c.size() == 1 && c[0].retained == d2, "C-repairs differ from {D2}");
    r.expect(!c.empty() && c[0].distance == Weight(1), "C-distance is not 1");
    r.expect(t < 10.0, "runtime " + std::to_string(t) + " ms");
    r.detail = std::to_string(s.size()) + " S-repairs, " + std::to_string(c.size()) + " C-repair, " +
               std::to_string(t) + " ms";
    return r;
}

Report key_conflict_answers() {
    Report r;
    auto d = parse_instance("P(a,b,c)\nP(a,c,d)\nP(a,c,e)\n");
    auto ics = parse_constraints(kFd);
    auto q = parse_query("? P(x,y,z)", d.active_domain());
    AnswerSet c, s;
    double t = median_ms(5, [&] {
        c = certain_answers(d, ics, q, SemC{});
        s = certain_answers(d, ics, q, SemS{});
    });
    const std::vector<std::vector<Constant>> expected{{Constant("a"), Constant("c"), Constant("d")},
                                                      {Constant("a"), Constant("c"), Constant("e")}};
    r.expect(c.tuples == expected, "certain under C differs");
    r.expect(s.tuples.empty(), "certain under S is not empty");
    r.expect(t < 10.0, "runtime " + std::to_string(t) + " ms");
    r.detail = std::to_string(c.tuples.size()) + " certain tuples under C, " + std::to_string(s.tuples.size()) +
               " under S, " + std::to_string(t) + " ms";
    return r;
}

/// Cardinality repairs of U(D) read off the touched region.
TupleSets incremental_c_repairs(const Instance& base, const UpdateSequence& seq, const ConstraintSet& ics) {
    auto region = touched_region(base, seq, ics);
    Tuples outside;
    for (const auto& t : region.updated.tuples())
        if (!region.contains(t)) outside.push_back(t);
    TupleSets out;
    for (const auto& set : enumerate_maximum_is(region.local)) {
        Tuples kept = outside;
        for (auto v : set) kept.push_back(region.local.label(v));
        std::sort(kept.begin(), kept.end());
        out.insert(kept);
    }
    return out;
}

Report conflicting_insert() {
    Report r;
    auto ics = parse_constraints(kFd);
    auto seq = parse_updates("insert P(a,f,d)\n");
    auto first = parse_instance("P(a,c,d)\nP(a,c,e)\n");
    auto second = parse_instance("P(a,c,d)\n");
    const Tuples d2 = tuples("P(a,c,d)\nP(a,c,e)");
    const DbTuple pacd = tuples("P(a,c,d)")[0];
    double t = median_ms(5, [&] {
        auto u1 = apply_update(first, seq);
        r.expect(retained(c_repairs(u1, ics)) == TupleSets{d2}, "first case static: not exactly {D2}");
        r.expect(incremental_c_repairs(first, seq, ics) == TupleSets{d2}, "first case incremental: not exactly {D2}");

        auto u2 = apply_update(second, seq);
        const TupleSets two{tuples("P(a,c,d)"), tuples("P(a,f,d)")};
        r.expect(retained(c_repairs(u2, ics)) == two, "second case static: not the two expected repairs");
        r.expect(incremental_c_repairs(second, seq, ics) == two, "second case incremental: not the two repairs");

        auto q = ground_query(pacd);
        r.expect(!certain_answers(u2, ics, q, SemC{}).yes, "static certain(P(a,c,d)) is yes");
        r.expect(possible_answers(u2, ics, q, SemC{}).yes, "static possible(P(a,c,d)) is no");
        IncrementalProblem p{second, seq, ics, q, SemC{}};
        auto ic = incremental_certain(p);
        auto ip = incremental_possible(p);
        r.expect(!ic.answers.yes && !ic.fell_back, "incremental certain(P(a,c,d)) is yes or fell back");
        r.expect(ip.answers.yes && !ip.fell_back, "incremental possible(P(a,c,d)) is no or fell back");
    });
    r.expect(t < 10.0, "runtime " + std::to_string(t) + " ms");
    r.detail = "both cases on both paths, " + std::to_string(t) + " ms";
    return r;
}

Report star_conflict() {
    Report r;
    auto ics = parse_constraints(kStar);
    double t50 = 0;
    for (int n : {3, 50}) {
        std::string text = "relation S/1 (A)\n";
        for (int i = 1; i <= n; ++i) text += "R(" + std::to_string(i) + ")\n";
        auto base = parse_instance(text);
        auto seq = parse_updates("insert S(0)\n");
        auto u = apply_update(base, seq);
        const std::string tag = "n=" + std::to_string(n) + ": ";
        double t = median_ms(5, [&] {
            auto s = s_repairs(u, ics);
            auto c = c_repairs(u, ics);
            r.expect(s.size() == 2, tag + "S-repair count");
            r.expect(c.size() == 1 && c[0].distance == Weight(1), tag + "C-repairs");
            auto refuting = std::find_if(s.begin(), s.end(), [](const TupleRepair& x) {
                return std::none_of(x.retained.begin(), x.retained.end(),
                                    [](const DbTuple& t) { return t.relation == "R"; });
            });
            r.expect(refuting != s.end() && refuting->distance == Weight(n), tag + "S-distance of refuting repair");
            auto q = ground_query(DbTuple{"R", {Constant(std::int64_t{1})}});
            r.expect(certain_answers(u, ics, q, SemC{}).yes, tag + "certain R(1) under C");
            r.expect(!certain_answers(u, ics, q, SemS{}).yes, tag + "certain R(1) under S");
            r.expect(incremental_certain(IncrementalProblem{base, seq, ics, q, SemC{}}).answers.yes,
                     tag + "incremental certain R(1) under C");
            r.expect(!incremental_certain(IncrementalProblem{base, seq, ics, q, SemS{}}).answers.yes,
                     tag + "incremental certain R(1) under S");
        });
        if (n == 50) t50 = t;
    }
    r.expect(t50 < 100.0, "runtime at n=50 " + std::to_string(t50) + " ms");
    r.detail = "n=3 and n=50, " + std::to_string(t50) + " ms at n=50";
    return r;
}

Report oracle_suite() {
    Report r;
    auto start = Clock::now();
    gen::Shape shape;
    std::size_t inconsistent = 0;
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        gen::Gen g(seed * 7919);
        Instance d = g.instance(shape, 10, seed % 2 == 0);
        ConstraintSet ics = g.constraints(shape);
        Query q = g.query(shape);
        const std::string tag = "seed " + std::to_string(seed) + ": ";
        auto expected = oracle::repairs(d, ics);
        if (expected.s.size() > 1) ++inconsistent;
        auto as_lists = [](const std::vector<TupleRepair>& rs) {
            std::vector<oracle::TupleList> out;
            for (const auto& x : rs) out.push_back(x.retained);
            return out;
        };
        r.expect(as_lists(s_repairs(d, ics)) == expected.s, tag + "S-repairs");
        r.expect(as_lists(c_repairs(d, ics)) == expected.c, tag + "C-repairs");
        r.expect(as_lists(wc_repairs(d, ics)) == expected.wc, tag + "WC-repairs");
        const std::vector<std::pair<Semantics, const std::vector<oracle::TupleList>*>> cases{
            {SemS{}, &expected.s}, {SemC{}, &expected.c}, {SemWeightedC{}, &expected.wc}};
        for (const auto& [sem, reps] : cases) {
            r.expect(certain_answers(d, ics, q, sem) == oracle::over(*reps, q, true),
                     tag + "certain under " + semantics_name(sem));
            r.expect(possible_answers(d, ics, q, sem) == oracle::over(*reps, q, false),
                     tag + "possible under " + semantics_name(sem));
        }
    }
    double t = ms_since(start);
    r.expect(t < 60000.0, "suite took " + std::to_string(t) + " ms");
    r.detail = "500 instances (" + std::to_string(inconsistent) + " with several repairs), " +
               std::to_string(r.mismatches) + " mismatches, " + std::to_string(t / 1000) + " s";
    return r;
}

/// Largest independent set within `allowed`, by scanning masks.
std::size_t mask_alpha(const oracle::MaskFamily& f, std::uint32_t allowed) {
    std::size_t best = 0;
    for (std::uint32_t s = allowed;; s = (s - 1) & allowed) {
        auto size = static_cast<std::size_t>(__builtin_popcount(s));
        if (size > best && f.independent(s)) best = size;
        if (s == 0) break;
    }
    return best;
}

std::uint32_t all_of(std::size_t n) { return n >= 32 ? ~0U : (1U << n) - 1; }

Report lemma_suite() {
    Report r;
    auto start = Clock::now();
    std::size_t checks = 0;
    for (std::size_t n = 1; n <= 6; ++n) {
        for (const auto& g : oracle::all_graphs(n)) {
            auto fg = oracle::from_graph(g);
            auto hg = g.to_hypergraph();
            for (VertexId v = 0; v < n; ++v) {
                const std::string tag = format_graph(g) + "v=" + std::to_string(v) + ": ";
                auto twin = twin_extension(g, v);
                auto ft = oracle::from_graph(twin);
                auto ht = twin.to_hypergraph();
                // Mask scan.
                const bool some = oracle::in_some_maximum(fg, v);
                const bool all_twin = oracle::in_all_maximum(ft, v);
                const bool grows = oracle::alpha(ft) == oracle::alpha(fg) + 1;
                r.expect(some == all_twin && some == grows, tag + "twin equivalence (mask scan)");
                // Hitting-set solver.
                const bool some_s = in_some_maximum_is(hg, v);
                const bool all_twin_s = in_all_maximum_is(ht, v);
                const bool grows_s = alpha(ht).size == alpha(hg).size + 1;
                r.expect(some_s == all_twin_s && some_s == grows_s, tag + "twin equivalence (solver)");
                r.expect(some == some_s, tag + "solvers disagree on twin");

                auto rh = rhombus_extension(g, v);
                const bool all = oracle::in_all_maximum(fg, v);
                const bool some_rh = oracle::in_some_maximum(oracle::from_graph(rh), v);
                const bool all_s = in_all_maximum_is(hg, v);
                const bool some_rh_s = in_some_maximum_is(rh.to_hypergraph(), v);
                r.expect(all == some_rh, tag + "rhombus biconditional (mask scan)");
                r.expect(all_s == some_rh_s, tag + "rhombus biconditional (solver)");
                r.expect(all == all_s, tag + "solvers disagree on rhombus");
                checks += 2;
            }
        }
    }
    for (std::size_t n = 0; n <= 4; ++n) {
        for (const auto& g : oracle::all_graphs(n)) {
            const std::size_t a = oracle::alpha(oracle::from_graph(g));
            for (std::size_t k = 1; k <= 5; ++k) {
                auto b = block(g, k);
                const std::string tag = format_graph(g) + "k=" + std::to_string(k) + ": ";
                auto fb = oracle::from_graph(b.graph);
                const std::uint32_t full = all_of(b.graph.vertex_count());
                const bool t_all = mask_alpha(fb, full & ~(1U << b.t)) < mask_alpha(fb, full);
                r.expect(t_all == (a == k), tag + "block biconditional (mask scan)");
                r.expect(in_all_maximum_is(b.graph.to_hypergraph(), b.t) == (a == k),
                         tag + "block biconditional (solver)");
                ++checks;
            }
        }
    }
    for (std::size_t n = 1; n <= 5; ++n) {
        for (const auto& g : oracle::all_graphs(n)) {
            auto db = graph_to_database(g);
            TupleSets expected;
            for (auto mask : oracle::scan(oracle::from_graph(g)).maximum) {
                Tuples kept;
                for (const auto& t : db.instance.tuples())
                    if (t.relation != "Vertex" || (mask & (1U << t.args[0].as_int()))) kept.push_back(t);
                expected.insert(kept);
            }
            auto got = c_repairs(db.instance, db.constraints);
            r.expect(got.size() == expected.size() && retained(got) == expected,
                     format_graph(g) + "encoding repairs differ from maximum independent sets");
            ++checks;
        }
    }
    double t = ms_since(start);
    r.expect(t < 300000.0, "suite took " + std::to_string(t) + " ms");
    r.detail = std::to_string(checks) + " checks, " + std::to_string(r.mismatches) + " failures, " +
               std::to_string(t / 1000) + " s";
    return r;
}

Report incremental_suite() {
    Report r;
    gen::Shape shape;
    shape.domain = 12;
    shape.max_atoms = 2;
    double worst = 0;
    std::size_t conflicted = 0, largest = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        gen::Gen g(seed * 104729);
        IncrementalProblem p;
        p.ics = g.constraints(shape);
        p.base = g.make_consistent(g.instance(shape, 200), p.ics);
        p.seq = g.updates(shape, p.base, g.uniform(1, 4), seed % 3 == 0);
        Instance u = apply_update(p.base, p.seq);
        largest = std::max(largest, u.size());
        if (!is_consistent(u, p.ics)) ++conflicted;
        p.query = g.coin() ? g.ground_literals(shape, u) : g.query(shape);
        const std::string tag = "seed " + std::to_string(seed) + ": ";

        auto start = Clock::now();
        const std::size_t dist = incremental_c_distance(p.base, p.seq, p.ics);
        worst = std::max(worst, ms_since(start));
        r.expect(dist == u.size() - alpha(build_conflict_hypergraph(u, p.ics)).size, tag + "C-distance");

        for (Semantics sem : {Semantics{SemS{}}, Semantics{SemC{}}}) {
            p.semantics = sem;
            for (auto mode : {AnswerMode::certain, AnswerMode::possible}) {
                start = Clock::now();
                auto got = incremental_answer(p, mode);
                worst = std::max(worst, ms_since(start));
                auto expected = mode == AnswerMode::certain ? certain_answers(u, p.ics, p.query, sem)
                                                            : possible_answers(u, p.ics, p.query, sem);
                r.expect(got.answers == expected,
                         tag + to_string(mode) + " under " + semantics_name(sem) + " for " + to_string(p.query));
            }
        }
    }
    r.expect(worst < 50.0, "slowest incremental call " + std::to_string(worst) + " ms");
    r.detail = "200 cases (" + std::to_string(conflicted) + " conflicted, largest |U(D)| " + std::to_string(largest) +
               "), " + std::to_string(r.mismatches) + " mismatches, slowest call " + std::to_string(worst) + " ms";
    return r;
}

Report scaling() {
    Report r;
    auto ics = parse_constraints(kStar);
    auto seq = parse_updates("insert S(0)\ninsert S(1)\ninsert S(2)\n");
    const std::vector<std::size_t> sizes{1000, 10000, 100000};
    std::vector<double> times;
    for (auto n : sizes) {
        Instance base;
        base.schema().add(RelationDecl{"R", {"A"}});
        base.schema().add(RelationDecl{"S", {"A"}});
        for (std::size_t i = 1; i <= n; ++i) base.insert(DbTuple{"R", {Constant(static_cast<std::int64_t>(i))}});
        IncrementalProblem p{base, seq, ics, ground_query(DbTuple{"R", {Constant(std::int64_t{1})}}), SemC{}};
        bool yes = false;
        times.push_back(median_ms(5, [&] { yes = incremental_certain(p).answers.yes; }));
        r.expect(yes, "certain R(1) is not yes at n=" + std::to_string(n));
    }
    std::ostringstream detail;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        detail << (i ? ", " : "") << "n=" << sizes[i] << " " << times[i] << " ms";
        if (i == 0) continue;
        const double time_ratio = times[i] / times[i - 1];
        const double size_ratio = static_cast<double>(sizes[i]) / static_cast<double>(sizes[i - 1]);
        r.expect(time_ratio <= 2.0 * size_ratio, "time ratio " + std::to_string(time_ratio) + " exceeds twice " +
                                                     std::to_string(size_ratio));
    }
    r.detail = detail.str();
    return r;
}

Report attribute_suite() {
    Report r;
    gen::Shape shape;
    shape.relations = {{"R", 2}, {"T", 1}};
    std::size_t cases = 0, repaired = 0, incremental = 0;
    for (std::uint64_t seed = 1; cases < 100; ++seed) {
        gen::Gen g(seed * 15485863);
        Instance d(g.schema(shape));
        for (std::size_t tries = 0, n = g.uniform(1, 3); d.size() < n && tries < 20; ++tries) d.insert(g.tuple(shape));
        std::size_t cells = 0;
        for (const auto& t : d.tuples()) cells += t.args.size();
        if (cells > 6) continue;
        ++cases;
        ConstraintSet ics = g.constraints(shape);
        BoundedA sem;
        for (std::size_t i = 0, k = g.uniform(1, 3); i < k; ++i) sem.candidates.insert(g.value(shape));
        Query q = g.query(shape);
        const std::string tag = "seed " + std::to_string(seed) + ": ";
        for (auto w : {ChangeWeight::unit, ChangeWeight::quadratic}) {
            sem.weight = w;
            auto expected = oracle::a_repairs(d, ics, sem);
            if (!expected.empty() && !expected.front().changes.empty()) ++repaired;
            if (expected.empty()) {
                bool threw = false;
                try {
                    a_repairs_bounded(d, ics, sem);
                } catch (const NoRepair&) {
                    threw = true;
                }
                r.expect(threw, tag + "expected no repair");
            } else {
                auto got = a_repairs_bounded(d, ics, sem);
                bool same = got.size() == expected.size();
                for (std::size_t i = 0; same && i < got.size(); ++i)
                    same = got[i].changes == expected[i].changes && got[i].cost == expected[i].cost;
                r.expect(same, tag + "A-repairs differ");
            }

            IncrementalProblem p;
            p.ics = ics;
            p.base = g.make_consistent(d, ics);
            p.seq = g.updates(shape, p.base, g.uniform(1, 2), false, true);
            p.query = q;
            Instance u = apply_update(p.base, p.seq);
            std::size_t u_cells = 0;
            for (const auto& t : u.tuples()) u_cells += t.args.size();
            if (u_cells > 6) continue;
            ++incremental;
            r.expect(incremental_a_certain(p, sem) == certain_answers(u, ics, q, sem), tag + "incremental certain");
        }
    }
    r.detail = std::to_string(cases) + " instances under unit and quadratic weights (" + std::to_string(repaired) +
               " needing changes, " + std::to_string(incremental) + " incremental checks), " +
               std::to_string(r.mismatches) + " mismatches";
    return r;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Report()>>> criteria{
        {"key conflict, golden repairs", key_conflict_repairs},
        {"key conflict, golden open answers", key_conflict_answers},
        {"conflicting insert, static and incremental", conflicting_insert},
        {"star conflict at n=3 and n=50", star_conflict},
        {"oracle equivalence, 500 random instances", oracle_suite},
        {"gadget equivalences, exhaustive small graphs", lemma_suite},
        {"incremental equals static, 200 cases", incremental_suite},
        {"incremental scaling in |D| (star, m=3)", scaling},
        {"bounded attribute repairs, 100 instances", attribute_suite},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Report r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r.failures.push_back(std::string("exception: ") + e.what());
        }
        const bool ok = r.failures.empty();
        failed += ok ? 0 : 1;
        std::printf("[%s] criterion %zu: %s: %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    r.detail.c_str());
        for (const auto& f : r.failures) std::printf("       %s\n", f.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
