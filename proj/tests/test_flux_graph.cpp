#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "ramiflow/flux_graph.hpp"

using namespace ramiflow;
using testutil::FamilyInstance;

TEST_CASE("edge_cost in both families") {
    CHECK(edge_cost(4.0, CostSpec::branched(0.5)) == doctest::Approx(2.0));
    CHECK(edge_cost(4.0, CostSpec::urban(0.5, 2.0)) == doctest::Approx(4.5));
    CHECK(edge_cost(0.2, CostSpec::urban(0.5, 2.0)) == doctest::Approx(0.4));
    CHECK(edge_cost(0.0, CostSpec::branched(0.3)) == 0.0);
    CHECK(edge_cost(0.0, CostSpec::urban(0.5, 2.0)) == 0.0);
    CHECK_THROWS_AS(edge_cost(-1.0, CostSpec::branched(0.5)), std::invalid_argument);
}

TEST_CASE("CostSpec validates parameter ranges") {
    CHECK_THROWS_AS(CostSpec::branched(0.0), std::invalid_argument);
    CHECK_THROWS_AS(CostSpec::branched(1.5), std::invalid_argument);
    CHECK_NOTHROW(CostSpec::branched(1.0));
    CHECK_THROWS_AS(CostSpec::urban(0.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(CostSpec::urban(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("edge_cost is nondecreasing, concave and subadditive on grids") {
    std::vector<CostSpec> specs{CostSpec::branched(0.3), CostSpec::branched(0.5),
                                CostSpec::branched(0.9), CostSpec::urban(0.5, 2.0),
                                CostSpec::urban(0.25, 3.0)};
    for (const CostSpec& spec : specs) {
        const int n = 60;
        const double step = 3.0 / n;
        for (int i = 1; i + 1 <= n; ++i) {
            double w = i * step;
            CHECK(edge_cost(w, spec) <= edge_cost(w + step, spec) + 1e-15);
            // Midpoint concavity along the grid.
            double mid = edge_cost(w, spec);
            double chord = 0.5 * (edge_cost(w - step, spec) + edge_cost(w + step, spec));
            CHECK(mid >= chord - 1e-12);
        }
        for (int i = 1; i <= 20; ++i)
            for (int j = 1; j <= 20; ++j) {
                double u = i * 0.15, v = j * 0.15;
                CHECK(edge_cost(u + v, spec) <= edge_cost(u, spec) + edge_cost(v, spec) + 1e-12);
            }
    }
}

TEST_CASE("divergence of a single edge and a cycle") {
    FluxGraph single(2, {{0.0, 0.0}, {3.0, 4.0}}, {{0, 1, 2.5}});
    auto [plus, minus] = divergence(single);
    REQUIRE(plus.size() == 1);
    REQUIRE(minus.size() == 1);
    CHECK(plus.atoms()[0].pos == Vec{0.0, 0.0});
    CHECK(plus.atoms()[0].mass == 2.5);
    CHECK(minus.atoms()[0].pos == Vec{3.0, 4.0});
    CHECK(minus.atoms()[0].mass == 2.5);

    FluxGraph tri(2, {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}});
    auto [p2, m2] = divergence(tri);
    CHECK(p2.empty());
    CHECK(m2.empty());
}

TEST_CASE("divergence of the family graph matches the stated marginals") {
    FamilyInstance fam;
    FluxGraph g = fam.graph(0.05);
    auto [plus, minus] = divergence(g);
    CHECK(testutil::same_signed_measure({plus, minus}, {fam.mu_plus(), fam.mu_minus()}, 1e-12));
    CHECK(check_mass_flux(g, fam.mu_plus(), fam.mu_minus(), 1e-12));
}

TEST_CASE("check_mass_flux accepts the right marginals and rejects moved sinks") {
    FluxGraph single(2, {{0.0, 0.0}, {1.0, 0.0}}, {{0, 1, 0.75}});
    DiscreteMeasure mp(2, {{{0.0, 0.0}, 0.75}});
    DiscreteMeasure mm(2, {{{1.0, 0.0}, 0.75}});
    DiscreteMeasure moved(2, {{{1.0, 0.5}, 0.75}});
    CHECK(check_mass_flux(single, mp, mm, 1e-12));
    CHECK_FALSE(check_mass_flux(single, mp, moved, 1e-12));
}

TEST_CASE("graph_cost on single edges") {
    FluxGraph g(2, {{0.0, 0.0}, {2.0, 0.0}}, {{0, 1, 4.0}});
    CHECK(graph_cost(g, CostSpec::branched(0.5)) == doctest::Approx(4.0));
    CHECK(graph_cost(g, CostSpec::urban(0.5, 2.0)) == doctest::Approx(9.0));
}

TEST_CASE("family graph cost is m-independent and equals the closed form") {
    FamilyInstance fam;
    CostSpec spec = CostSpec::urban(fam.eps, fam.a);
    // 2*a*m1 + 2*a*eps + 3*a*m2 with a=2, m1=1, eps=0.5, m2=0.1.
    CHECK(fam.family_cost() == doctest::Approx(6.6).epsilon(1e-15));
    for (double m : {0.0, 0.025, 0.05, 0.1})
        CHECK(graph_cost(fam.graph(m), spec) == doctest::Approx(6.6).epsilon(1e-12));
}

TEST_CASE("total_variation") {
    CHECK(total_variation(FluxGraph(2)) == 0.0);
    FluxGraph g(2, {{0.0, 0.0}, {3.0, 0.0}}, {{0, 1, 2.0}});
    CHECK(total_variation(g) == doctest::Approx(6.0));
    FluxGraph tri(2, {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2}},
                  {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}});
    CHECK(total_variation(tri) == doctest::Approx(3.0));
}

TEST_CASE("graph_sum merges, cancels and unions") {
    FluxGraph a(2, {{0.0, 0.0}, {1.0, 0.0}}, {{0, 1, 1.0}});
    FluxGraph b(2, {{0.0, 0.0}, {1.0, 0.0}}, {{0, 1, 2.0}});
    FluxGraph sum = graph_sum(a, b);
    REQUIRE(sum.edges().size() == 1);
    CHECK(sum.edges()[0].weight == 3.0);

    FluxGraph rev(2, {{0.0, 0.0}, {1.0, 0.0}}, {{1, 0, 2.0}});
    CHECK(graph_sum(b, rev).empty());

    FluxGraph c(2, {{5.0, 5.0}, {6.0, 5.0}}, {{0, 1, 1.0}});
    FluxGraph uni = graph_sum(a, c);
    CHECK(uni.edges().size() == 2);
}

TEST_CASE("graph_sum splits partial collinear overlap") {
    // [0,2] forward weight 1 plus [1,3] forward weight 2 on the x axis.
    FluxGraph a(2, {{0.0, 0.0}, {2.0, 0.0}}, {{0, 1, 1.0}});
    FluxGraph b(2, {{1.0, 0.0}, {3.0, 0.0}}, {{0, 1, 2.0}});
    FluxGraph sum = graph_sum(a, b);
    REQUIRE(sum.edges().size() == 3);
    CHECK(total_variation(sum) == doctest::Approx(1.0 + 3.0 + 2.0));

    // Opposite orientation on the shared piece [1,2] cancels it entirely.
    FluxGraph c(2, {{3.0, 0.0}, {1.0, 0.0}}, {{0, 1, 1.0}});
    FluxGraph diff = graph_sum(a, c);
    CHECK(diff.edges().size() == 2);
    CHECK(total_variation(diff) == doctest::Approx(2.0));
}

TEST_CASE("divergence is additive under graph_sum") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        FluxGraph g1 = testutil::random_graph(rng, 2, 6, 0.4);
        FluxGraph g2 = testutil::random_graph(rng, 2, 6, 0.4);
        FluxGraph sum = graph_sum(g1, g2);
        auto [p1, m1] = divergence(g1);
        auto [p2, m2] = divergence(g2);
        auto [ps, ms] = divergence(sum);
        std::map<Vec, double> net;
        for (const Atom& a : p1.atoms()) net[a.pos] += a.mass;
        for (const Atom& a : m1.atoms()) net[a.pos] -= a.mass;
        for (const Atom& a : p2.atoms()) net[a.pos] += a.mass;
        for (const Atom& a : m2.atoms()) net[a.pos] -= a.mass;
        for (const Atom& a : ps.atoms()) net[a.pos] -= a.mass;
        for (const Atom& a : ms.atoms()) net[a.pos] += a.mass;
        for (const auto& [pos, v] : net) CHECK(std::abs(v) <= 1e-12);
    }
}

TEST_CASE("graph_cost is subadditive for same-orientation overlays") {
    std::mt19937_64 rng(123);
    CostSpec urban = CostSpec::urban(0.5, 2.0);
    CostSpec branched = CostSpec::branched(0.5);
    for (int trial = 0; trial < 30; ++trial) {
        FluxGraph g1 = testutil::random_dag(rng, 2, 5, 0.5);
        FluxGraph g2 = testutil::random_dag(rng, 2, 5, 0.5);
        FluxGraph sum = graph_sum(g1, g2);
        for (const CostSpec& spec : {urban, branched}) {
            // Opposite-direction cancellation only lowers the left side.
            CHECK(graph_cost(sum, spec) <=
                  graph_cost(g1, spec) + graph_cost(g2, spec) + 1e-9);
        }
    }
    // A genuinely shared corridor is strictly cheaper than the parts.
    FluxGraph a(2, {{0.0, 0.0}, {1.0, 0.0}}, {{0, 1, 1.0}});
    CHECK(graph_cost(graph_sum(a, a), branched) <
          2 * graph_cost(a, branched));
}

TEST_CASE("total_variation bounds the urban planning cost from below") {
    std::mt19937_64 rng(55);
    CostSpec spec = CostSpec::urban(0.5, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        FluxGraph g = testutil::random_graph(rng, 2, 6, 0.4);
        CHECK(total_variation(g) <= graph_cost(g, spec) + 1e-12);
    }
}

TEST_CASE("extract_network_subgraph thresholds strictly") {
    // Threshold eps/(a-1) = 0.5.
    FluxGraph g(2, {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}},
                {{0, 1, 1.0}, {1, 2, 0.3}, {2, 3, 0.5}});
    auto picked = extract_network_subgraph(g, 0.5, 2.0);
    REQUIRE(picked.size() == 1);
    CHECK(g.edges()[picked[0]].weight == 1.0);

    FluxGraph low(2, {{0.0, 0.0}, {1.0, 0.0}}, {{0, 1, 0.2}});
    CHECK(extract_network_subgraph(low, 0.5, 2.0).empty());
}

TEST_CASE("normalisation produces a canonical form") {
    // Parallel edges merge; antiparallel cancel; zero weights and isolated
    // vertices disappear; duplicate vertex coordinates unify.
    FluxGraph g(2,
                {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {5.0, 5.0}},
                {{0, 1, 1.0}, {2, 1, 2.0}, {1, 0, 0.5}, {0, 1, 0.0}});
    REQUIRE(g.vertices().size() == 2);
    REQUIRE(g.edges().size() == 1);
    CHECK(g.edges()[0].weight == doctest::Approx(2.5));

    // Self loops (by position) are dropped.
    FluxGraph h(2, {{0.0, 0.0}, {0.0, 0.0}}, {{0, 1, 3.0}});
    CHECK(h.empty());
}

TEST_CASE("canonicalized splits internal collinear overlap") {
    FluxGraph g(2, {{0.0, 0.0}, {2.0, 0.0}, {1.0, 0.0}, {3.0, 0.0}},
                {{0, 1, 1.0}, {2, 3, 1.0}});
    FluxGraph canon = g.canonicalized();
    CHECK(canon.edges().size() == 3);
    CHECK(total_variation(canon) == doctest::Approx(total_variation(g)));
    // Per-edge costs differ once the shared piece is pooled.
    CostSpec spec = CostSpec::branched(0.5);
    CHECK(graph_cost(canon, spec) < graph_cost(g, spec));
}
