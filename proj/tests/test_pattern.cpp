#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "ramiflow/pattern.hpp"

using namespace ramiflow;

namespace {

// The three-segment corridor pattern used across several examples:
// fibre 1 (mass 1) walks 0->1->2 on the x axis, fibre 2 (mass 2) walks
// 1->2->3, so the solidarity masses are 1, 3, 2.
IrrigationPattern corridor_pattern() {
    return IrrigationPattern(
        2, {{{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}, 1.0},
            {{{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}}, 2.0}});
}

// Fibres of the equal-cost family instance for routing parameter m.
IrrigationPattern family_pattern(const testutil::FamilyInstance& fam, double m) {
    std::vector<Fibre> fibres;
    if (m > 0.0) fibres.push_back({{fam.A, fam.B, fam.C, fam.D}, m});
    fibres.push_back({{fam.A, fam.B}, fam.m1});
    if (fam.m2 - m > 0.0) fibres.push_back({{fam.A, fam.D}, fam.m2 - m});
    fibres.push_back({{fam.C, fam.D}, fam.m1});
    return IrrigationPattern(2, std::move(fibres));
}

// Splits every fibre segment at a few interior points; the image is
// unchanged, so reparameterisation invariance says the cost is too.
IrrigationPattern subdivide(const IrrigationPattern& chi, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> extra(0, 2);
    std::uniform_real_distribution<double> cut(0.2, 0.8);
    std::vector<Fibre> fibres;
    for (const Fibre& f : chi.fibres()) {
        Fibre nf;
        nf.mass = f.mass;
        for (std::size_t i = 0; i + 1 < f.polyline.size(); ++i) {
            nf.polyline.push_back(f.polyline[i]);
            int k = extra(rng);
            std::vector<double> ts;
            for (int e = 0; e < k; ++e) ts.push_back(cut(rng));
            std::sort(ts.begin(), ts.end());
            for (double t : ts) nf.polyline.push_back(lerp(f.polyline[i], f.polyline[i + 1], t));
        }
        nf.polyline.push_back(f.polyline.back());
        if (nf.polyline.size() < 2 && !f.polyline.empty()) nf.polyline = f.polyline;
        fibres.push_back(std::move(nf));
    }
    return IrrigationPattern(chi.dim(), std::move(fibres));
}

}  // namespace

TEST_CASE("irrigating_measures of simple patterns") {
    IrrigationPattern one(2, {{{{0.0, 0.0}, {1.0, 1.0}}, 0.5}});
    auto [mp, mm] = irrigating_measures(one);
    CHECK(mp == DiscreteMeasure(2, {{{0.0, 0.0}, 0.5}}));
    CHECK(mm == DiscreteMeasure(2, {{{1.0, 1.0}, 0.5}}));

    IrrigationPattern two(2, {{{{0.0, 0.0}, {1.0, 0.0}}, 0.5},
                              {{{0.0, 0.0}, {0.0, 1.0}}, 0.25}});
    auto [mp2, mm2] = irrigating_measures(two);
    REQUIRE(mp2.size() == 1);
    CHECK(mp2.atoms()[0].mass == 0.75);
}

TEST_CASE("irrigating_measures of the family pattern match the instance") {
    testutil::FamilyInstance fam;
    auto [mp, mm] = irrigating_measures(family_pattern(fam, 0.0));
    CHECK(mp == fam.mu_plus());
    CHECK(mm == fam.mu_minus());
}

TEST_CASE("solidarity_mass counts fibres through a point") {
    IrrigationPattern chi(2, {{{{0.0, 0.0}, {2.0, 0.0}}, 1.0},
                              {{{0.0, 0.0}, {2.0, 0.0}}, 2.0}});
    CHECK(solidarity_mass(chi, {1.0, 0.0}) == 3.0);
    CHECK(solidarity_mass(chi, {1.0, 1.0}) == 0.0);
    CHECK(solidarity_mass(chi, {2.0, 0.0}) == 3.0);

    IrrigationPattern single(2, {{{{0.0, 0.0}, {1.0, 0.0}}, 0.5}});
    CHECK(solidarity_mass(single, {0.0, 0.0}) == 0.5);
}

TEST_CASE("pattern constructor validates fibres") {
    CHECK_THROWS_AS(IrrigationPattern(2, {{{{0.0, 0.0}}, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(IrrigationPattern(2, {{{{0.0, 0.0}}, -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(IrrigationPattern(2, {{{}, 1.0}}), std::invalid_argument);
}

TEST_CASE("pattern_cost on a single fibre matches the single-edge graph cost") {
    IrrigationPattern chi(2, {{{{0.0, 0.0}, {2.0, 0.0}}, 4.0}});
    CHECK(pattern_cost(chi, CostSpec::branched(0.5)) == doctest::Approx(4.0));
}

TEST_CASE("pattern_cost integrates segmentwise constant solidarity") {
    IrrigationPattern chi = corridor_pattern();
    // Segments of masses 1, 3, 2 and unit length each.
    CHECK(pattern_cost(chi, CostSpec::urban(0.5, 2.0)) ==
          doctest::Approx(1.5 + 3.5 + 2.5).epsilon(1e-12));
    // alpha = 1 degenerates to mass times length.
    CHECK(pattern_cost(chi, CostSpec::branched(1.0)) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("urban pattern cost dominates the mass-length integral") {
    std::mt19937_64 rng(17);
    CostSpec spec = CostSpec::urban(0.5, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        IrrigationPattern chi = testutil::random_pattern(rng);
        double mass_length = 0;
        for (const auto& [key, m] : chi.segment_masses())
            mass_length += m * distance(key.first, key.second);
        CHECK(pattern_cost(chi, spec) >= mass_length - 1e-12);
    }
}

TEST_CASE("reparameterise_constant_speed drops duplicate vertices, keeps cost") {
    IrrigationPattern chi(2, {{{{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}, 1.0}});
    // Construction already canonicalises; the duplicated vertex is gone.
    CHECK(chi.fibres()[0].polyline.size() == 3);
    IrrigationPattern rep = reparameterise_constant_speed(chi);
    CHECK(rep.fibres()[0].polyline == chi.fibres()[0].polyline);
    for (const CostSpec& spec : {CostSpec::branched(0.5), CostSpec::urban(0.5, 2.0)})
        CHECK(std::abs(pattern_cost(rep, spec) - pattern_cost(chi, spec)) <= 1e-12);
}

TEST_CASE("pattern cost is invariant under reparameterisation and subdivision") {
    std::mt19937_64 rng(101);
    CostSpec urban = CostSpec::urban(0.5, 2.0);
    CostSpec branched = CostSpec::branched(0.6);
    for (int trial = 0; trial < 50; ++trial) {
        IrrigationPattern chi = testutil::random_pattern(rng);
        IrrigationPattern rep = reparameterise_constant_speed(chi);
        CHECK(std::abs(pattern_cost(rep, urban) - pattern_cost(chi, urban)) <= 1e-12);
        CHECK(std::abs(pattern_cost(rep, branched) - pattern_cost(chi, branched)) <= 1e-12);

        // Idempotence.
        IrrigationPattern rep2 = reparameterise_constant_speed(rep);
        CHECK(std::abs(pattern_cost(rep2, urban) - pattern_cost(rep, urban)) <= 1e-12);

        // Subdivision keeps the image, hence the cost (up to float noise).
        IrrigationPattern sub = subdivide(chi, rng);
        CHECK(pattern_cost(sub, urban) ==
              doctest::Approx(pattern_cost(chi, urban)).epsilon(1e-10));
        CHECK(pattern_cost(sub, branched) ==
              doctest::Approx(pattern_cost(chi, branched)).epsilon(1e-10));
    }
}

TEST_CASE("is_loop_free classifies fibres") {
    IrrigationPattern straight(2, {{{{0.0, 0.0}, {2.0, 0.0}}, 1.0}});
    CHECK(is_loop_free(straight));

    IrrigationPattern closed(2, {{{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}}, 1.0}});
    CHECK_FALSE(is_loop_free(closed));

    // Figure-eight: two segments cross transversally.
    IrrigationPattern eight(2, {{{{0.0, 0.0}, {2.0, 2.0}, {2.0, 0.0}, {0.0, 2.0}}, 1.0}});
    CHECK_FALSE(is_loop_free(eight));

    // Backtracking along the same line revisits points.
    IrrigationPattern backtrack(2, {{{{0.0, 0.0}, {2.0, 0.0}, {1.0, 0.0}}, 1.0}});
    CHECK_FALSE(is_loop_free(backtrack));

    // A corner is fine.
    IrrigationPattern corner(2, {{{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, 1.0}});
    CHECK(is_loop_free(corner));
}

TEST_CASE("check_single_path on shared corridors and the family pattern") {
    // One contiguous shared middle segment.
    IrrigationPattern shared(2, {{{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}, {3.0, 1.0}}, 1.0},
                                 {{{0.0, 1.0}, {1.0, 0.0}, {2.0, 0.0}, {3.0, 2.0}}, 1.0}});
    CHECK(check_single_path(shared));

    // Family pattern with 0 < m < m2: one fibre runs A->B->C->D while
    // another takes the direct A->D segment, so the ordered pair (A, D) is
    // served by two different routes.
    testutil::FamilyInstance fam;
    CHECK_FALSE(check_single_path(family_pattern(fam, 0.05)));
    // The extreme members m=0 and m=m2 do satisfy the property.
    CHECK(check_single_path(family_pattern(fam, 0.0)));
    CHECK(check_single_path(family_pattern(fam, fam.m2)));

    // Disjoint fibres: vacuous truth.
    IrrigationPattern disjoint(2, {{{{0.0, 0.0}, {1.0, 0.0}}, 1.0},
                                   {{{0.0, 5.0}, {1.0, 5.0}}, 1.0}});
    CHECK(check_single_path(disjoint));

    // Looping patterns are rejected.
    IrrigationPattern closed(2, {{{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}}, 1.0}});
    CHECK_THROWS_AS(check_single_path(closed), std::invalid_argument);
}

TEST_CASE("solidarity mass at junction vertices dominates adjacent segments") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 30; ++trial) {
        IrrigationPattern chi = testutil::random_pattern(rng);
        for (const auto& [key, m] : chi.segment_masses()) {
            CHECK(solidarity_mass(chi, key.first) >= m - 1e-12);
            CHECK(solidarity_mass(chi, key.second) >= m - 1e-12);
        }
    }
}

TEST_CASE("canonicalisation splits overlapping segments at shared vertices") {
    // Fibre 2's endpoint lies mid-segment on fibre 1; the arrangement must
    // split fibre 1 there so solidarity is segmentwise constant.
    IrrigationPattern chi(2, {{{{0.0, 0.0}, {4.0, 0.0}}, 1.0},
                              {{{1.0, 0.0}, {3.0, 0.0}}, 2.0}});
    CHECK(chi.fibres()[0].polyline.size() == 4);
    CHECK(solidarity_mass(chi, {0.5, 0.0}) == 1.0);
    CHECK(solidarity_mass(chi, {2.0, 0.0}) == 3.0);
    CHECK(solidarity_mass(chi, {3.5, 0.0}) == 1.0);
    CostSpec spec = CostSpec::urban(0.5, 2.0);
    // Pieces: [0,1] m=1, [1,3] m=3, [3,4] m=1.
    CHECK(pattern_cost(chi, spec) == doctest::Approx(1.5 + 2 * 3.5 + 1.5));
    CHECK_FALSE(chi.has_opposite_overlap());
}

TEST_CASE("opposite-direction overlap is stored but flagged") {
    IrrigationPattern chi(2, {{{{0.0, 0.0}, {2.0, 0.0}}, 1.0},
                              {{{2.0, 0.0}, {0.0, 0.0}}, 1.0}});
    CHECK(chi.has_opposite_overlap());
    // Solidarity adds regardless of direction.
    CHECK(solidarity_mass(chi, {1.0, 0.0}) == 2.0);
    CHECK(pattern_cost(chi, CostSpec::branched(1.0)) == doctest::Approx(4.0));
}
