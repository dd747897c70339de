#include "doctest.h"

#include <random>

#include "fosuccinct/errors.hpp"
#include "fosuccinct/evaluator.hpp"
#include "fosuccinct/separators.hpp"
#include "oracles.hpp"

using namespace fosuccinct;

namespace {

Interpretation interp(int n, int x, int y, int z) {
    return Interpretation::make(n, x, y, z);
}

Interpretation pinned(int n) { return interp(n, 0, 0, 0); }

PotentialSeparator randomSeparator(std::mt19937& rng, long long maxEntry) {
    PotentialSeparator d;
    for (auto& e : d.entries)
        e = static_cast<long long>(rng() % static_cast<unsigned>(maxEntry + 1));
    return d;
}

Interpretation randomInterp(std::mt19937& rng, int maxN) {
    int n = static_cast<int>(rng() % static_cast<unsigned>(maxN + 1));
    auto pick = [&] { return static_cast<int>(rng() % static_cast<unsigned>(n + 1)); };
    return interp(n, pick(), pick(), pick());
}

} // namespace

TEST_CASE("canonical pair order drives index, name, and literal") {
    CHECK(canonical_pairs().size() == 10);
    CHECK(pair_name(0) == "{min,max}");
    CHECK(pair_name(1) == "{x,y}");
    CHECK(pair_name(9) == "{z,max}");
    CHECK(pair_index(Point::Min, Point::Max) == 0);
    CHECK(pair_index(Point::Max, Point::Min) == 0);
    CHECK(pair_index(Point::Y, Point::X) == 1);
    CHECK(pair_index(Point::Z, Point::Max) == 9);
    CHECK_THROWS_AS(pair_index(Point::X, Point::X), UsageError);

    PotentialSeparator d;
    d.at(Point::Min, Point::Max) = 4;
    CHECK(d.to_literal() ==
          "{min,max}:4 {x,y}:0 {x,z}:0 {y,z}:0 {min,x}:0 {min,y}:0 {min,z}:0 "
          "{x,max}:0 {y,max}:0 {z,max}:0");
    CHECK(PotentialSeparator::parse(d.to_literal()) == d);
    // order-insensitive parse with reversed pair spelling
    auto e = PotentialSeparator::parse(
        "{y,x}:7 {min,max}:1 {x,z}:0 {y,z}:0 {min,x}:0 {min,y}:2 {min,z}:0 "
        "{x,max}:0 {y,max}:0 {max,z}:3");
    CHECK(e.at(Point::X, Point::Y) == 7);
    CHECK(e.at(Point::Min, Point::Y) == 2);
    CHECK(e.at(Point::Z, Point::Max) == 3);

    CHECK_THROWS_AS(PotentialSeparator::parse("{min,max}:4"), UsageError);
    CHECK_THROWS_AS(PotentialSeparator::parse(d.to_literal() + " {min,max}:1"),
                    UsageError);
    CHECK_THROWS_AS(PotentialSeparator::parse("{min,moo}:4"), UsageError);
    CHECK_THROWS_AS(
        PotentialSeparator::parse(
            "{min,max}:x {x,y}:0 {x,z}:0 {y,z}:0 {min,x}:0 {min,y}:0 {min,z}:0 "
            "{x,max}:0 {y,max}:0 {z,max}:0"),
        UsageError);
}

TEST_CASE("thresholds match order and distance differences") {
    auto I = pinned(2);
    auto J = pinned(3);
    auto row = separation_thresholds(I, J);
    CHECK(row[pair_index(Point::Min, Point::Max)] == 2); // gaps 2 vs 3 differ
    CHECK(row[pair_index(Point::X, Point::Y)] == kNoThreshold);
    CHECK(row[pair_index(Point::Min, Point::X)] == kNoThreshold);
    CHECK(row[pair_index(Point::X, Point::Max)] == 2);

    // order type flips cost exactly 1
    auto K = interp(4, 1, 3, 0);
    auto L = interp(4, 3, 1, 0);
    auto rowKL = separation_thresholds(K, L);
    CHECK(rowKL[pair_index(Point::X, Point::Y)] == 1);

    // same order, different distance: min of the two gaps, at least 1
    auto M = interp(9, 1, 5, 0);
    auto N = interp(9, 1, 8, 0);
    CHECK(separation_thresholds(M, N)[pair_index(Point::X, Point::Y)] == 4);

    // identical interpretations admit nothing
    for (long long t : separation_thresholds(I, I)) CHECK(t == kNoThreshold);
}

TEST_CASE("separator check on the documented examples") {
    auto d2 = cor4_separator(2);
    CHECK(is_separator(d2, {pinned(2)}, {pinned(3)}));
    CHECK(!is_separator(PotentialSeparator{}, {pinned(2)}, {pinned(3)}));
    CHECK(!is_separator(PotentialSeparator{}, {interp(3, 1, 2, 0)},
                        {interp(3, 2, 1, 0)}));
    // vacuous on empty sides
    CHECK(is_separator(PotentialSeparator{}, {}, {pinned(1)}));
    CHECK(is_separator(PotentialSeparator{}, {pinned(1)}, {}));
    // entry below the distance threshold does not fire
    CHECK(!is_separator(cor4_separator(1), {pinned(2)}, {pinned(3)}));
}

TEST_CASE("border, centre, and weight") {
    CHECK(border_distance(PotentialSeparator{}) == 0);
    CHECK(centre_distance(PotentialSeparator{}) == 0);
    CHECK(weight(PotentialSeparator{}).squared() == 0);

    auto d4 = cor4_separator(4);
    CHECK(border_distance(d4) == 4);
    CHECK(centre_distance(d4) == 0);
    CHECK(weight(d4).squared() == 4);
    CHECK(weight(d4).value() == doctest::Approx(2.0));
    CHECK(weight(cor4_separator(1)).value() == doctest::Approx(1.0));

    auto u8 = PotentialSeparator::uniform(8);
    CHECK(border_distance(u8) == 16);
    CHECK(centre_distance(u8) == 16);
    CHECK(weight(u8).squared() == 272);

    // border allows reusing the same variable on both hops
    PotentialSeparator d;
    d.at(Point::Min, Point::X) = 3;
    d.at(Point::X, Point::Max) = 5;
    CHECK(border_distance(d) == 8);

    // centre needs two distinct pairs among x, y, z
    PotentialSeparator c;
    c.at(Point::X, Point::Y) = 6;
    CHECK(centre_distance(c) == 6);
    c.at(Point::Y, Point::Z) = 2;
    CHECK(centre_distance(c) == 8);
}

TEST_CASE("weight comparisons are exact at ties") {
    CHECK(weight_leq_one(Weight{0, 1}));
    CHECK(weight_leq_one(Weight{1, 0}));
    CHECK(!weight_leq_one(Weight{0, 2}));

    // 2 <= 1 + 1 exactly
    CHECK(weight_leq_sum(Weight{0, 4}, Weight{0, 1}, Weight{0, 1}));
    CHECK(!weight_leq_sum(Weight{0, 5}, Weight{0, 1}, Weight{0, 1}));
    // sqrt(8) <= sqrt(2) + sqrt(2) exactly
    CHECK(weight_leq_sum(Weight{0, 8}, Weight{0, 2}, Weight{0, 2}));
    CHECK(!weight_leq_sum(Weight{0, 9}, Weight{0, 2}, Weight{0, 2}));

    // 3 <= 1 + 2 exactly
    CHECK(weight_leq_plus2(Weight{3, 0}, Weight{0, 1}));
    CHECK(!weight_leq_plus2(Weight{0, 10}, Weight{0, 1}));
    CHECK(weight_leq_plus2(Weight{0, 4}, Weight{0, 0}));
    CHECK(!weight_leq_plus2(Weight{0, 5}, Weight{0, 0}));

    // floating point would misjudge these near-tie large values
    CHECK(weight_leq_sum(Weight{1000000, 2000000}, Weight{999999, 0},
                         Weight{0, 1999999 + 2 * 999999 + 1}));
}

TEST_CASE("uniform depth separator and corollary separator") {
    CHECK(separator_from_depth(0) == PotentialSeparator::uniform(2));
    CHECK(separator_from_depth(2) == PotentialSeparator::uniform(8));
    CHECK_THROWS_AS(separator_from_depth(-1), UsageError);
    CHECK_THROWS_AS(separator_from_depth(40), UsageError);

    CHECK(cor4_separator(4).at(Point::Min, Point::Max) == 4);
    CHECK(cor4_separator(4).at(Point::X, Point::Y) == 0);
    CHECK_THROWS_AS(cor4_separator(0), UsageError);
}

TEST_CASE("depth separator covers pairs split by a shallow formula") {
    struct Case {
        const char* text;
        int depth;
    };
    const Case cases[] = {
        {"(< x y)", 0},
        {"(exists z (and (< x z) (< z y)))", 1},
        {"(and (< x y) (exists z (exists u (and (< z u) (< u x)))))", 2},
        {"(exists z (and (succ x z) (forall u (not (< u x)))))", 2},
    };
    std::mt19937 rng(404);
    for (const auto& c : cases) {
        auto f = parse(c.text);
        auto d = separator_from_depth(c.depth);
        int found = 0;
        for (int round = 0; round < 200 && found < 12; ++round) {
            auto I = randomInterp(rng, 6);
            auto J = randomInterp(rng, 6);
            std::map<std::string, int> envI{
                {"x", I.xyz[0]}, {"y", I.xyz[1]}, {"z", I.xyz[2]}};
            std::map<std::string, int> envJ{
                {"x", J.xyz[0]}, {"y", J.xyz[1]}, {"z", J.xyz[2]}};
            bool ti = eval_fo(f, Structure(LinearOrder{I.n}), envI);
            bool tj = eval_fo(f, Structure(LinearOrder{J.n}), envJ);
            if (ti == tj) continue;
            ++found;
            auto A = ti ? I : J;
            auto B = ti ? J : I;
            CHECK_MESSAGE(is_separator(d, {A}, {B}), c.text);
        }
        CHECK(found >= 5);
    }
}

TEST_CASE("pointwise sum combines separators of unions") {
    CHECK(combine_boolean(PotentialSeparator{}, PotentialSeparator{}) ==
          PotentialSeparator{});
    auto d = combine_boolean(cor4_separator(2), cor4_separator(3));
    CHECK(d.at(Point::Min, Point::Max) == 5);

    std::mt19937 rng(99);
    for (int round = 0; round < 300; ++round) {
        auto d1 = randomSeparator(rng, 4);
        auto d2 = randomSeparator(rng, 4);
        auto sum = combine_boolean(d1, d2);
        // subadditive weight
        CHECK(weight_leq_sum(weight(sum), weight(d1), weight(d2)));
        // separation of a union when each part is separately covered
        auto A1 = randomInterp(rng, 5);
        auto A2 = randomInterp(rng, 5);
        auto B = randomInterp(rng, 5);
        if (is_separator(d1, {A1}, {B}) && is_separator(d2, {A2}, {B}))
            CHECK(is_separator(sum, {A1, A2}, {B}));
    }
}

TEST_CASE("quantifier lift zeroes the variable and pays one detour step") {
    auto lifted = lift_quantifier(PotentialSeparator{}, "z");
    CHECK(lifted.at(Point::Min, Point::Max) == 1);
    CHECK(lifted.at(Point::X, Point::Y) == 1);
    CHECK(lifted.at(Point::Min, Point::X) == 1);
    CHECK(lifted.at(Point::Min, Point::Y) == 1);
    CHECK(lifted.at(Point::X, Point::Max) == 1);
    CHECK(lifted.at(Point::Y, Point::Max) == 1);
    CHECK(lifted.at(Point::X, Point::Z) == 0);
    CHECK(lifted.at(Point::Y, Point::Z) == 0);
    CHECK(lifted.at(Point::Min, Point::Z) == 0);
    CHECK(lifted.at(Point::Z, Point::Max) == 0);

    auto fromOnes = lift_quantifier(PotentialSeparator::uniform(1), "z");
    for (std::size_t i = 0; i < kPairCount; ++i) {
        auto [a, b] = canonical_pairs()[i];
        CHECK(fromOnes.entries[i] == ((a == Point::Z || b == Point::Z) ? 0 : 3));
    }

    CHECK_THROWS_AS(lift_quantifier(PotentialSeparator{}, "u"), UsageError);

    std::mt19937 rng(123);
    for (int round = 0; round < 300; ++round) {
        auto d1 = randomSeparator(rng, 9);
        for (const char* v : {"x", "y", "z"}) {
            auto d = lift_quantifier(d1, v);
            CHECK(weight_leq_plus2(weight(d), weight(d1)));
        }
    }
}

TEST_CASE("monotonicity and pairwise decomposition") {
    std::mt19937 rng(777);
    for (int round = 0; round < 200; ++round) {
        auto d = randomSeparator(rng, 3);
        std::vector<Interpretation> A{randomInterp(rng, 5), randomInterp(rng, 5)};
        std::vector<Interpretation> B{randomInterp(rng, 5), randomInterp(rng, 5)};
        bool sep = is_separator(d, A, B);
        // raising entries never destroys separation
        if (sep) {
            auto up = d;
            up.entries[rng() % kPairCount] += 1 + rng() % 3;
            CHECK(is_separator(up, A, B));
        }
        // the set check is exactly the conjunction of singleton checks
        bool all = true;
        for (const auto& I : A)
            for (const auto& J : B)
                all = all && is_separator(d, {I}, {J});
        CHECK(sep == all);
        // oracle agreement
        CHECK(sep == oracles::naive_is_separator(d.entries, A, B));
    }
}

TEST_CASE("minimal separator matches the corollary family") {
    for (int m = 1; m <= 6; ++m)
        for (int n = m + 1; n <= 6; ++n) {
            auto d = minimal_separator({pinned(m)}, {pinned(n)});
            REQUIRE(d.has_value());
            CHECK(is_separator(*d, {pinned(m)}, {pinned(n)}));
            CHECK(weight(*d).squared() == m);
        }
}

TEST_CASE("minimal separator edge cases") {
    // identical interpretations cannot be separated
    CHECK(!minimal_separator({pinned(3)}, {pinned(3)}).has_value());
    auto I = interp(5, 1, 2, 3);
    CHECK(!minimal_separator({I, pinned(5)}, {I}).has_value());
    // empty side: all-zero map, weight 0
    auto d = minimal_separator({}, {pinned(2)});
    REQUIRE(d.has_value());
    CHECK(*d == PotentialSeparator{});
    // order flip costs exactly 1
    auto flip = minimal_separator({interp(4, 1, 3, 0)}, {interp(4, 3, 1, 0)});
    REQUIRE(flip.has_value());
    CHECK(weight(*flip).squared() == 1);
    // node guard trips on a tiny budget
    Guards tight;
    tight.minsep_nodes = 3;
    CHECK_THROWS_AS(minimal_separator({pinned(1)}, {pinned(2)}, tight), GuardError);
}

TEST_CASE("minimal separator agrees with the brute-force oracle") {
    std::mt19937 rng(31415);
    int solved = 0, unsolvable = 0;
    for (int round = 0; round < 120; ++round) {
        std::vector<Interpretation> A, B;
        int na = 1 + static_cast<int>(rng() % 2);
        int nb = 1 + static_cast<int>(rng() % 2);
        for (int i = 0; i < na; ++i) A.push_back(randomInterp(rng, 4));
        for (int i = 0; i < nb; ++i) B.push_back(randomInterp(rng, 4));
        auto expect = oracles::brute_minimal_separator(A, B);
        auto got = minimal_separator(A, B);
        REQUIRE(got.has_value() == expect.has_value());
        if (!got) {
            ++unsolvable;
            continue;
        }
        ++solved;
        CHECK(got->entries == *expect);
        CHECK(weight(*got).squared() == oracles::naive_weight_sq(*expect));
        CHECK(is_separator(*got, A, B));
    }
    CHECK(solved >= 40);
    CHECK(unsolvable >= 5);
}
