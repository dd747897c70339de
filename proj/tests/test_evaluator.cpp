#include "doctest.h"

#include <random>

#include "fosuccinct/errors.hpp"
#include "fosuccinct/evaluator.hpp"
#include "oracles.hpp"

using namespace fosuccinct;

namespace {
Structure A(int n) { return Structure(LinearOrder{n}); }
} // namespace

TEST_CASE("basic sentences on linear orders") {
    auto maxExists = parse("(exists x (forall y (or (= x y) (< y x))))");
    for (int n = 0; n <= 6; ++n) CHECK(eval_fo(maxExists, A(n)));

    auto twoBelow = parse("(exists x (exists u (and (< u x) (exists v (< v u)))))");
    CHECK(!eval_fo(twoBelow, A(0)));
    CHECK(!eval_fo(twoBelow, A(1)));
    CHECK(eval_fo(twoBelow, A(2)));
    CHECK(eval_fo(twoBelow, A(30)));

    CHECK(!eval_fo(parse("(< min max)"), A(0)));
    CHECK(eval_fo(parse("(= min max)"), A(0)));
    CHECK(eval_fo(parse("(succ min max)"), A(1)));
    CHECK(!eval_fo(parse("(succ min max)"), A(2)));
}

TEST_CASE("assignments cover free variables") {
    auto f = parse("(exists u (and (< x u) (< u y)))");
    CHECK(eval_fo(f, A(5), {{"x", 1}, {"y", 3}}));
    CHECK(!eval_fo(f, A(5), {{"x", 1}, {"y", 2}}));
    CHECK_THROWS_AS(eval_fo(f, A(5), {{"x", 1}}), UsageError);
    CHECK_THROWS_AS(eval_fo(f, A(5), {{"x", 1}, {"y", 9}}), UsageError);
    // quantifier shadowing: the outer assignment for u is ignored inside
    CHECK(eval_fo(parse("(exists u (< u x))"), A(3), {{"x", 1}, {"u", 0}}));
}

TEST_CASE("letter atoms require strings") {
    CHECK_THROWS_AS(eval_fo(parse("(letter 0 min)"), A(3)), UsageError);
    Structure s = Structure::parse("T1 0 E1");
    CHECK(eval_fo(parse("(letter T1 min)"), s));
    CHECK(eval_fo(parse("(letter E1 max)"), s));
    CHECK(!eval_fo(parse("(exists p (letter 1 p))"), s));
    // unknown-to-this-alphabet letters are simply false
    CHECK(!eval_fo(parse("(exists p (letter T9 p))"), s));
}

TEST_CASE("eval_fo rejects set formulas") {
    CHECK_THROWS_AS(eval_fo(parse("(existsSet X (in min X))"), A(2)), UsageError);
    CHECK_THROWS_AS(eval_fo(parse("(in min X)"), A(2)), UsageError);
}

TEST_CASE("differential check against the naive evaluator") {
    std::mt19937 rng(20240817);
    oracles::RandomFormulaSpec spec;
    int checked = 0;
    for (int round = 0; round < 220; ++round) {
        FormulaPtr f = oracles::random_formula(rng, spec);
        int n = static_cast<int>(rng() % 6);
        std::map<std::string, int> env;
        for (const auto& v : spec.vars)
            env[v] = static_cast<int>(rng() % (static_cast<unsigned>(n) + 1));
        bool expect = oracles::naive_fo(f, A(n), env);
        CHECK_MESSAGE(eval_fo(f, A(n), env) == expect, print(f), " on A_", n);
        ++checked;
    }
    CHECK(checked == 220);
}

TEST_CASE("differential check on labeled strings") {
    std::mt19937 rng(907);
    oracles::RandomFormulaSpec spec;
    spec.letter_h = 1;
    auto sigma = alphabet(1);
    for (int round = 0; round < 160; ++round) {
        FormulaPtr f = oracles::random_formula(rng, spec);
        int len = 1 + static_cast<int>(rng() % 6);
        std::vector<Letter> w;
        for (int i = 0; i < len; ++i)
            w.push_back(sigma[rng() % sigma.size()]);
        Structure s{LabeledString{1, w}};
        std::map<std::string, int> env;
        for (const auto& v : spec.vars)
            env[v] = static_cast<int>(rng() % static_cast<unsigned>(len));
        bool expect = oracles::naive_fo(f, s, env);
        CHECK_MESSAGE(eval_fo(f, s, env) == expect, print(f), " on ", s.to_literal());
    }
}

TEST_CASE("streamed quantifier zones match materialized results") {
    // bodies with four unpinned variables exceed the table cap once the
    // universe is large; values must agree with small-universe semantics
    auto f = parse(
        "(exists x (exists y (exists z (and (< x y) (forall u (imp (or (= u x) "
        "(= u y)) (not (= u z))))))))");
    CHECK(!eval_fo(f, A(1)));
    for (int n : {2, 3, 110, 130}) CHECK(eval_fo(f, A(n)));
    auto g = parse(
        "(exists x (exists y (exists z (and (< y z) (forall u (imp (or (< u x) "
        "(< x u)) (not (= u z))))))))");
    CHECK(!eval_fo(g, A(0)));
    for (int n : {1, 5, 110, 130}) CHECK(eval_fo(g, A(n)));
}

TEST_CASE("exhaustive MSO agrees with the naive oracle") {
    std::mt19937 rng(5150);
    oracles::RandomFormulaSpec spec;
    spec.allow_sets = true;
    spec.max_depth = 2;
    MsoOptions ex;
    for (int round = 0; round < 120; ++round) {
        FormulaPtr f = oracles::random_formula(rng, spec);
        int n = static_cast<int>(rng() % 4);
        std::map<std::string, int> env;
        for (const auto& v : spec.vars)
            env[v] = static_cast<int>(rng() % (static_cast<unsigned>(n) + 1));
        if (!free_set_variables(f).empty()) continue; // oracle needs closed sets
        bool expect = oracles::naive_mso(f, A(n), env);
        Truth got = eval_mso(f, A(n), ex, env);
        CHECK_MESSAGE(got == (expect ? Truth::True : Truth::False), print(f),
                      " on A_", n);
    }
}

TEST_CASE("restricted mode confines candidate sets to a letter") {
    Structure s = Structure::parse("0 1 0 1 0");
    MsoOptions rs;
    rs.mode = MsoMode::Restricted;
    rs.restrict_letter = Letter::zero();
    // a set of three zero positions exists
    auto f = parse(
        "(existsSet X (and (in min X) (and (in max X) (exists p (and (in p X) "
        "(and (not (= p min)) (not (= p max))))))))");
    CHECK(eval_mso(f, s, rs) == Truth::True);
    // no candidate contains a one position
    auto g = parse("(existsSet X (exists p (and (in p X) (letter 1 p))))");
    CHECK(eval_mso(g, s, rs) == Truth::False);
    // restricted and exhaustive agree when the formula confines X itself
    MsoOptions ex;
    auto h = parse(
        "(existsSet X (and (forall p (imp (in p X) (letter 0 p))) (exists p "
        "(and (in p X) (not (= p min))))))");
    CHECK(eval_mso(h, s, rs) == eval_mso(h, s, ex));
}

TEST_CASE("witness mode proves or stays inconclusive") {
    auto parity = parse(
        "(existsSet X (and (in min X) (and (in max X) (forall p (forall q "
        "(imp (succ p q) (not (or (and (in p X) (in q X)) (and (not (in p X)) "
        "(not (in q X)))))))))))");
    MsoOptions good;
    good.mode = MsoMode::Witness;
    good.witness["X"] = {0, 2, 4};
    CHECK(eval_mso(parity, A(4), good) == Truth::True);
    MsoOptions bad;
    bad.mode = MsoMode::Witness;
    bad.witness["X"] = {0, 1, 4};
    CHECK(eval_mso(parity, A(4), bad) == Truth::Inconclusive);
    MsoOptions missing;
    missing.mode = MsoMode::Witness;
    CHECK_THROWS_AS(eval_mso(parity, A(4), missing), UsageError);
    // universal set quantifiers are out of scope for witness mode
    MsoOptions wit;
    wit.mode = MsoMode::Witness;
    wit.witness["X"] = {0};
    CHECK_THROWS_AS(eval_mso(parse("(forallSet X (in min X))"), A(2), wit),
                    UsageError);
    CHECK_THROWS_AS(
        eval_mso(parse("(not (existsSet X (in min X)))"), A(2), wit),
        UsageError);
    // pure first-order formulas still get definite answers
    CHECK(eval_mso(parse("(< min max)"), A(2), wit) == Truth::True);
    CHECK(eval_mso(parse("(< max min)"), A(2), wit) == Truth::False);
}

TEST_CASE("guards reject oversized work") {
    Guards tight;
    tight.mso_set_domain = 4;
    CHECK_THROWS_AS(
        eval_mso(parse("(existsSet X (in min X))"), A(7), MsoOptions{}, {}, tight),
        GuardError);
    Guards tiny;
    tiny.eval_table_bytes = 16;
    CHECK_THROWS_AS(
        eval_fo(parse("(exists x (exists y (< x y)))"), A(100), {}, tiny),
        GuardError);
    Guards fewCandidates;
    fewCandidates.mso_candidates = 4;
    CHECK_THROWS_AS(eval_mso(parse("(existsSet X (in min X))"), A(7),
                             MsoOptions{}, {}, fewCandidates),
                    GuardError);
}

TEST_CASE("stabilization scans up to the depth threshold") {
    auto atLeast2 = parse("(exists x (exists u (< u x)))");
    auto r = stabilization_threshold(atLeast2);
    CHECK(r.cap == 8);
    CHECK(r.least == 1);
    CHECK(r.tail == true);
    REQUIRE(r.values.size() == 9);
    CHECK(r.values[0] == false);
    CHECK(r.values[1] == true);

    auto exactly1 = parse("(and (exists x (exists u (< u x))) (not (exists x "
                          "(exists u (and (< u x) (exists v (< v u)))))))");
    auto r2 = stabilization_threshold(exactly1);
    CHECK(r2.cap == 16);
    CHECK(r2.tail == false);
    CHECK(r2.least == 2);
    CHECK(r2.values[1] == true);

    CHECK_THROWS_AS(stabilization_threshold(parse("(< x y)")), UsageError);
    Guards g;
    g.stabilization_cap = 4;
    CHECK_THROWS_AS(stabilization_threshold(atLeast2, g), GuardError);
}

TEST_CASE("truth at the cap is constant beyond it") {
    // depth-d sentences cannot tell large orders apart; spot-check a few
    const char* sentences[] = {
        "(exists x (forall y (or (= x y) (< y x))))",
        "(forall x (exists y (or (< x y) (= x max))))",
        "(exists x (and (not (= x min)) (not (= x max))))",
    };
    for (const char* text : sentences) {
        auto f = parse(text);
        auto r = stabilization_threshold(f);
        for (int extra = 1; extra <= 8; ++extra)
            CHECK(eval_fo(f, A(static_cast<int>(r.cap) + extra)) == r.tail);
    }
}
