#include "doctest.h"

#include "fosuccinct/errors.hpp"
#include "fosuccinct/formula.hpp"

using namespace fosuccinct;

TEST_CASE("builders validate terms and names") {
    CHECK_NOTHROW(lt(Term::var("x"), Term::var("y")));
    CHECK_NOTHROW(eq(Term::min(), Term::max()));
    CHECK_NOTHROW(letter("T3", Term::var("p")));
    CHECK_NOTHROW(in_set(Term::var("p"), "X"));
    CHECK_THROWS_AS(exists("X", lt(Term::var("x"), Term::var("y"))), UsageError);
    CHECK_THROWS_AS(exists("min", lt(Term::var("x"), Term::var("y"))), UsageError);
    CHECK_THROWS_AS(exists_set("x", lt(Term::var("x"), Term::var("y"))), UsageError);
    CHECK_THROWS_AS(in_set(Term::var("p"), "bad"), UsageError);
    CHECK_THROWS_AS(conj({}), UsageError);
}

TEST_CASE("size counts every syntax node, with -> as one node") {
    auto x = Term::var("x");
    auto y = Term::var("y");
    CHECK(size(lt(x, y)) == 1);
    CHECK(size(lnot(lt(x, y))) == 2);
    CHECK(size(land(lt(x, y), eq(x, y))) == 3);
    CHECK(size(imp(lt(x, y), eq(x, y))) == 3);
    CHECK(size(exists("x", forall("y", lt(x, y)))) == 3);
    // shared subtrees still count per occurrence
    auto a = lt(x, y);
    CHECK(size(land(a, a)) == 3);
}

TEST_CASE("width and depth metrics") {
    auto x = Term::var("x");
    auto y = Term::var("y");
    auto u = Term::var("u");
    auto f = exists("x", forall("y", exists("u", land(lt(u, x), lt(u, y)))));
    CHECK(variable_width(f) == 3);
    CHECK(quantifier_depth(f) == 3);
    CHECK(set_quantifier_depth(f) == 0);
    auto g = exists_set("X", exists("x", in_set(x, "X")));
    CHECK(set_quantifier_depth(g) == 1);
    CHECK(quantifier_depth(g) == 1);
    // reused variable names count once
    auto h = exists("x", land(lt(x, y), exists("x", lt(x, x))));
    CHECK(variable_width(h) == 2);
}

TEST_CASE("free variables and sentences") {
    auto x = Term::var("x");
    auto y = Term::var("y");
    auto f = exists("x", lt(x, y));
    CHECK(free_variables(f) == std::set<std::string>{"y"});
    CHECK(!is_sentence(f));
    CHECK(is_sentence(exists("y", f)));
    CHECK(free_set_variables(in_set(x, "X")) == std::set<std::string>{"X"});
    CHECK(free_set_variables(exists_set("X", in_set(x, "X"))).empty());
    CHECK(uses_sets(in_set(x, "X")));
    CHECK(!uses_sets(lt(x, y)));
    CHECK(uses_letters(letter("0", x)));
}

TEST_CASE("print produces the s-expression grammar") {
    auto f = exists("x", land(lt(Term::min(), Term::var("x")),
                              imp(succ(Term::var("x"), Term::max()),
                                  lnot(eq(Term::var("x"), Term::var("x"))))));
    CHECK(print(f) ==
          "(exists x (and (< min x) (imp (succ x max) (not (= x x)))))");
    CHECK(print(exists_set("X", in_set(Term::var("p"), "X"))) ==
          "(existsSet X (in p X))");
    CHECK(print(letter("T2", Term::var("p"))) == "(letter T2 p)");
}

TEST_CASE("parse round-trips through print") {
    const char* samples[] = {
        "(< x y)",
        "(= min max)",
        "(succ x max)",
        "(letter dot p)",
        "(in p X)",
        "(not (< x y))",
        "(and (< x y) (or (= x y) (imp (< y x) (< x x))))",
        "(exists x (forall y (< x y)))",
        "(existsSet X (forallSet Y (imp (in p X) (in p Y))))",
    };
    for (const char* s : samples) {
        auto f = parse(s);
        CHECK(print(f) == s);
        CHECK(structurally_equal(f, parse(print(f))));
    }
}

TEST_CASE("parse reports offsets for malformed input") {
    CHECK_THROWS_AS(parse("(< x"), ParseError);
    CHECK_THROWS_AS(parse("(< x y) junk"), ParseError);
    CHECK_THROWS_AS(parse("(frob x y)"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("(exists min (< x y))"), ParseError);
    try {
        parse("(< x");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
}

TEST_CASE("structurally_equal distinguishes shapes") {
    CHECK(structurally_equal(parse("(< x y)"), parse("(< x y)")));
    CHECK(!structurally_equal(parse("(< x y)"), parse("(< y x)")));
    CHECK(!structurally_equal(parse("(and (< x y) (< x y))"), parse("(< x y)")));
    CHECK(!structurally_equal(parse("(exists x (< x y))"),
                              parse("(exists z (< z y))")));
}

TEST_CASE("signatures validate atom usage") {
    Signature order = Signature::order();
    Signature full = Signature::order_full();
    Signature strings = Signature::strings(2);
    CHECK_NOTHROW(validate_against(parse("(< x y)"), order));
    CHECK_THROWS_AS(validate_against(parse("(succ x y)"), order), UsageError);
    CHECK_THROWS_AS(validate_against(parse("(< min x)"), order), UsageError);
    CHECK_NOTHROW(validate_against(parse("(succ min max)"), full));
    CHECK_THROWS_AS(validate_against(parse("(letter 0 x)"), full), UsageError);
    CHECK_NOTHROW(validate_against(parse("(letter T3 x)"), strings));
    CHECK_THROWS_AS(validate_against(parse("(letter T4 x)"), strings), UsageError);
    CHECK_THROWS_AS(validate_against(parse("(succ x y)"), strings), UsageError);
    CHECK_NOTHROW(validate_against(parse("(existsSet X (in x X))"), strings));
    CHECK_THROWS_AS(validate_against(parse("(existsSet X (in x X))"), full),
                    UsageError);
}

TEST_CASE("conj and disj nest to the right") {
    auto a = parse("(< x y)");
    auto b = parse("(= x y)");
    auto c = parse("(< y x)");
    CHECK(print(conj({a, b, c})) == "(and (< x y) (and (= x y) (< y x)))");
    CHECK(print(disj({a, b})) == "(or (< x y) (= x y))");
    CHECK(print(conj({a})) == "(< x y)");
}
