#include "doctest.h"

#include <random>

#include "json.hpp"

#include "fosuccinct/errors.hpp"
#include "fosuccinct/est.hpp"
#include "fosuccinct/evaluator.hpp"
#include "oracles.hpp"

using namespace fosuccinct;

namespace {

Interpretation pinned(int n) { return Interpretation::make(n, 0, 0, 0); }

// random triples (formula, satisfier, falsifier) for property checks
struct Triple {
    FormulaPtr f;
    std::vector<Interpretation> A, B;
};

std::vector<Triple> sample_triples(std::mt19937& rng, int count, int maxN) {
    oracles::RandomFormulaSpec spec;
    std::vector<Triple> out;
    while (static_cast<int>(out.size()) < count) {
        FormulaPtr f = oracles::random_formula(rng, spec);
        Triple t;
        t.f = f;
        for (int round = 0; round < 60; ++round) {
            int n = static_cast<int>(rng() % static_cast<unsigned>(maxN + 1));
            auto pick = [&] {
                return static_cast<int>(rng() % static_cast<unsigned>(n + 1));
            };
            auto I = Interpretation::make(n, pick(), pick(), pick());
            std::map<std::string, int> env{
                {"x", I.xyz[0]}, {"y", I.xyz[1]}, {"z", I.xyz[2]}};
            bool v = oracles::naive_fo(f, Structure(LinearOrder{n}), env);
            auto& side = v ? t.A : t.B;
            if (side.size() < 2) side.push_back(I);
            if (t.A.size() == 2 && t.B.size() == 2) break;
        }
        if (!t.A.empty() && !t.B.empty()) out.push_back(std::move(t));
    }
    return out;
}

} // namespace

TEST_CASE("single-atom tree keeps its labels") {
    auto f = parse("(succ min max)");
    auto t = build_est(f, {pinned(1)}, {pinned(2)});
    CHECK(node_count(t) == 1);
    CHECK(t.root.children.empty());
    CHECK(t.root.A == std::vector<Interpretation>{pinned(1)});
    CHECK(t.root.B == std::vector<Interpretation>{pinned(2)});
    verify_est(t);
}

TEST_CASE("existential node picks the least witness and expands the other side") {
    auto f = parse("(exists x (< min x))");
    auto t = build_est(f, {pinned(1)}, {pinned(0)});
    CHECK(node_count(t) == 2);
    REQUIRE(t.root.children.size() == 1);
    const auto& child = t.root.children[0];
    CHECK(child.A == std::vector<Interpretation>{Interpretation::make(1, 1, 0, 0)});
    CHECK(child.B == std::vector<Interpretation>{Interpretation::make(0, 0, 0, 0)});
    verify_est(t);
}

TEST_CASE("universal node mirrors the existential rule") {
    auto t = build_est(parse("(not (forall x (< x max)))"), {pinned(2)}, {});
    REQUIRE(t.root.children.size() == 1);
    const auto& fa = t.root.children[0];
    CHECK(fa.formula->kind == FormulaKind::Forall);
    // negation swapped sides: the forall node must be falsified by A_2
    CHECK(fa.A.empty());
    REQUIRE(fa.B.size() == 1);
    REQUIRE(fa.children.size() == 1);
    // least counterexample is x = 2
    CHECK(fa.children[0].B ==
          std::vector<Interpretation>{Interpretation::make(2, 2, 0, 0)});
    CHECK(fa.children[0].A.empty());
    verify_est(t);
}

TEST_CASE("build rejects mislabeled interpretations") {
    auto f = parse("(succ min max)");
    CHECK_THROWS_AS(build_est(f, {pinned(2)}, {pinned(3)}), UsageError);
    CHECK_THROWS_AS(build_est(f, {pinned(1)}, {pinned(1)}), UsageError);
    CHECK_THROWS_AS(build_est(parse("(exists u (< min u))"), {pinned(1)}, {}),
                    UsageError);
    CHECK_THROWS_AS(build_est(parse("(letter 0 x)"), {pinned(1)}, {}), UsageError);
}

TEST_CASE("node budget guard trips on large quantifier expansions") {
    Guards tight;
    tight.est_node_interps = 5;
    auto f = parse("(exists x (and (succ min x) (succ x max)))");
    CHECK_THROWS_AS(build_est(f, {pinned(2)}, {pinned(30)}, tight), GuardError);
}

TEST_CASE("node count equals formula size on random triples") {
    std::mt19937 rng(6021);
    for (auto& t : sample_triples(rng, 200, 4)) {
        auto tree = build_est(t.f, t.A, t.B);
        CHECK_MESSAGE(node_count(tree) == size(t.f), print(t.f));
    }
}

TEST_CASE("every built label satisfies or falsifies its subformula") {
    std::mt19937 rng(98);
    for (auto& t : sample_triples(rng, 60, 4)) {
        auto tree = build_est(t.f, t.A, t.B);
        verify_est(tree);
    }
}

TEST_CASE("weight inequalities hold at every node") {
    auto leaf = build_est(parse("(succ min max)"), {pinned(1)}, {pinned(2)});
    auto leafReport = check_keyprop(leaf);
    REQUIRE(leafReport.checks.size() == 1);
    CHECK(leafReport.checks[0].clause == 'a');
    CHECK(leafReport.checks[0].pass);
    CHECK(leafReport.all_pass());
    CHECK(leafReport.checks[0].w.squared() == 1);

    auto ex = build_est(parse("(exists x (< min x))"), {pinned(1)}, {pinned(0)});
    auto exReport = check_keyprop(ex);
    REQUIRE(exReport.checks.size() == 2);
    CHECK(exReport.checks[0].clause == 'c');
    CHECK(exReport.checks[0].pass);
    CHECK(exReport.checks[1].clause == 'a');
    CHECK(exReport.all_pass());

    std::mt19937 rng(4242);
    for (auto& t : sample_triples(rng, 60, 4)) {
        auto tree = build_est(t.f, t.A, t.B);
        auto report = check_keyprop(tree);
        CHECK_MESSAGE(report.all_pass(), print(t.f));
        CHECK(report.skipped == 0);
        CHECK(report.checks.size() == node_count(tree));
    }
}

TEST_CASE("keyprop reports guard-skipped nodes instead of failing") {
    Guards tight;
    tight.minsep_nodes = 2;
    auto tree = build_est(parse("(exists x (< min x))"), {pinned(1)}, {pinned(0)});
    auto report = check_keyprop(tree, tight);
    CHECK(report.skipped == report.checks.size());
    CHECK(report.violations == 0);
}

TEST_CASE("tree size clears half the root separator weight") {
    auto t = build_est(parse("(succ min max)"), {pinned(1)}, {pinned(2)});
    auto r = tree_size_bound(t);
    CHECK(r.nodes == 1);
    CHECK(r.root_weight == doctest::Approx(1.0));
    CHECK(r.bound_holds);

    // a sentence separating A_4 from A_5 has root weight 2
    auto f = parse("(exists x (exists y (and (succ x y) (and (forall z (not (< z x))) "
                   "(exists z (and (succ y z) (exists y (and (succ z y) (exists z "
                   "(and (succ y z) (forall y (not (< z y)))))))))))))");
    CHECK(eval_fo(f, Structure(LinearOrder{4})));
    CHECK(!eval_fo(f, Structure(LinearOrder{5})));
    auto t45 = build_est(f, {pinned(4)}, {pinned(5)});
    auto r45 = tree_size_bound(t45);
    CHECK(r45.root_weight == doctest::Approx(2.0));
    CHECK(r45.bound_holds);

    std::mt19937 rng(31);
    for (auto& tr : sample_triples(rng, 60, 4)) {
        auto tree = build_est(tr.f, tr.A, tr.B);
        CHECK(tree_size_bound(tree).bound_holds);
    }
}

TEST_CASE("certificates bound formula size from below") {
    auto f = parse("(succ min max)");
    auto cert = certify_lower_bound(f, {pinned(1)}, {pinned(2)});
    CHECK(cert.formula_size == 1);
    CHECK(cert.separator_weight.squared() == 1);
    CHECK(cert.verdict);

    // the pinned pair A_4 / A_5 needs weight 2, so size must be >= 1
    auto g = parse("(exists x (exists y (and (succ x y) (and (forall z (not (< z x))) "
                   "(exists z (and (succ y z) (exists y (and (succ z y) (exists z "
                   "(and (succ y z) (forall y (not (< z y)))))))))))))");
    auto cg = certify_lower_bound(g, {pinned(4)}, {pinned(5)});
    CHECK(cg.separator_weight.squared() == 4);
    CHECK(cg.verdict);

    // empty falsifier side: all-zero separator, trivial bound
    auto ce = certify_lower_bound(parse("(= min min)"), {pinned(0), pinned(3)}, {});
    CHECK(ce.separator_weight.squared() == 0);
    CHECK(ce.verdict);

    CHECK_THROWS_AS(certify_lower_bound(f, {pinned(3)}, {pinned(2)}), UsageError);
}

TEST_CASE("json dump carries labels and shape") {
    auto t = build_est(parse("(exists x (< min x))"), {pinned(1)}, {pinned(0)});
    auto j = nlohmann::json::parse(est_json(t));
    CHECK(j["sl"] == "exists x");
    CHECK(j["il"]["A"][0] == "A:1 x:0 y:0 z:0");
    CHECK(j["il"]["B"][0] == "A:0 x:0 y:0 z:0");
    REQUIRE(j["children"].size() == 1);
    CHECK(j["children"][0]["sl"] == "(< min x)");
    CHECK(j["children"][0]["il"]["A"][0] == "A:1 x:1 y:0 z:0");
    CHECK(j["children"][0]["children"].empty());
}
