#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fosuccinct/formula.hpp"
#include "fosuccinct/guards.hpp"
#include "fosuccinct/separators.hpp"
#include "fosuccinct/structures.hpp"

namespace fosuccinct {

// One node of an extended syntax tree: the subformula rooted here plus the
// interpretations that must satisfy it (A) and falsify it (B).
struct EstNode {
    FormulaPtr formula;
    std::vector<Interpretation> A;
    std::vector<Interpretation> B;
    std::vector<EstNode> children;
};

struct ExtSyntaxTree {
    EstNode root;
};

// Builds the tree by structural recursion. Disjunctions route each satisfier
// to the first disjunct it satisfies, conjunctions dually on falsifiers, and
// implications route through the antecedent. Quantifiers extend one side with
// the least witness (or counterexample) and the other side with every
// element. The input formula must use only variables x, y, z over the order
// vocabulary, every member of A must satisfy it, and every member of B must
// falsify it.
ExtSyntaxTree build_est(const FormulaPtr& f, const std::vector<Interpretation>& A,
                        const std::vector<Interpretation>& B,
                        const Guards& guards = {});

std::size_t node_count(const ExtSyntaxTree& t);

// Re-evaluates every node label; throws InternalError on any mismatch.
void verify_est(const ExtSyntaxTree& t, const Guards& guards = {});

// Per-node inequality between a node's minimal-separator weight and its
// children's: leaves stay at weight <= 1, two-child nodes at w <= w1 + w2,
// one-child nodes at w <= w1 + 2.
struct KeypropNodeCheck {
    std::size_t index = 0; // preorder position
    char clause = 'a';     // 'a' leaf, 'b' two children, 'c' one child
    bool skipped = false;  // separator search hit a guard here or below
    bool pass = false;
    Weight w{};
    Weight w1{};
    Weight w2{};
    std::string note;
};

struct KeypropReport {
    std::vector<KeypropNodeCheck> checks;
    std::size_t violations = 0;
    std::size_t skipped = 0;
    bool all_pass() const { return violations == 0; }
};

KeypropReport check_keyprop(const ExtSyntaxTree& t, const Guards& guards = {});

// Node count against half the root's minimal-separator weight.
struct TreeSizeBound {
    std::size_t nodes = 0;
    double root_weight = 0.0;
    bool bound_holds = false;
};

TreeSizeBound tree_size_bound(const ExtSyntaxTree& t, const Guards& guards = {});

// Size lower bound witnessed by a minimal separator: any formula satisfied by
// all of A and falsified by all of B has size at least half the separator
// weight, so the given formula's size must clear that bar.
struct Certificate {
    std::size_t formula_size = 0;
    PotentialSeparator separator;
    Weight separator_weight{};
    bool verdict = false;
};

Certificate certify_lower_bound(const FormulaPtr& f,
                                const std::vector<Interpretation>& A,
                                const std::vector<Interpretation>& B,
                                const Guards& guards = {});

// JSON rendering of the tree (nodes with sl, il, children) for CLI dumps.
std::string est_json(const ExtSyntaxTree& t);

} // namespace fosuccinct
