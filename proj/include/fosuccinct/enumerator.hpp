#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fosuccinct/formula.hpp"
#include "fosuccinct/guards.hpp"
#include "fosuccinct/structures.hpp"

namespace fosuccinct {

// One semantic class found by the brute-force enumeration: the first formula
// of least size realizing its truth vector on the probe family.
struct EnumeratedClass {
    FormulaPtr formula;
    std::size_t size = 0;
};

// Enumerates FO formulas over the signature with variables among the first
// `width` names of x, y, z, in order of syntax-tree size. Two formulas that
// agree on every probe (each A_N for N <= 5 under every assignment of the
// variable pool) are merged, keeping the first smallest one; the result is
// ordered by size and deterministic. Set and letter signatures are rejected.
std::vector<EnumeratedClass> enumerate_formulas(const Signature& sig, int width,
                                                int max_size,
                                                const Guards& guards = {});

// Smallest formula that is true on every interpretation in `a` and false on
// every interpretation in `b`, searched over sizes 1..cap. The probe family
// is extended with the query structures, so the semantic merging never hides
// a distinguisher, and the winner is re-verified against the exact evaluator
// before it is returned. Empty when no formula within cap separates the sets.
std::optional<FormulaPtr> min_distinguishing_formula(
    const Signature& sig, int width, const std::vector<Interpretation>& a,
    const std::vector<Interpretation>& b, int cap, const Guards& guards = {});

// Size of the formula found by min_distinguishing_formula, if any.
std::optional<std::size_t> min_distinguishing_size(
    const Signature& sig, int width, const std::vector<Interpretation>& a,
    const std::vector<Interpretation>& b, int cap, const Guards& guards = {});

// Result of sweeping all interpretation pairs with equal depth-d types
// against every enumerated order formula of quantifier depth at most d.
struct TypeCheckReport {
    int d = 0;
    int n_max = 0;
    std::int64_t interpretations = 0; // (A_N, x, y, z) tuples covered
    std::int64_t groups = 0;          // distinct depth-d types among them
    std::int64_t pairs = 0;           // pairs sharing a type
    std::int64_t classes = 0;         // semantic classes enumerated
    int max_size = 0;                 // size bound of the enumeration
    std::vector<std::string> counterexamples; // empty unless something broke

    bool ok() const { return counterexamples.empty(); }
};

// Checks that interpretations over A_0..A_{n_max} with equal depth-d types
// cannot be told apart by any enumerated FO(<) formula of quantifier depth
// <= d and width <= 3. A counterexample would mean the evaluator, the type
// computation, or the enumeration itself is wrong. Supported for d <= 2 and
// n_max <= 6.
TypeCheckReport check_type_indistinguishability(int d, int n_max,
                                                const Guards& guards = {});

} // namespace fosuccinct
