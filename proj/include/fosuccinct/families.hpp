#pragma once

#include <cstdint>

#include "fosuccinct/formula.hpp"
#include "fosuccinct/guards.hpp"
#include "fosuccinct/structures.hpp"

namespace fosuccinct {

// ---- two-variable counting sentences ---------------------------------------

// FO2(<) sentence true on A_N iff N >= l. Size 3l+2.
FormulaPtr gen_chi_geq(int l);
// FO2(<) sentence true on A_N iff N = l. Size 6l+9.
FormulaPtr gen_chi(int l);

// FO4(<) sentence true on A_N iff N = 2^m. Size 9m+21.
FormulaPtr gen_phi_m(int m);

// ---- rewrites and translators -----------------------------------------------

// Rewrites succ/min/max atoms into pure FO(<) with immediately bound helper
// variables. Input must have variable width <= 3; output is FO3(<).
FormulaPtr eliminate_sugar(const FormulaPtr& f);

// Equivalent FO2(<) sentence for an FO3(<,succ,min,max) sentence. Evaluates
// the input on an initial segment of linear orders (cut at min(4*size^2+1,
// 2^(depth+1)), past which truth is constant) and emits a disjunction of
// chi sentences.
FormulaPtr translate_fo3_to_fo2(const FormulaPtr& f, const Guards& guards = {});
// Same construction for unrestricted FO(<,succ,min,max) sentences, cut at
// 2^(depth+1) unconditionally.
FormulaPtr translate_fo_to_fo2(const FormulaPtr& f, const Guards& guards = {});

// ---- block-numeral strings ---------------------------------------------------

// tower(0)=1, tower(h+1)=2^tower(h); defined for h <= 4.
std::int64_t tower(int h);
// Digits used to encode n: 0 -> 0, 1 -> 1, else floor(log2(n-1))+1.
int bit_length(std::int64_t n);

// The level-h block numeral for n.
LabeledString mu(int h, std::int64_t n, const Guards& guards = {});

struct VhWh {
    LabeledString v;
    LabeledString w;
};
// v_h (tag h+1 wrapper around the H = tower(h) block numerals, each followed
// by a dot) and w_h (2^H copies of v_h). Materialization is limited to h <= 2.
VhWh build_vh_wh(int h, const Guards& guards = {});

// Exact lengths, computed arithmetically without materializing.
std::int64_t mu_length(int h, std::int64_t n); // h <= 4
std::int64_t vh_length(int h);                 // h <= 4
std::int64_t wh_length(int h);                 // h <= 3
std::int64_t ell(int h);                       // |w_h| - 1, h <= 3

// ---- formulas over labeled strings -------------------------------------------

// equal_h(x,y): x,y start level-h blocks encoding the same number.
FormulaPtr gen_equal(int h);
// inc_h(x,y): the number at y is the successor of the number at x.
FormulaPtr gen_inc(int h);
// max_h(x): x starts a block encoding tower(h)-1.
FormulaPtr gen_max(int h);
// Level-j well-formedness: every tag-j block is a valid numeral, reading
// sub-blocks with level j-1 machinery. Building block of gen_vh_plus.
FormulaPtr gen_ok(int j);

// Sentence true on a string iff it is one or more copies of v_h.
FormulaPtr gen_vh_plus(int h);

// Single existential set quantifier over dot positions; true iff the string
// is exactly w_h. The set encodes a binary copy counter: dot k of a copy
// carries bit k, the first copy is all zeroes, consecutive copies increment,
// and the all-ones copy must be the last.
FormulaPtr gen_Phi(int h);

// Letter-set name used by gen_Psi for a letter ("P" + letter name).
std::string psi_set_name(const Letter& l);
// Monadic second-order sentence over bare linear orders: existentially
// quantified letter sets, a partition axiom, and the gen_Phi matrix with
// letter atoms replaced by set membership. True on A_N iff N = ell(h).
FormulaPtr gen_Psi(int h);

} // namespace fosuccinct
