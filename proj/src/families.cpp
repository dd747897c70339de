#include "fosuccinct/families.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "fosuccinct/evaluator.hpp"

namespace fosuccinct {

namespace {

Term v(const std::string& name) { return Term::var(name); }

FormulaPtr iff(FormulaPtr a, FormulaPtr b) {
    return land(imp(a, b), imp(b, a));
}

// ---- chi --------------------------------------------------------------------

// chi'_{>=l}(outer): at least l elements lie strictly below outer, binding x
// and y alternately down the recursion.
FormulaPtr chi_geq_body(int l, const std::string& outer) {
    if (l == 0) return eq(v(outer), v(outer));
    std::string inner = outer == "x" ? "y" : "x";
    return exists(inner, land(lt(v(inner), v(outer)), chi_geq_body(l - 1, inner)));
}

// ---- phi_m ------------------------------------------------------------------

// phi'_m over the pair (x,y) or (z,u); asserts that the two values are
// exactly 2^m apart. Each level binds the complementary pair.
FormulaPtr phi_prime(int m, bool xy_pair) {
    std::string a = xy_pair ? "x" : "z";
    std::string b = xy_pair ? "y" : "u";
    std::string c = xy_pair ? "z" : "x";
    std::string d = xy_pair ? "u" : "y";
    if (m == 0) {
        // adjacent: distinct with nothing strictly between
        return land(lor(lt(v(a), v(b)), lt(v(b), v(a))),
                    lnot(exists(c, lor(land(lt(v(a), v(c)), lt(v(c), v(b))),
                                       land(lt(v(b), v(c)), lt(v(c), v(a)))))));
    }
    // c is 2^(m-1) away from both a and b; since a != b it lies between them
    return land(lnot(eq(v(a), v(b))),
                exists(c, forall(d, imp(lor(eq(v(d), v(a)), eq(v(d), v(b))),
                                        phi_prime(m - 1, !xy_pair)))));
}

// ---- sugar elimination --------------------------------------------------------

const char* const kSugarPool[] = {"x", "y", "z", "u", "v", "w"};

std::string pick_unused(std::initializer_list<Term> terms) {
    for (const char* cand : kSugarPool) {
        bool used = false;
        for (const Term& t : terms)
            if (t.is_var() && t.name == cand) used = true;
        if (!used) return cand;
    }
    throw InternalError("helper variable pool exhausted");
}

FormulaPtr closed_false() {
    return exists("x", lt(v("x"), v("x")));
}

FormulaPtr desugar_less(const Term& t1, const Term& t2) {
    if (t1.kind == Term::Kind::Max || t2.kind == Term::Kind::Min) return closed_false();
    if (t1.kind == Term::Kind::Min && t2.kind == Term::Kind::Max)
        return exists("x", exists("y", lt(v("y"), v("x"))));
    if (t1.kind == Term::Kind::Min) {
        std::string a = pick_unused({t2});
        return exists(a, lt(v(a), t2));
    }
    if (t2.kind == Term::Kind::Max) {
        std::string a = pick_unused({t1});
        return exists(a, lt(t1, v(a)));
    }
    return lt(t1, t2);
}

FormulaPtr desugar_equal(const Term& t1, const Term& t2) {
    if (t1.is_var() && t2.is_var()) return eq(t1, t2);
    if (!t1.is_var() && !t2.is_var()) {
        if (t1.kind == t2.kind) return lnot(closed_false());
        // min = max: no two comparable elements
        return lnot(exists("x", exists("y", lt(v("y"), v("x")))));
    }
    const Term& var_t = t1.is_var() ? t1 : t2;
    Term::Kind const_k = t1.is_var() ? t2.kind : t1.kind;
    std::string a = pick_unused({var_t});
    if (const_k == Term::Kind::Min) return lnot(exists(a, lt(v(a), var_t)));
    return lnot(exists(a, lt(var_t, v(a))));
}

FormulaPtr desugar_succ(const Term& t1, const Term& t2) {
    std::string a = pick_unused({t1, t2});
    return land(desugar_less(t1, t2),
                lnot(exists(a, land(desugar_less(t1, Term::var(a)),
                                    desugar_less(Term::var(a), t2)))));
}

FormulaPtr desugar(const FormulaPtr& f) {
    switch (f->kind) {
    case FormulaKind::Less: return desugar_less(f->lhs, f->rhs);
    case FormulaKind::Equal: return desugar_equal(f->lhs, f->rhs);
    case FormulaKind::Succ: return desugar_succ(f->lhs, f->rhs);
    case FormulaKind::Not: return lnot(desugar(f->left));
    case FormulaKind::And: return land(desugar(f->left), desugar(f->right));
    case FormulaKind::Or: return lor(desugar(f->left), desugar(f->right));
    case FormulaKind::Imp: return imp(desugar(f->left), desugar(f->right));
    case FormulaKind::Exists: return exists(f->bound_var, desugar(f->left));
    case FormulaKind::Forall: return forall(f->bound_var, desugar(f->left));
    default: throw InternalError("unexpected node kind after signature validation");
    }
}

// ---- translators ---------------------------------------------------------------

// truth[l] holds the value on A_l for l = 0..cut, constant from cut onwards.
FormulaPtr chi_disjunction(const std::vector<bool>& truth, std::int64_t cut) {
    std::int64_t least = cut;
    while (least > 0 && truth[least - 1] == truth[cut]) --least;
    std::vector<FormulaPtr> parts;
    for (std::int64_t l = 0; l < least; ++l)
        if (truth[l]) parts.push_back(gen_chi(static_cast<int>(l)));
    if (truth[least]) parts.push_back(gen_chi_geq(static_cast<int>(least)));
    if (parts.empty()) return lnot(exists("x", eq(v("x"), v("x"))));
    return disj(parts);
}

FormulaPtr translate_by_probing(const FormulaPtr& f, std::int64_t cut,
                                const Guards& guards) {
    if (cut > guards.stabilization_cap)
        throw GuardError("translation would probe " + std::to_string(cut + 1) +
                         " linear orders; the stabilization guard is " +
                         std::to_string(guards.stabilization_cap));
    std::vector<bool> truth(static_cast<std::size_t>(cut) + 1);
    for (std::int64_t n = 0; n <= cut; ++n)
        truth[n] = eval_fo(f, Structure(LinearOrder{static_cast<int>(n)}), {}, guards);
    return chi_disjunction(truth, cut);
}

std::int64_t depth_cut(const FormulaPtr& f) {
    std::int64_t d = static_cast<std::int64_t>(quantifier_depth(f));
    if (d + 1 >= 62) return std::int64_t(1) << 62; // large enough to trip the guard
    return std::int64_t(1) << (d + 1);
}

void check_translator_input(const FormulaPtr& f) {
    if (!f) throw UsageError("null formula");
    validate_against(f, Signature::order_full());
    if (!is_sentence(f)) throw UsageError("translation requires a sentence");
}

// ---- strings over the block-numeral alphabets ----------------------------------

void append_mu(std::vector<Letter>& out, int h, std::int64_t n) {
    out.push_back(Letter::open(h));
    int len = bit_length(n);
    for (int i = 0; i < len; ++i) {
        if (h > 1) append_mu(out, h - 1, i);
        out.push_back(((n - 1) >> i) & 1 ? Letter::one() : Letter::zero());
    }
    out.push_back(Letter::close(h));
}

// ---- formulas over labeled strings ----------------------------------------------
//
// All builders below work relative to an atom factory so the same
// constructions serve gen_vh_plus/gen_Phi (letter atoms) and gen_Psi
// (set-membership atoms over existentially quantified letter sets).

using AtomFactory = std::function<FormulaPtr(const Letter&, const std::string&)>;

struct TauCtx {
    AtomFactory atom;
    FormulaPtr operator()(const Letter& l, const std::string& var) const {
        return atom(l, var);
    }
};

TauCtx letter_atoms() {
    return TauCtx{[](const Letter& l, const std::string& var) {
        return letter(l.name(), v(var));
    }};
}

TauCtx set_atoms() {
    return TauCtx{[](const Letter& l, const std::string& var) {
        return in_set(v(var), psi_set_name(l));
    }};
}

// Bound-variable pool. Every name sorts below the free variables x and y, so
// tables built during evaluation keep the pinned variables on the outer axes.
const char* const kBoundPool[] = {"u", "v", "w", "c", "e", "g", "r", "s", "p", "q"};

std::string fresh(std::initializer_list<std::string> used) {
    for (const char* cand : kBoundPool)
        if (std::find(used.begin(), used.end(), cand) == used.end()) return cand;
    throw InternalError("bound-variable pool exhausted");
}

// The sub-block binder pair; alternates with the caller's pair down the
// equal recursion.
std::pair<std::string, std::string> sub_pair(const std::string& a, const std::string& b) {
    if (a == "p" || b == "p" || a == "q" || b == "q") return {"r", "s"};
    return {"p", "q"};
}

// b is the position directly after a
FormulaPtr adj(const std::string& a, const std::string& b) {
    std::string g = fresh({a, b});
    return land(lt(v(a), v(b)),
                lnot(exists(g, land(lt(v(a), v(g)), lt(v(g), v(b))))));
}

// the position directly after a carries l
FormulaPtr next_letter(const TauCtx& t, const std::string& a, const Letter& l) {
    std::string c = fresh({a});
    return exists(c, land(adj(a, c), t(l, c)));
}

// no position strictly between a and b carries l
FormulaPtr no_letter_between(const TauCtx& t, const std::string& a,
                             const std::string& b, const Letter& l) {
    std::string w = fresh({a, b});
    return lnot(exists(w, conj({lt(v(a), v(w)), lt(v(w), v(b)), t(l, w)})));
}

// the level-j block opened at a is empty
FormulaPtr empty_block(const TauCtx& t, int j, const std::string& a) {
    return next_letter(t, a, Letter::close(j));
}

// p opens a sub-block of the level-j block opened at a
FormulaPtr sub_start(const TauCtx& t, int j, const std::string& a, const std::string& p) {
    return conj({lt(v(a), v(p)), t(Letter::open(j - 1), p),
                 no_letter_between(t, a, p, Letter::close(j))});
}

// no later sub-block start before the enclosing level-j block closes
FormulaPtr last_sub(const TauCtx& t, int j, const std::string& p) {
    std::string u = fresh({p});
    return lnot(exists(u, conj({lt(v(p), v(u)), t(Letter::open(j - 1), u),
                                no_letter_between(t, p, u, Letter::close(j))})));
}

// the bit directly after the sub-block opened at p (first level-(j-1) close
// after p, then its successor)
FormulaPtr bit_after(const TauCtx& t, int j, const std::string& p, bool one) {
    Letter close_sub = Letter::close(j - 1);
    std::string u = fresh({p});
    std::string c = fresh({p, u});
    return exists(u, conj({lt(v(p), v(u)), t(close_sub, u),
                           no_letter_between(t, p, u, close_sub),
                           exists(c, land(adj(u, c),
                                          t(one ? Letter::one() : Letter::zero(), c)))}));
}

// the bits directly after the sub-blocks opened at p and q agree
FormulaPtr bits_agree(const TauCtx& t, int j, const std::string& p, const std::string& q) {
    Letter close_sub = Letter::close(j - 1);
    std::string g = fresh({p, q});
    std::string w = fresh({p, q, g});
    std::string c = fresh({p, q, g, w});
    std::string e = fresh({p, q, g, w, c});
    return forall(g, imp(conj({lt(v(p), v(g)), t(close_sub, g),
                               no_letter_between(t, p, g, close_sub)}),
           forall(w, imp(conj({lt(v(q), v(w)), t(close_sub, w),
                               no_letter_between(t, q, w, close_sub)}),
           forall(c, imp(adj(g, c),
           forall(e, imp(adj(w, e),
                         iff(t(Letter::one(), c), t(Letter::one(), e))))))))));
}

FormulaPtr equal_rec(const TauCtx& t, int j, const std::string& a, const std::string& b);

// every sub-block of the block at `pos` strictly before (after) the pivot
// carries the stated bit
FormulaPtr run_before(const TauCtx& t, int j, const std::string& pos, bool one) {
    std::string u = fresh({pos});
    return forall(u, imp(conj({lt(v(u), v(pos)), t(Letter::open(j - 1), u),
                               no_letter_between(t, u, pos, Letter::open(j))}),
                         bit_after(t, j, u, one)));
}

// index-matched sub-blocks after the pivots p and q carry equal bits
FormulaPtr high_bits_agree(const TauCtx& t, int j, const std::string& p, const std::string& q) {
    Letter open_sub = Letter::open(j - 1);
    Letter close_j = Letter::close(j);
    std::string u = fresh({p, q});
    std::string w = fresh({p, q, u});
    return forall(u, imp(conj({lt(v(p), v(u)), t(open_sub, u),
                               no_letter_between(t, p, u, close_j)}),
           forall(w, imp(conj({lt(v(q), v(w)), t(open_sub, w),
                               no_letter_between(t, q, w, close_j)}),
                         imp(equal_rec(t, j - 1, u, w), bits_agree(t, j, u, w))))));
}

// the blocks at a and b encode the same number
FormulaPtr equal_rec(const TauCtx& t, int j, const std::string& a, const std::string& b) {
    if (j == 1) {
        std::string c = fresh({a, b});
        std::string e = fresh({a, b, c});
        FormulaPtr bits = forall(c, imp(adj(a, c),
                          forall(e, imp(adj(b, e),
                                        iff(t(Letter::one(), c), t(Letter::one(), e))))));
        return land(iff(empty_block(t, 1, a), empty_block(t, 1, b)), bits);
    }
    auto [p, q] = sub_pair(a, b);
    FormulaPtr matched = imp(equal_rec(t, j - 1, p, q),
                             land(bits_agree(t, j, p, q),
                                  iff(last_sub(t, j, p), last_sub(t, j, q))));
    FormulaPtr subs = forall(p, imp(sub_start(t, j, a, p),
                      forall(q, imp(sub_start(t, j, b, q), matched))));
    return land(iff(empty_block(t, j, a), empty_block(t, j, b)), subs);
}

// the block at b encodes the successor of the number at a
FormulaPtr inc_rec(const TauCtx& t, int j, const std::string& a, const std::string& b) {
    if (j == 1) {
        // only 0 -> 1 occurs at level 1
        std::string c = fresh({a, b});
        std::string e = fresh({a, b, c});
        return land(empty_block(t, 1, a),
                    exists(c, conj({adj(b, c), t(Letter::zero(), c),
                                    exists(e, land(adj(c, e), t(Letter::close(1), e)))})));
    }
    auto [p, q] = sub_pair(a, b);

    // 0 -> 1: a is empty and b is a single sub-block carrying bit 0
    FormulaPtr from_zero =
        land(empty_block(t, j, a),
             exists(p, conj({adj(b, p), t(Letter::open(j - 1), p), last_sub(t, j, p),
                             bit_after(t, j, p, false)})));

    // same bit count: the lowest 0 of a flips to 1, everything below resets,
    // everything above agrees; the final sub-blocks must be index-matched so
    // the two blocks have the same number of digits
    FormulaPtr pivot =
        exists(p, conj({sub_start(t, j, a, p), bit_after(t, j, p, false), run_before(t, j, p, true),
               exists(q, conj({sub_start(t, j, b, q), bit_after(t, j, q, true),
                               run_before(t, j, q, false), equal_rec(t, j - 1, p, q),
                               high_bits_agree(t, j, p, q)}))}));
    FormulaPtr last_match =
        exists(p, conj({sub_start(t, j, a, p), last_sub(t, j, p),
               exists(q, conj({sub_start(t, j, b, q), last_sub(t, j, q),
                               equal_rec(t, j - 1, p, q)}))}));
    FormulaPtr same_length = land(last_match, pivot);

    // all ones overflows into a block one digit longer, of the form 0...01
    std::string u = fresh({a, b, p, q});
    FormulaPtr a_all_ones =
        forall(u, imp(sub_start(t, j, a, u), bit_after(t, j, u, true)));
    FormulaPtr b_low_zeros =
        forall(u, imp(land(sub_start(t, j, b, u), lnot(last_sub(t, j, u))),
                      bit_after(t, j, u, false)));
    FormulaPtr b_top_one =
        forall(u, imp(land(sub_start(t, j, b, u), last_sub(t, j, u)),
                      bit_after(t, j, u, true)));
    std::string w = fresh({q, u});
    FormulaPtr second_last =
        land(lnot(last_sub(t, j, q)),
             forall(w, imp(conj({lt(v(q), v(w)), t(Letter::open(j - 1), w),
                                 no_letter_between(t, q, w, Letter::close(j))}),
                           last_sub(t, j, w))));
    FormulaPtr grow_link =
        exists(p, conj({sub_start(t, j, a, p), last_sub(t, j, p),
               exists(q, conj({sub_start(t, j, b, q), second_last,
                               equal_rec(t, j - 1, p, q)}))}));
    FormulaPtr grow = conj({lnot(empty_block(t, j, a)), a_all_ones, b_low_zeros,
                            b_top_one, grow_link});

    return disj({from_zero, same_length, grow});
}

// the block at a encodes tower(j)-1, whose digits are 0 followed by all ones
FormulaPtr max_rec(const TauCtx& t, int j, const std::string& a) {
    if (j == 1) {
        std::string c = fresh({a});
        std::string e = fresh({a, c});
        return exists(c, conj({adj(a, c), t(Letter::zero(), c),
                               exists(e, land(adj(c, e), t(Letter::close(1), e)))}));
    }
    Letter open_sub = Letter::open(j - 1);
    std::string p = fresh({a});
    std::string u = fresh({a, p});
    FormulaPtr first_zero =
        exists(p, conj({adj(a, p), t(open_sub, p), bit_after(t, j, p, false)}));
    FormulaPtr later_ones =
        forall(u, imp(conj({lt(v(a), v(u)), t(open_sub, u),
                            no_letter_between(t, a, u, Letter::close(j)),
                            lnot(adj(a, u))}),
                      bit_after(t, j, u, true)));
    FormulaPtr top_max = forall(u, imp(land(sub_start(t, j, a, u), last_sub(t, j, u)),
                                       max_rec(t, j - 1, u)));
    return conj({first_zero, later_ones, top_max});
}

// level-j well-formedness, assuming levels below j are already checked
FormulaPtr ok_level(const TauCtx& t, int j) {
    if (j == 1) {
        Letter t1 = Letter::open(1), e1 = Letter::close(1);
        FormulaPtr fwd = forall("u", imp(t(t1, "u"),
            exists("v", land(adj("u", "v"),
                lor(t(e1, "v"),
                    land(t(Letter::zero(), "v"), next_letter(t, "v", e1)))))));
        FormulaPtr bwd = forall("u", imp(t(e1, "u"),
            exists("v", land(adj("v", "u"),
                lor(t(t1, "v"),
                    land(t(Letter::zero(), "v"),
                         exists("w", land(adj("w", "v"), t(t1, "w")))))))));
        return land(fwd, bwd);
    }
    Letter open_j = Letter::open(j), close_j = Letter::close(j);
    Letter open_sub = Letter::open(j - 1), close_sub = Letter::close(j - 1);

    FormulaPtr only_at_ends =
        lnot(exists("u", conj({lt(v("p"), v("u")), lt(v("u"), v("q")),
                               lor(t(open_j, "u"), t(close_j, "u"))})));
    // every sub-block close inside the block is followed by a bit and then a
    // further sub-block or the block close
    FormulaPtr close_then_bit =
        forall("u", imp(conj({lt(v("p"), v("u")), lt(v("u"), v("q")), t(close_sub, "u")}),
            exists("v", conj({adj("u", "v"),
                              lor(t(Letter::zero(), "v"), t(Letter::one(), "v")),
                              exists("w", land(adj("v", "w"),
                                               lor(t(open_sub, "w"), t(close_j, "w"))))}))));
    // the block is empty or its first sub-block is the empty numeral
    FormulaPtr starts_at_zero =
        lor(empty_block(t, j, "p"),
            exists("u", conj({adj("p", "u"), t(open_sub, "u"), next_letter(t, "u", close_sub)})));
    // consecutive sub-blocks encode consecutive numbers
    FormulaPtr chain =
        forall("u", imp(conj({lt(v("p"), v("u")), lt(v("u"), v("q")), t(open_sub, "u")}),
            forall("v", imp(conj({lt(v("u"), v("v")), lt(v("v"), v("q")), t(open_sub, "v"),
                                  no_letter_between(t, "u", "v", open_sub)}),
                            inc_rec(t, j - 1, "u", "v")))));
    // if the last sub-block index is maximal, some digit must be 0, which
    // caps the encoded number below tower(j)
    FormulaPtr capped =
        forall("u", imp(conj({lt(v("p"), v("u")), lt(v("u"), v("q")), t(open_sub, "u"),
                              no_letter_between(t, "u", "q", open_sub),
                              max_rec(t, j - 1, "u")}),
            exists("v", conj({lt(v("p"), v("v")), lt(v("v"), v("q")), t(Letter::zero(), "v"),
                              exists("w", land(adj("w", "v"), t(close_sub, "w")))}))));

    FormulaPtr fwd = forall("p", imp(t(open_j, "p"),
        exists("q", conj({lt(v("p"), v("q")), t(close_j, "q"), only_at_ends,
                          close_then_bit, starts_at_zero, chain, capped}))));
    FormulaPtr bwd = forall("q", imp(t(close_j, "q"),
        exists("p", conj({lt(v("p"), v("q")), t(open_j, "p"), only_at_ends}))));
    return land(fwd, bwd);
}

// sentence matrix for membership in (v_h)+
FormulaPtr vh_plus_matrix(const TauCtx& t, int h) {
    Letter block_open = Letter::open(h), block_close = Letter::close(h);
    Letter copy_open = Letter::open(h + 1), copy_close = Letter::close(h + 1);

    std::vector<FormulaPtr> parts;
    for (int j = 1; j <= h; ++j) parts.push_back(ok_level(t, j));

    // global layout: the word starts with a copy open, ends with a copy
    // close, copy opens follow exactly the copy closes, and dots sit exactly
    // after the block closes
    parts.push_back(forall("u", imp(lnot(exists("v", lt(v("v"), v("u")))), t(copy_open, "u"))));
    parts.push_back(forall("u", imp(lnot(exists("v", lt(v("u"), v("v")))), t(copy_close, "u"))));
    parts.push_back(forall("u", imp(exists("v", lt(v("v"), v("u"))),
        iff(t(copy_open, "u"), exists("v", land(adj("v", "u"), t(copy_close, "v")))))));
    parts.push_back(forall("u", iff(t(Letter::dot(), "u"),
        exists("v", land(adj("v", "u"), t(block_close, "v"))))));

    // each copy is v_h: starts with the empty numeral, blocks count up to
    // the maximal numeral, and the copy closes right after the last dot
    FormulaPtr only_at_ends =
        lnot(exists("u", conj({lt(v("p"), v("u")), lt(v("u"), v("q")),
                               lor(t(copy_open, "u"), t(copy_close, "u"))})));
    FormulaPtr prefix =
        exists("u", conj({adj("p", "u"), t(block_open, "u"), next_letter(t, "u", block_close)}));
    FormulaPtr suffix =
        exists("u", conj({adj("u", "q"), t(Letter::dot(), "u"),
                          exists("v", land(adj("v", "u"), t(block_close, "v")))}));
    FormulaPtr chain =
        forall("u", imp(conj({lt(v("p"), v("u")), lt(v("u"), v("q")), t(block_open, "u")}),
            forall("v", imp(conj({lt(v("u"), v("v")), lt(v("v"), v("q")), t(block_open, "v"),
                                  no_letter_between(t, "u", "v", block_open)}),
                            inc_rec(t, h, "u", "v")))));
    FormulaPtr top =
        forall("u", imp(conj({lt(v("p"), v("u")), lt(v("u"), v("q")), t(block_open, "u"),
                              no_letter_between(t, "u", "q", block_open)}),
                        max_rec(t, h, "u")));
    parts.push_back(forall("p", imp(t(copy_open, "p"),
        exists("q", conj({lt(v("p"), v("q")), t(copy_close, "q"), only_at_ends,
                          prefix, suffix, chain, top})))));
    parts.push_back(forall("q", imp(t(copy_close, "q"),
        exists("p", conj({lt(v("p"), v("q")), t(copy_open, "p"), only_at_ends})))));
    return conj(parts);
}

// conjuncts of the gen_Phi matrix; the set variable X is free here
std::vector<FormulaPtr> phi_parts(const TauCtx& t, int h) {
    Letter copy_open = Letter::open(h + 1), copy_close = Letter::close(h + 1);
    Letter block_open = Letter::open(h);
    Letter dot = Letter::dot();
    auto in_x = [](const std::string& var) { return in_set(v(var), "X"); };

    // all earlier dots of the same copy are set
    auto carry = [&](const std::string& u) {
        std::string c = fresh({u});
        return forall(c, imp(conj({lt(v(c), v(u)), t(dot, c),
                                   no_letter_between(t, c, u, copy_close)}),
                             in_x(c)));
    };

    std::vector<FormulaPtr> parts;
    parts.push_back(vh_plus_matrix(t, h));
    // X marks dot positions only
    parts.push_back(forall("u", imp(in_x("u"), t(dot, "u"))));
    // the first copy encodes zero
    parts.push_back(forall("u", imp(land(t(dot, "u"),
        lnot(exists("v", conj({lt(v("v"), v("u")), t(copy_close, "v")})))),
        lnot(in_x("u")))));
    // the last copy encodes all ones
    parts.push_back(forall("u", imp(land(t(dot, "u"),
        lnot(exists("v", conj({lt(v("u"), v("v")), t(copy_open, "v")})))),
        in_x("u"))));
    // an all-ones copy has no next copy
    FormulaPtr last_dot =
        lnot(exists("v", conj({lt(v("u"), v("v")), t(dot, "v"),
                               no_letter_between(t, "u", "v", copy_close)})));
    parts.push_back(forall("u", imp(conj({t(dot, "u"), in_x("u"), last_dot, carry("u")}),
        lnot(exists("v", conj({lt(v("u"), v("v")), t(copy_open, "v")}))))));
    // index-matched dots of consecutive copies follow binary increment:
    // the bit flips exactly when all lower bits of the earlier copy are set
    FormulaPtr next_copy = [&] {
        std::string w = fresh({"u", "v"});
        std::string c = fresh({"u", "v", w});
        return exists(w, conj({lt(v("u"), v(w)), lt(v(w), v("v")), t(copy_close, w),
                               lnot(exists(c, conj({lt(v("u"), v(c)), lt(v(c), v(w)),
                                                    t(copy_close, c)}))),
                               lnot(exists(c, conj({lt(v(w), v(c)), lt(v(c), v("v")),
                                                    t(copy_close, c)})))}));
    }();
    FormulaPtr block_match =
        forall("r", imp(conj({lt(v("r"), v("u")), t(block_open, "r"),
                              no_letter_between(t, "r", "u", block_open)}),
            forall("s", imp(conj({lt(v("s"), v("v")), t(block_open, "s"),
                                  no_letter_between(t, "s", "v", block_open)}),
                            equal_rec(t, h, "r", "s")))));
    FormulaPtr inc_bit = iff(in_x("v"), lnot(iff(in_x("u"), carry("u"))));
    parts.push_back(forall("u", imp(t(dot, "u"),
        forall("v", imp(land(t(dot, "v"), next_copy),
                        imp(block_match, inc_bit))))));
    return parts;
}

} // namespace

// ---- chi / phi / translators ---------------------------------------------------

FormulaPtr gen_chi_geq(int l) {
    if (l < 0) throw UsageError("chi index must be nonnegative");
    return exists("x", chi_geq_body(l, "x"));
}

FormulaPtr gen_chi(int l) {
    if (l < 0) throw UsageError("chi index must be nonnegative");
    return land(gen_chi_geq(l), lnot(gen_chi_geq(l + 1)));
}

FormulaPtr gen_phi_m(int m) {
    if (m < 0) throw UsageError("phi index must be nonnegative");
    FormulaPtr ends = lnot(exists("z", lor(lt(v("z"), v("x")), lt(v("y"), v("z")))));
    return exists("x", exists("y", land(phi_prime(m, true), ends)));
}

FormulaPtr eliminate_sugar(const FormulaPtr& f) {
    if (!f) throw UsageError("null formula");
    validate_against(f, Signature::order_full());
    if (variable_width(f) > 3)
        throw UsageError("eliminate_sugar requires variable width at most 3");
    FormulaPtr out = desugar(f);
    if (variable_width(out) > 3)
        throw UsageError("rewriting exceeded the three-variable budget");
    return out;
}

FormulaPtr translate_fo3_to_fo2(const FormulaPtr& f, const Guards& guards) {
    check_translator_input(f);
    if (variable_width(f) > 3)
        throw UsageError("translate_fo3_to_fo2 requires variable width at most 3 "
                         "(use translate_fo_to_fo2)");
    // a sentence of size m cannot separate two linear orders above 4m^2, and
    // never separates past 2^(depth+1) either; probe up to the smaller cut
    std::int64_t m = static_cast<std::int64_t>(size(f));
    std::int64_t cut = std::min(4 * m * m + 1, depth_cut(f));
    return translate_by_probing(f, cut, guards);
}

FormulaPtr translate_fo_to_fo2(const FormulaPtr& f, const Guards& guards) {
    check_translator_input(f);
    return translate_by_probing(f, depth_cut(f), guards);
}

// ---- strings ---------------------------------------------------------------------

std::int64_t tower(int h) {
    if (h < 0) throw UsageError("tower is undefined for negative levels");
    if (h > 4) throw UsageError("tower(" + std::to_string(h) + ") exceeds the 64-bit range");
    std::int64_t t = 1;
    for (int i = 0; i < h; ++i) t = std::int64_t(1) << t;
    return t;
}

int bit_length(std::int64_t n) {
    if (n < 0) throw UsageError("bit_length is undefined for negative numbers");
    if (n <= 1) return static_cast<int>(n);
    return 64 - std::countl_zero(static_cast<std::uint64_t>(n - 1));
}

std::int64_t mu_length(int h, std::int64_t n) {
    if (h < 1) throw UsageError("numeral level must be at least 1");
    if (h > 4) throw UsageError("numeral lengths are supported for levels 1..4");
    if (n < 0) throw UsageError("numeral argument must be nonnegative");
    if (h == 1) return 2 + bit_length(n);
    std::int64_t total = 2;
    for (int i = 0; i < bit_length(n); ++i) total += mu_length(h - 1, i) + 1;
    return total;
}

std::int64_t vh_length(int h) {
    std::int64_t total = 2;
    for (std::int64_t i = 0; i < tower(h); ++i) total += mu_length(h, i) + 1;
    return total;
}

std::int64_t wh_length(int h) {
    if (h < 1) throw UsageError("numeral level must be at least 1");
    if (h > 3) throw UsageError("wh_length(" + std::to_string(h) + ") exceeds the 64-bit range");
    return (std::int64_t(1) << tower(h)) * vh_length(h);
}

std::int64_t ell(int h) { return wh_length(h) - 1; }

LabeledString mu(int h, std::int64_t n, const Guards& guards) {
    std::int64_t len = mu_length(h, n);
    if (len > static_cast<std::int64_t>(guards.string_letters))
        throw GuardError("numeral has " + std::to_string(len) +
                         " letters; the string guard is " +
                         std::to_string(guards.string_letters));
    LabeledString s;
    s.h = h;
    s.word.reserve(static_cast<std::size_t>(len));
    append_mu(s.word, h, n);
    return s;
}

VhWh build_vh_wh(int h, const Guards& guards) {
    if (h < 1) throw UsageError("string level must be at least 1");
    if (h > 2)
        throw GuardError("string materialization is limited to levels 1 and 2; "
                         "|w_3| is " + std::to_string(wh_length(3)) + " letters");
    std::int64_t wlen = wh_length(h);
    if (wlen > static_cast<std::int64_t>(guards.string_letters))
        throw GuardError("w_" + std::to_string(h) + " has " + std::to_string(wlen) +
                         " letters; the string guard is " +
                         std::to_string(guards.string_letters));
    VhWh r;
    r.v.h = h;
    r.w.h = h;
    std::int64_t blocks = tower(h);
    r.v.word.push_back(Letter::open(h + 1));
    for (std::int64_t i = 0; i < blocks; ++i) {
        append_mu(r.v.word, h, i);
        r.v.word.push_back(Letter::dot());
    }
    r.v.word.push_back(Letter::close(h + 1));
    std::int64_t copies = std::int64_t(1) << blocks;
    r.w.word.reserve(r.v.word.size() * static_cast<std::size_t>(copies));
    for (std::int64_t i = 0; i < copies; ++i)
        r.w.word.insert(r.w.word.end(), r.v.word.begin(), r.v.word.end());
    return r;
}

// ---- formulas over labeled strings ------------------------------------------------

FormulaPtr gen_equal(int h) {
    if (h < 1) throw UsageError("level must be at least 1");
    return equal_rec(letter_atoms(), h, "x", "y");
}

FormulaPtr gen_inc(int h) {
    if (h < 1) throw UsageError("level must be at least 1");
    return inc_rec(letter_atoms(), h, "x", "y");
}

FormulaPtr gen_max(int h) {
    if (h < 1) throw UsageError("level must be at least 1");
    return max_rec(letter_atoms(), h, "x");
}

FormulaPtr gen_ok(int j) {
    if (j < 1) throw UsageError("level must be at least 1");
    return ok_level(letter_atoms(), j);
}

FormulaPtr gen_vh_plus(int h) {
    if (h < 1) throw UsageError("level must be at least 1");
    return vh_plus_matrix(letter_atoms(), h);
}

FormulaPtr gen_Phi(int h) {
    if (h < 1) throw UsageError("level must be at least 1");
    return exists_set("X", conj(phi_parts(letter_atoms(), h)));
}

std::string psi_set_name(const Letter& l) { return "P" + l.name(); }

FormulaPtr gen_Psi(int h) {
    if (h < 1) throw UsageError("level must be at least 1");
    std::vector<Letter> sigma = alphabet(h);
    std::vector<FormulaPtr> one_of;
    one_of.reserve(sigma.size());
    for (const Letter& l : sigma) one_of.push_back(in_set(v("u"), psi_set_name(l)));
    std::vector<FormulaPtr> clauses;
    clauses.push_back(disj(one_of));
    for (std::size_t i = 0; i < sigma.size(); ++i)
        for (std::size_t k = i + 1; k < sigma.size(); ++k)
            clauses.push_back(lnot(land(in_set(v("u"), psi_set_name(sigma[i])),
                                        in_set(v("u"), psi_set_name(sigma[k])))));
    FormulaPtr xi = forall("u", conj(clauses));
    FormulaPtr body = exists_set("X", land(xi, conj(phi_parts(set_atoms(), h))));
    for (auto it = sigma.rbegin(); it != sigma.rend(); ++it)
        body = exists_set(psi_set_name(*it), body);
    return body;
}

} // namespace fosuccinct
