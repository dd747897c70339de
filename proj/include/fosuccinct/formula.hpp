#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "fosuccinct/errors.hpp"

namespace fosuccinct {

// First-order term: a variable (lowercase identifier) or one of the
// constants min, max.
struct Term {
    enum class Kind { Var, Min, Max };
    Kind kind = Kind::Min;
    std::string name; // set iff kind == Var

    static Term var(std::string n) { return Term{Kind::Var, std::move(n)}; }
    static Term min() { return Term{Kind::Min, {}}; }
    static Term max() { return Term{Kind::Max, {}}; }

    bool is_var() const { return kind == Kind::Var; }
    friend bool operator==(const Term&, const Term&) = default;
    friend auto operator<=>(const Term&, const Term&) = default;
};

enum class FormulaKind {
    Less,      // (< t t)
    Equal,     // (= t t)
    Succ,      // (succ t t)
    Letter,    // (letter NAME t)
    In,        // (in t X)
    Not,
    And,
    Or,
    Imp,
    Exists,    // first-order
    Forall,    // first-order
    ExistsSet,
    ForallSet,
};

bool is_atom(FormulaKind k);
bool is_binary_connective(FormulaKind k);
bool is_fo_quantifier(FormulaKind k);
bool is_set_quantifier(FormulaKind k);

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable syntax-tree node. Children are shared; builders may reuse
// subtrees, and all size/depth metrics count tree nodes (shared subtrees
// count once per occurrence).
struct Formula {
    FormulaKind kind;
    Term lhs, rhs;         // Less/Equal/Succ: both; Letter/In: lhs only
    std::string letter;    // Letter atoms
    std::string set_var;   // In, ExistsSet, ForallSet
    std::string bound_var; // Exists, Forall
    FormulaPtr left, right; // unary nodes use left only
};

// Builders. They validate arity and variable-name shape and throw UsageError
// on misuse.
FormulaPtr lt(Term a, Term b);
FormulaPtr eq(Term a, Term b);
FormulaPtr succ(Term a, Term b);
FormulaPtr letter(std::string name, Term t);
FormulaPtr in_set(Term t, std::string set_var);
FormulaPtr lnot(FormulaPtr f);
FormulaPtr land(FormulaPtr a, FormulaPtr b);
FormulaPtr lor(FormulaPtr a, FormulaPtr b);
FormulaPtr imp(FormulaPtr a, FormulaPtr b);
FormulaPtr exists(std::string v, FormulaPtr f);
FormulaPtr forall(std::string v, FormulaPtr f);
FormulaPtr exists_set(std::string v, FormulaPtr f);
FormulaPtr forall_set(std::string v, FormulaPtr f);

// Right-nested conjunction/disjunction of a nonempty list.
FormulaPtr conj(const std::vector<FormulaPtr>& fs);
FormulaPtr disj(const std::vector<FormulaPtr>& fs);

// Syntax-tree node count; atoms count 1 and -> counts as one node.
std::size_t size(const FormulaPtr& f);
// Number of distinct first-order variable names occurring (free or bound).
std::size_t variable_width(const FormulaPtr& f);
// Maximum nesting of first-order quantifiers.
std::size_t quantifier_depth(const FormulaPtr& f);
// Maximum nesting of set quantifiers (reported alongside quantifier_depth).
std::size_t set_quantifier_depth(const FormulaPtr& f);

std::set<std::string> free_variables(const FormulaPtr& f);
std::set<std::string> free_set_variables(const FormulaPtr& f);
bool is_sentence(const FormulaPtr& f);
// True if the formula contains set quantifiers or set-membership atoms.
bool uses_sets(const FormulaPtr& f);
bool uses_letters(const FormulaPtr& f);

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b);

// Atom/feature flags a formula is allowed to use. < and = are always allowed.
struct Signature {
    bool allow_succ = false;
    bool allow_min = false;
    bool allow_max = false;
    int letter_h = -1;  // >= 1: letter atoms over the h alphabet; -1: none
    bool allow_sets = false;

    static Signature order() { return Signature{}; }
    static Signature order_full() { return Signature{true, true, true, -1, false}; }
    // string structures carry < and letter predicates only
    static Signature strings(int h) { return Signature{false, false, false, h, true}; }
};

// Throws UsageError naming the first violation, if any.
void validate_against(const FormulaPtr& f, const Signature& sig);

class ParseError : public UsageError {
public:
    ParseError(const std::string& msg, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Canonical s-expression form; parse(print(f)) is structurally equal to f.
std::string print(const FormulaPtr& f);
FormulaPtr parse(const std::string& text);

} // namespace fosuccinct
