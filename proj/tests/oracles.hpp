#pragma once

// Independent reference implementations used only by the test suite.
// Everything here is written directly from the definitions, with no code
// shared with the library, so the two sides can check each other.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fosuccinct/formula.hpp"
#include "fosuccinct/structures.hpp"

namespace fosuccinct::oracles {

// ---- naive evaluation ----------------------------------------------------

bool naive_fo(const FormulaPtr& f, const Structure& s,
              std::map<std::string, int> env = {});

// Set quantifiers range over all subsets of the universe. Only usable on
// tiny structures.
bool naive_mso(const FormulaPtr& f, const Structure& s,
               std::map<std::string, int> env = {},
               std::map<std::string, std::vector<bool>> sets = {});

// ---- separators ------------------------------------------------------------

// Canonical pair order used throughout:
//   {min,max} {x,y} {x,z} {y,z} {min,x} {min,y} {min,z} {x,max} {y,max} {z,max}
extern const std::array<std::pair<Point, Point>, 10> kCanonicalPairs;

using Entries = std::array<long long, 10>;

// infinity sentinel for thresholds
constexpr long long kInf = -1;

long long naive_threshold(const Interpretation& I, const Interpretation& J,
                          int pairIdx);
bool naive_is_separator(const Entries& e, const std::vector<Interpretation>& A,
                        const std::vector<Interpretation>& B);
long long naive_border(const Entries& e);
long long naive_centre(const Entries& e);
// weight squared = centre^2 + border, exact
long long naive_weight_sq(const Entries& e);

// Exhaustive product search over per-pair threshold sets; empty optional when
// no separator exists. Throws std::runtime_error if the product exceeds cap.
std::optional<Entries> brute_minimal_separator(
    const std::vector<Interpretation>& A, const std::vector<Interpretation>& B,
    std::uint64_t cap = 4'000'000);

// ---- block-numeral strings --------------------------------------------------

std::int64_t tower(int h);
int bit_length(std::int64_t n); // digits used to encode n (0 -> 0, 1 -> 1)
std::vector<Letter> mu_string(int h, std::int64_t n);
std::vector<Letter> vh_string(int h);
std::vector<Letter> wh_string(int h);
// true iff w is one or more copies of vh_string(h)
bool is_vh_power(const std::vector<Letter>& w, int h);
// dot positions encoding the copy counter of w_h (bit j of copy c set ->
// the dot after block j of copy c is in the set)
std::vector<int> wh_counter_positions(int h);

// ---- random formulas ---------------------------------------------------------

struct RandomFormulaSpec {
    int max_depth = 3;          // quantifier nesting
    int letter_h = -1;          // >= 1: include letter atoms for that alphabet
    bool allow_sets = false;    // include set quantifiers and membership
    std::vector<std::string> vars = {"x", "y", "z"};
};

FormulaPtr random_formula(std::mt19937& rng, const RandomFormulaSpec& spec);

} // namespace fosuccinct::oracles
