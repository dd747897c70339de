#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fosuccinct/guards.hpp"
#include "fosuccinct/structures.hpp"

namespace fosuccinct {

// The ten two-element subsets of {min,max,x,y,z} in the canonical order used
// for literals, lexicographic tie-breaking, and report columns.
inline constexpr std::size_t kPairCount = 10;
const std::array<std::pair<Point, Point>, kPairCount>& canonical_pairs();

// Canonical index of an unordered pair. Throws UsageError if a == b.
std::size_t pair_index(Point a, Point b);
std::string pair_name(std::size_t index);

// Assigns a gap budget to every pair of special elements. An entry of k means
// the pair can tell two interpretations apart when their element distances
// disagree within distance k (or order differently at any distance).
struct PotentialSeparator {
    std::array<long long, kPairCount> entries{};

    long long at(Point a, Point b) const { return entries[pair_index(a, b)]; }
    long long& at(Point a, Point b) { return entries[pair_index(a, b)]; }

    static PotentialSeparator uniform(long long value);

    // "{min,max}:4 {x,y}:0 ..." with all 10 pairs in canonical order.
    std::string to_literal() const;
    // Accepts the same tokens in any order; every pair exactly once.
    static PotentialSeparator parse(const std::string& text);

    bool operator==(const PotentialSeparator&) const = default;
};

// Least entry value at which a pair tells I from J; kNoThreshold if the pair
// never can (same order type and same distance).
inline constexpr long long kNoThreshold = -1;
using ThresholdRow = std::array<long long, kPairCount>;
ThresholdRow separation_thresholds(const Interpretation& I, const Interpretation& J);

bool is_separator(const PotentialSeparator& d,
                  const std::vector<Interpretation>& A,
                  const std::vector<Interpretation>& B);

// Exact weight representation: the real-valued weight is sqrt(centre^2 +
// border); all comparisons are done on integers so ties are never subject to
// floating-point rounding.
struct Weight {
    long long centre = 0;
    long long border = 0;

    long long squared() const { return centre * centre + border; }
    double value() const;

    bool operator==(const Weight&) const = default;
};

long long border_distance(const PotentialSeparator& d);
long long centre_distance(const PotentialSeparator& d);
Weight weight(const PotentialSeparator& d);

// w <= 1, w <= w1 + w2, and w <= w1 + 2, decided exactly.
bool weight_leq_one(const Weight& w);
bool weight_leq_sum(const Weight& w, const Weight& w1, const Weight& w2);
bool weight_leq_plus2(const Weight& w, const Weight& w1);

// Uniform map with every entry 2^{d+1}; separates any two interpretation sets
// that some sentence of quantifier depth d tells apart.
PotentialSeparator separator_from_depth(int depth);

// m on {min,max}, zero elsewhere; weight sqrt(m). Requires m >= 1.
PotentialSeparator cor4_separator(long long m);

// Pointwise sum; separates a union of satisfier sets when each summand
// separates its own part.
PotentialSeparator combine_boolean(const PotentialSeparator& d1,
                                   const PotentialSeparator& d2);

// Separator for the parent of a quantifier node from the child's separator:
// pairs through the quantified variable collapse to 0 and every other pair
// absorbs the two-hop detour through it, plus one.
PotentialSeparator lift_quantifier(const PotentialSeparator& d1, const std::string& var);

// Exact minimum-weight separator, or nullopt when none exists (some pair of
// interpretations is indistinguishable). Ties are broken lexicographically on
// the canonical entry order. Empty A or B yields the all-zero map.
std::optional<PotentialSeparator> minimal_separator(
    const std::vector<Interpretation>& A, const std::vector<Interpretation>& B,
    const Guards& guards = {});

} // namespace fosuccinct
