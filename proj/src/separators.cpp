#include "fosuccinct/separators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "fosuccinct/errors.hpp"

namespace fosuccinct {

namespace {

using Int128 = __int128;

Int128 weight_sq(const Weight& w) {
    return Int128(w.centre) * w.centre + w.border;
}

constexpr long long kMaxEntry = 1'000'000'000;

} // namespace

const std::array<std::pair<Point, Point>, kPairCount>& canonical_pairs() {
    static const std::array<std::pair<Point, Point>, kPairCount> pairs = {{
        {Point::Min, Point::Max},
        {Point::X, Point::Y},
        {Point::X, Point::Z},
        {Point::Y, Point::Z},
        {Point::Min, Point::X},
        {Point::Min, Point::Y},
        {Point::Min, Point::Z},
        {Point::X, Point::Max},
        {Point::Y, Point::Max},
        {Point::Z, Point::Max},
    }};
    return pairs;
}

std::size_t pair_index(Point a, Point b) {
    if (a == b) throw UsageError("pair requires two distinct elements");
    const auto& pairs = canonical_pairs();
    for (std::size_t i = 0; i < kPairCount; ++i)
        if ((pairs[i].first == a && pairs[i].second == b) ||
            (pairs[i].first == b && pairs[i].second == a))
            return i;
    throw InternalError("unreachable: every distinct pair is canonical");
}

std::string pair_name(std::size_t index) {
    if (index >= kPairCount) throw UsageError("pair index out of range");
    const auto& p = canonical_pairs()[index];
    return "{" + point_name(p.first) + "," + point_name(p.second) + "}";
}

PotentialSeparator PotentialSeparator::uniform(long long value) {
    if (value < 0) throw UsageError("separator entries must be nonnegative");
    PotentialSeparator d;
    d.entries.fill(value);
    return d;
}

std::string PotentialSeparator::to_literal() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < kPairCount; ++i) {
        if (i) out << ' ';
        out << pair_name(i) << ':' << entries[i];
    }
    return out.str();
}

PotentialSeparator PotentialSeparator::parse(const std::string& text) {
    PotentialSeparator d;
    std::array<bool, kPairCount> seen{};
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        auto colon = token.rfind(':');
        if (colon == std::string::npos || token.empty() || token[0] != '{')
            throw UsageError("bad separator token '" + token + "', expected {a,b}:n");
        std::string name = token.substr(0, colon);
        std::size_t idx = kPairCount;
        for (std::size_t i = 0; i < kPairCount; ++i)
            if (pair_name(i) == name) { idx = i; break; }
        if (idx == kPairCount) {
            // accept the reversed spelling of each pair too
            for (std::size_t i = 0; i < kPairCount; ++i) {
                const auto& p = canonical_pairs()[i];
                if (name == "{" + point_name(p.second) + "," + point_name(p.first) + "}") {
                    idx = i;
                    break;
                }
            }
        }
        if (idx == kPairCount)
            throw UsageError("unknown pair '" + name + "' in separator literal");
        if (seen[idx])
            throw UsageError("duplicate pair " + name + " in separator literal");
        seen[idx] = true;
        const std::string digits = token.substr(colon + 1);
        if (digits.empty() ||
            digits.find_first_not_of("0123456789") != std::string::npos)
            throw UsageError("bad entry value '" + digits + "' for pair " + name);
        long long value = 0;
        for (char c : digits) {
            value = value * 10 + (c - '0');
            if (value > kMaxEntry)
                throw UsageError("separator entry for " + name + " exceeds " +
                                 std::to_string(kMaxEntry));
        }
        d.entries[idx] = value;
    }
    for (std::size_t i = 0; i < kPairCount; ++i)
        if (!seen[i])
            throw UsageError("separator literal is missing pair " + pair_name(i));
    return d;
}

ThresholdRow separation_thresholds(const Interpretation& I, const Interpretation& J) {
    ThresholdRow row;
    const auto& pairs = canonical_pairs();
    for (std::size_t i = 0; i < kPairCount; ++i) {
        auto [a, b] = pairs[i];
        std::int64_t di = diff(I.value(a), I.value(b));
        std::int64_t dj = diff(J.value(a), J.value(b));
        if (lt_type(I.value(a), I.value(b)) != lt_type(J.value(a), J.value(b)))
            row[i] = 1;
        else if (di != dj)
            row[i] = std::max<std::int64_t>(
                1, std::min(std::llabs(di), std::llabs(dj)));
        else
            row[i] = kNoThreshold;
    }
    return row;
}

bool is_separator(const PotentialSeparator& d,
                  const std::vector<Interpretation>& A,
                  const std::vector<Interpretation>& B) {
    for (const auto& I : A)
        for (const auto& J : B) {
            ThresholdRow row = separation_thresholds(I, J);
            bool fired = false;
            for (std::size_t i = 0; i < kPairCount && !fired; ++i)
                fired = row[i] != kNoThreshold && d.entries[i] >= row[i];
            if (!fired) return false;
        }
    return true;
}

long long border_distance(const PotentialSeparator& d) {
    long long b = d.at(Point::Min, Point::Max);
    const Point vars[] = {Point::X, Point::Y, Point::Z};
    for (Point u : vars)
        for (Point v : vars)
            b = std::max(b, d.at(Point::Min, u) + d.at(v, Point::Max));
    return b;
}

long long centre_distance(const PotentialSeparator& d) {
    const std::size_t inner[] = {pair_index(Point::X, Point::Y),
                                 pair_index(Point::X, Point::Z),
                                 pair_index(Point::Y, Point::Z)};
    long long c = 0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
            c = std::max(c, d.entries[inner[i]] + d.entries[inner[j]]);
    return c;
}

Weight weight(const PotentialSeparator& d) {
    return Weight{centre_distance(d), border_distance(d)};
}

double Weight::value() const {
    return std::sqrt(static_cast<double>(weight_sq(*this)));
}

bool weight_leq_one(const Weight& w) { return weight_sq(w) <= 1; }

// sqrt(A) <= sqrt(B) + sqrt(C) holds iff A <= B + C or (A-B-C)^2 <= 4BC.
bool weight_leq_sum(const Weight& w, const Weight& w1, const Weight& w2) {
    Int128 A = weight_sq(w), B = weight_sq(w1), C = weight_sq(w2);
    if (A <= B + C) return true;
    Int128 gap = A - B - C;
    return gap * gap <= 4 * B * C;
}

// sqrt(A) <= sqrt(B) + 2 holds iff A <= B + 4 or (A-B-4)^2 <= 16B.
bool weight_leq_plus2(const Weight& w, const Weight& w1) {
    Int128 A = weight_sq(w), B = weight_sq(w1);
    if (A <= B + 4) return true;
    Int128 gap = A - B - 4;
    return gap * gap <= 16 * B;
}

PotentialSeparator separator_from_depth(int depth) {
    if (depth < 0) throw UsageError("quantifier depth must be nonnegative");
    if (depth > 29) throw UsageError("separator_from_depth supports depth <= 29");
    return PotentialSeparator::uniform(1LL << (depth + 1));
}

PotentialSeparator cor4_separator(long long m) {
    if (m < 1) throw UsageError("cor4_separator requires m >= 1");
    if (m > kMaxEntry) throw UsageError("cor4_separator entry too large");
    PotentialSeparator d;
    d.at(Point::Min, Point::Max) = m;
    return d;
}

PotentialSeparator combine_boolean(const PotentialSeparator& d1,
                                   const PotentialSeparator& d2) {
    PotentialSeparator d;
    for (std::size_t i = 0; i < kPairCount; ++i)
        d.entries[i] = d1.entries[i] + d2.entries[i];
    return d;
}

PotentialSeparator lift_quantifier(const PotentialSeparator& d1, const std::string& var) {
    Point u;
    if (var == "x") u = Point::X;
    else if (var == "y") u = Point::Y;
    else if (var == "z") u = Point::Z;
    else throw UsageError("lift_quantifier expects variable x, y, or z");

    PotentialSeparator d;
    for (std::size_t i = 0; i < kPairCount; ++i) {
        auto [a, b] = canonical_pairs()[i];
        if (a == u || b == u) {
            d.entries[i] = 0;
            continue;
        }
        long long direct = d1.entries[i];
        long long hop = d1.at(a, u) + d1.at(u, b) + 1;
        d.entries[i] = std::max(direct, hop);
    }
    return d;
}

namespace {

struct MinSepSearch {
    std::vector<ThresholdRow> rows;
    std::array<std::vector<long long>, kPairCount> candidates;
    long long nodesLeft = 0;
    bool haveBest = false;
    std::array<long long, kPairCount> best{};
    Int128 bestW2 = 0;
    std::array<long long, kPairCount> current{};
    std::vector<bool> covered;
    std::size_t coveredCount = 0;

    Int128 currentW2() const {
        PotentialSeparator d;
        d.entries = current;
        return weight_sq(weight(d));
    }

    void record() {
        Int128 w2 = currentW2();
        if (!haveBest || w2 < bestW2 ||
            (w2 == bestW2 && current < best)) {
            haveBest = true;
            best = current;
            bestW2 = w2;
        }
    }

    bool completable(std::size_t idx) const {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (covered[r]) continue;
            bool hope = false;
            for (std::size_t p = idx; p < kPairCount && !hope; ++p)
                hope = rows[r][p] != kNoThreshold;
            if (!hope) return false;
        }
        return true;
    }

    void search(std::size_t idx, const Guards& guards) {
        if (--nodesLeft < 0)
            throw GuardError("minimal separator search exceeded " +
                             std::to_string(guards.minsep_nodes) + " nodes");
        if (coveredCount == rows.size()) {
            // remaining entries stay zero: any increase costs weight
            record();
            return;
        }
        if (idx == kPairCount) return;
        if (!completable(idx)) return;
        for (long long v : candidates[idx]) {
            current[idx] = v;
            if (haveBest && currentW2() >= bestW2) break; // values ascend
            std::vector<std::size_t> newlyCovered;
            if (v > 0) {
                for (std::size_t r = 0; r < rows.size(); ++r)
                    if (!covered[r] && rows[r][idx] != kNoThreshold &&
                        v >= rows[r][idx]) {
                        covered[r] = true;
                        ++coveredCount;
                        newlyCovered.push_back(r);
                    }
            }
            search(idx + 1, guards);
            for (std::size_t r : newlyCovered) covered[r] = false;
            coveredCount -= newlyCovered.size();
        }
        current[idx] = 0;
    }
};

} // namespace

std::optional<PotentialSeparator> minimal_separator(
    const std::vector<Interpretation>& A, const std::vector<Interpretation>& B,
    const Guards& guards) {
    if (A.empty() || B.empty()) return PotentialSeparator{};

    MinSepSearch s;
    if (static_cast<long long>(A.size()) * static_cast<long long>(B.size()) >
        guards.minsep_nodes)
        throw GuardError("minimal separator: too many interpretation pairs");
    for (const auto& I : A)
        for (const auto& J : B) {
            ThresholdRow row = separation_thresholds(I, J);
            bool separable = false;
            for (long long t : row) separable = separable || t != kNoThreshold;
            if (!separable) return std::nullopt;
            s.rows.push_back(row);
        }

    for (std::size_t p = 0; p < kPairCount; ++p) {
        auto& cand = s.candidates[p];
        cand.push_back(0);
        for (const auto& row : s.rows)
            if (row[p] != kNoThreshold) cand.push_back(row[p]);
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    }

    s.nodesLeft = guards.minsep_nodes;
    s.covered.assign(s.rows.size(), false);
    s.search(0, guards);
    if (!s.haveBest)
        throw InternalError("separable rows admit the max-threshold separator");
    PotentialSeparator d;
    d.entries = s.best;
    return d;
}

} // namespace fosuccinct
