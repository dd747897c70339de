#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fosuccinct/formula.hpp"
#include "fosuccinct/guards.hpp"
#include "fosuccinct/structures.hpp"

namespace fosuccinct {

enum class Truth { False, True, Inconclusive };
std::string truth_name(Truth t);

enum class MsoMode { Exhaustive, Restricted, Witness };

struct MsoOptions {
    MsoMode mode = MsoMode::Exhaustive;
    // Restricted: candidate sets range over subsets of this letter's positions.
    std::optional<Letter> restrict_letter;
    // Witness: named sets substituted for the existential set prefix.
    std::map<std::string, std::vector<int>> witness;
};

// First-order evaluation. Free variables are taken from `assign`
// (UsageError if one is missing). Formulas with set quantifiers or
// set-membership atoms are rejected; use eval_mso.
bool eval_fo(const FormulaPtr& f, const Structure& s,
             const std::map<std::string, int>& assign = {},
             const Guards& guards = {});

// MSO evaluation per the selected mode. Witness mode requires every set
// quantifier to be existential and positively occurring; it returns True
// when the substituted matrix holds and Inconclusive when it does not.
Truth eval_mso(const FormulaPtr& f, const Structure& s, const MsoOptions& mso,
               const std::map<std::string, int>& assign = {},
               const Guards& guards = {});

struct StabilizationResult {
    std::int64_t cap = 0;  // 2^(d+1) for quantifier depth d
    std::int64_t least = 0; // least D with truth constant on [D, cap]
    bool tail = false;      // the constant value on that interval
    std::vector<bool> values; // truth on A_0 .. A_cap
};

// Evaluates an FO(<,succ,min,max) sentence on A_0..A_{2^(d+1)}.
StabilizationResult stabilization_threshold(const FormulaPtr& f,
                                            const Guards& guards = {});

} // namespace fosuccinct
