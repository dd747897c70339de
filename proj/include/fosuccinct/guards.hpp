#pragma once

#include <cstddef>
#include <cstdint>

namespace fosuccinct {

// Resource limits for the exhaustive parts of the library. Every limit is an
// explicit field with a default; `scaled(s)` produces a copy with all limits
// multiplied by s (the CLI wires this to FOSUCCINCT_GUARD_SCALE).
struct Guards {
    // evaluator: total bytes of live truth tables during one evaluation
    std::size_t eval_table_bytes = std::size_t(1) << 31;
    // evaluator: positions a single set quantifier may range over when
    // enumerating candidate sets (exhaustive/restricted modes)
    std::size_t mso_set_domain = 24;
    // evaluator: total candidate-set combinations across nested set quantifiers
    double mso_candidates = 4.0e6;
    // evaluator: cap on 2^(d+1) for stabilization_threshold
    std::int64_t stabilization_cap = 4096;
    // separators: nodes explored by the minimal-separator branch-and-bound
    std::int64_t minsep_nodes = 20'000'000;
    // est: interpretations (|A|+|B|) allowed at any single tree node
    std::size_t est_node_interps = 200'000;
    // families: letters in a materialized string (vh/wh/mu)
    std::size_t string_letters = 2'000'000;
    // enumerator: maximum formula size enumerated
    int enum_max_size = 9;
    // enumerator: semantic classes tracked before giving up
    std::size_t enum_max_classes = 4'000'000;

    Guards scaled(double s) const {
        Guards g = *this;
        if (s <= 0) return g;
        g.eval_table_bytes = static_cast<std::size_t>(g.eval_table_bytes * s);
        g.mso_set_domain = static_cast<std::size_t>(g.mso_set_domain * s);
        g.mso_candidates = g.mso_candidates * s;
        g.stabilization_cap = static_cast<std::int64_t>(g.stabilization_cap * s);
        g.minsep_nodes = static_cast<std::int64_t>(g.minsep_nodes * s);
        g.est_node_interps = static_cast<std::size_t>(g.est_node_interps * s);
        g.string_letters = static_cast<std::size_t>(g.string_letters * s);
        g.enum_max_size = static_cast<int>(g.enum_max_size * s);
        g.enum_max_classes = static_cast<std::size_t>(g.enum_max_classes * s);
        return g;
    }
};

} // namespace fosuccinct
