#include "fosuccinct/enumerator.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <map>
#include <unordered_map>
#include <utility>

#include "fosuccinct/errors.hpp"
#include "fosuccinct/evaluator.hpp"

namespace fosuccinct {

namespace {

const char* const kPool[] = {"x", "y", "z"};

// ---- probe family ------------------------------------------------------------

// Truth vectors hold one bit per (structure, assignment) pair, structure by
// structure. Within a structure of universe size m the assignments form a
// base-m grid over the variable pool with the last variable varying fastest,
// so pool variable k has stride m^(width-1-k). Keeping every assignment of a
// structure in the family makes the grid closed under reassigning any one
// variable, which is what the quantifier transform below relies on.
struct ProbeFamily {
    int width = 0;
    std::vector<int> ns;           // largest element of each structure
    std::vector<std::size_t> base; // bit offset of each structure's block
    std::size_t bits = 0;
    std::size_t words = 0;
    std::uint64_t tailMask = ~std::uint64_t(0);
};

ProbeFamily make_probes(int width, const std::vector<int>& ns) {
    ProbeFamily p;
    p.width = width;
    p.ns = ns;
    for (int n : ns) {
        p.base.push_back(p.bits);
        std::size_t block = 1;
        for (int k = 0; k < width; ++k) block *= static_cast<std::size_t>(n) + 1;
        p.bits += block;
    }
    p.words = (p.bits + 63) / 64;
    if (p.bits % 64) p.tailMask = (std::uint64_t(1) << (p.bits % 64)) - 1;
    return p;
}

bool get_bit(const std::uint64_t* v, std::size_t i) {
    return (v[i >> 6] >> (i & 63)) & 1;
}

void set_bit(std::uint64_t* v, std::size_t i) { v[i >> 6] |= std::uint64_t(1) << (i & 63); }

// ---- size-ordered enumeration --------------------------------------------------

// Bottom-up dynamic programming over semantic classes: each class stores the
// first formula of least size realizing its truth vector, and larger
// candidates are assembled from class representatives only. When qdepth_cap
// is set, candidates deeper than the cap are dropped and the class key gains
// the exact quantifier depth, so every vector reachable at depth <= cap by
// any formula within the size budget is reached here too.
class Enumerator {
public:
    struct ClassInfo {
        FormulaPtr formula;
        int size = 0;
        int qdepth = 0;
    };

    using Sink = std::function<bool(std::uint32_t)>;

    Enumerator(const Signature& sig, int width, int max_size, int qdepth_cap,
               ProbeFamily probes, const Guards& guards)
        : width_(width),
          maxSize_(max_size),
          qcap_(qdepth_cap),
          probes_(std::move(probes)),
          guards_(guards) {
        if (width < 0 || width > 3)
            throw UsageError("enumeration supports variable widths 0..3");
        if (sig.allow_sets || sig.letter_h >= 1)
            throw UsageError("enumeration covers plain order signatures only");
        if (max_size < 1) throw UsageError("enumeration size bound must be positive");
        if (max_size > guards.enum_max_size)
            throw GuardError("enumeration up to size " + std::to_string(max_size) +
                             " exceeds the size guard of " +
                             std::to_string(guards.enum_max_size));
        for (int k = 0; k < width; ++k) terms_.push_back(Term::var(kPool[k]));
        if (sig.allow_min) terms_.push_back(Term::min());
        if (sig.allow_max) terms_.push_back(Term::max());
        allowSucc_ = sig.allow_succ;
    }

    void run(const Sink& sink) {
        bySize_.assign(static_cast<std::size_t>(maxSize_) + 1, {});
        scratch_.assign(probes_.words, 0);
        stopped_ = false;

        for (const Term& t1 : terms_) {
            for (const Term& t2 : terms_) {
                atomVec(FormulaKind::Less, t1, t2);
                if (!offer([&] { return lt(t1, t2); }, 1, 0, sink)) return;
                atomVec(FormulaKind::Equal, t1, t2);
                if (!offer([&] { return eq(t1, t2); }, 1, 0, sink)) return;
                if (allowSucc_) {
                    atomVec(FormulaKind::Succ, t1, t2);
                    if (!offer([&] { return succ(t1, t2); }, 1, 0, sink)) return;
                }
            }
        }

        // offer() may grow classes_ and arena_, so fetch fields by id each
        // time instead of holding references across calls
        for (int s = 2; s <= maxSize_; ++s) {
            for (std::uint32_t id : bySize_[static_cast<std::size_t>(s - 1)]) {
                int cqd = classes_[id].qdepth;
                notVec(vec(id));
                if (!offer([this, id] { return lnot(classes_[id].formula); }, s, cqd,
                           sink))
                    return;
                int qd = cqd + 1;
                if (qcap_ >= 0 && qd > qcap_) continue;
                for (int k = 0; k < width_; ++k) {
                    quantVec(vec(id), k, false);
                    if (!offer([this, id, k] { return exists(kPool[k],
                                                             classes_[id].formula); },
                               s, qd, sink))
                        return;
                    quantVec(vec(id), k, true);
                    if (!offer([this, id, k] { return forall(kPool[k],
                                                             classes_[id].formula); },
                               s, qd, sink))
                        return;
                }
            }
            for (int i = 1; i + 1 < s; ++i) {
                int j = s - 1 - i;
                for (std::uint32_t ia : bySize_[static_cast<std::size_t>(i)]) {
                    for (std::uint32_t ib : bySize_[static_cast<std::size_t>(j)]) {
                        int qd = std::max(classes_[ia].qdepth, classes_[ib].qdepth);
                        impVec(vec(ia), vec(ib));
                        if (!offer([this, ia, ib] { return imp(classes_[ia].formula,
                                                               classes_[ib].formula); },
                                   s, qd, sink))
                            return;
                        // and/or are symmetric; visit each unordered pair once
                        if (i > j || (i == j && ia > ib)) continue;
                        andVec(vec(ia), vec(ib));
                        if (!offer([this, ia, ib] { return land(classes_[ia].formula,
                                                                classes_[ib].formula); },
                                   s, qd, sink))
                            return;
                        orVec(vec(ia), vec(ib));
                        if (!offer([this, ia, ib] { return lor(classes_[ia].formula,
                                                               classes_[ib].formula); },
                                   s, qd, sink))
                            return;
                    }
                }
            }
        }
    }

    std::size_t count() const { return classes_.size(); }
    const ClassInfo& info(std::uint32_t id) const { return classes_[id]; }
    const std::uint64_t* vec(std::uint32_t id) const {
        return arena_.data() + static_cast<std::size_t>(id) * probes_.words;
    }

private:
    // scratch_ holds the candidate truth vector; stores it as a new class and
    // reports it, unless an equivalent class exists or the run was stopped
    template <typename Build>
    bool offer(Build&& build, int size, int qdepth, const Sink& sink) {
        if (stopped_) return false;
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t w : scratch_) {
            h ^= w;
            h *= 1099511628211ull;
        }
        if (qcap_ >= 0) {
            h ^= static_cast<std::uint64_t>(qdepth) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        std::vector<std::uint32_t>& slot = index_[h];
        for (std::uint32_t id : slot) {
            if (qcap_ >= 0 && classes_[id].qdepth != qdepth) continue;
            if (std::memcmp(vec(id), scratch_.data(), probes_.words * 8) == 0)
                return true;
        }
        if (classes_.size() >= guards_.enum_max_classes)
            throw GuardError("enumeration exceeded the class guard of " +
                             std::to_string(guards_.enum_max_classes));
        auto id = static_cast<std::uint32_t>(classes_.size());
        classes_.push_back({build(), size, qdepth});
        arena_.insert(arena_.end(), scratch_.begin(), scratch_.end());
        slot.push_back(id);
        bySize_[static_cast<std::size_t>(size)].push_back(id);
        if (!sink(id)) stopped_ = true;
        return !stopped_;
    }

    static std::int64_t term_value(const Term& t, const int* coord, int n) {
        switch (t.kind) {
            case Term::Kind::Min: return 0;
            case Term::Kind::Max: return n;
            default: break;
        }
        for (int k = 0; k < 3; ++k)
            if (t.name == kPool[k]) return coord[k];
        throw InternalError("enumerated term uses an unknown variable");
    }

    void atomVec(FormulaKind kind, const Term& t1, const Term& t2) {
        std::fill(scratch_.begin(), scratch_.end(), 0);
        for (std::size_t si = 0; si < probes_.ns.size(); ++si) {
            int n = probes_.ns[si];
            std::size_t m = static_cast<std::size_t>(n) + 1;
            std::size_t block = 1;
            for (int k = 0; k < width_; ++k) block *= m;
            for (std::size_t a = 0; a < block; ++a) {
                int coord[3] = {0, 0, 0};
                std::size_t rest = a;
                for (int k = width_ - 1; k >= 0; --k) {
                    coord[k] = static_cast<int>(rest % m);
                    rest /= m;
                }
                std::int64_t v1 = term_value(t1, coord, n);
                std::int64_t v2 = term_value(t2, coord, n);
                bool tv = kind == FormulaKind::Less    ? v1 < v2
                          : kind == FormulaKind::Equal ? v1 == v2
                                                       : v1 + 1 == v2;
                if (tv) set_bit(scratch_.data(), probes_.base[si] + a);
            }
        }
    }

    void quantVec(const std::uint64_t* src, int axis, bool isForall) {
        std::fill(scratch_.begin(), scratch_.end(), 0);
        for (std::size_t si = 0; si < probes_.ns.size(); ++si) {
            std::size_t m = static_cast<std::size_t>(probes_.ns[si]) + 1;
            std::size_t block = 1;
            for (int k = 0; k < width_; ++k) block *= m;
            std::size_t stride = 1;
            for (int k = axis + 1; k < width_; ++k) stride *= m;
            std::size_t base = probes_.base[si];
            for (std::size_t a = 0; a < block; ++a) {
                if ((a / stride) % m != 0) continue;
                bool acc = isForall;
                for (std::size_t t = 0; t < m; ++t) {
                    bool bit = get_bit(src, base + a + t * stride);
                    acc = isForall ? (acc && bit) : (acc || bit);
                }
                if (acc)
                    for (std::size_t t = 0; t < m; ++t)
                        set_bit(scratch_.data(), base + a + t * stride);
            }
        }
    }

    void notVec(const std::uint64_t* a) {
        for (std::size_t w = 0; w < probes_.words; ++w) scratch_[w] = ~a[w];
        scratch_.back() &= probes_.tailMask;
    }
    void andVec(const std::uint64_t* a, const std::uint64_t* b) {
        for (std::size_t w = 0; w < probes_.words; ++w) scratch_[w] = a[w] & b[w];
    }
    void orVec(const std::uint64_t* a, const std::uint64_t* b) {
        for (std::size_t w = 0; w < probes_.words; ++w) scratch_[w] = a[w] | b[w];
    }
    void impVec(const std::uint64_t* a, const std::uint64_t* b) {
        for (std::size_t w = 0; w < probes_.words; ++w) scratch_[w] = ~a[w] | b[w];
        scratch_.back() &= probes_.tailMask;
    }

    int width_;
    int maxSize_;
    int qcap_;
    ProbeFamily probes_;
    Guards guards_;
    bool allowSucc_ = false;
    std::vector<Term> terms_;

    std::vector<ClassInfo> classes_;
    std::vector<std::uint64_t> arena_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index_;
    std::vector<std::vector<std::uint32_t>> bySize_;
    std::vector<std::uint64_t> scratch_;
    bool stopped_ = false;
};

std::vector<int> default_probe_sizes() { return {0, 1, 2, 3, 4, 5}; }

void validate_interpretations(const std::vector<Interpretation>& v) {
    for (const Interpretation& i : v) {
        if (i.n < 0) throw UsageError("interpretation over a negative universe");
        for (int c : i.xyz)
            if (c < 0 || c > i.n)
                throw UsageError("interpretation " + i.to_literal() +
                                 " assigns a value outside the universe");
    }
}

std::map<std::string, int> full_assignment(const Interpretation& i) {
    return {{"x", i.xyz[0]}, {"y", i.xyz[1]}, {"z", i.xyz[2]}};
}

std::string type_key(const DType& t) {
    std::string key;
    for (Point p : t.ord) {
        key += std::to_string(static_cast<int>(p));
        key += ',';
    }
    for (std::int64_t g : t.dist) {
        key += std::to_string(g);
        key += ',';
    }
    return key;
}

} // namespace

std::vector<EnumeratedClass> enumerate_formulas(const Signature& sig, int width,
                                                int max_size, const Guards& guards) {
    Enumerator e(sig, width, max_size, -1, make_probes(width, default_probe_sizes()),
                 guards);
    std::vector<EnumeratedClass> out;
    e.run([&](std::uint32_t id) {
        out.push_back({e.info(id).formula, static_cast<std::size_t>(e.info(id).size)});
        return true;
    });
    return out;
}

std::optional<FormulaPtr> min_distinguishing_formula(
    const Signature& sig, int width, const std::vector<Interpretation>& a,
    const std::vector<Interpretation>& b, int cap, const Guards& guards) {
    validate_interpretations(a);
    validate_interpretations(b);

    // probe the default family plus every queried structure, so the semantic
    // merging cannot identify two formulas that differ on the query
    std::vector<int> ns = default_probe_sizes();
    std::vector<int> extra;
    for (const std::vector<Interpretation>* side : {&a, &b})
        for (const Interpretation& i : *side)
            if (i.n > 5) extra.push_back(i.n);
    std::sort(extra.begin(), extra.end());
    extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
    ns.insert(ns.end(), extra.begin(), extra.end());
    ProbeFamily probes = make_probes(width, ns);

    auto bit_of = [&](const Interpretation& i) {
        std::size_t si = 0;
        while (probes.ns[si] != i.n) ++si;
        std::size_t m = static_cast<std::size_t>(i.n) + 1;
        std::size_t idx = 0;
        for (int k = 0; k < width; ++k)
            idx = idx * m + static_cast<std::size_t>(i.xyz[static_cast<std::size_t>(k)]);
        return probes.base[si] + idx;
    };
    std::vector<std::size_t> aBits, bBits;
    for (const Interpretation& i : a) aBits.push_back(bit_of(i));
    for (const Interpretation& i : b) bBits.push_back(bit_of(i));

    Enumerator e(sig, width, cap, -1, std::move(probes), guards);
    FormulaPtr found;
    e.run([&](std::uint32_t id) {
        const std::uint64_t* v = e.vec(id);
        for (std::size_t bit : aBits)
            if (!get_bit(v, bit)) return true;
        for (std::size_t bit : bBits)
            if (get_bit(v, bit)) return true;
        found = e.info(id).formula;
        return false;
    });
    if (!found) return std::nullopt;

    // the probes decide the search, the evaluator has the final word
    for (const Interpretation& i : a)
        if (!eval_fo(found, Structure(LinearOrder{i.n}), full_assignment(i), guards))
            throw InternalError("enumerated distinguisher failed re-verification on " +
                                i.to_literal());
    for (const Interpretation& i : b)
        if (eval_fo(found, Structure(LinearOrder{i.n}), full_assignment(i), guards))
            throw InternalError("enumerated distinguisher failed re-verification on " +
                                i.to_literal());
    return found;
}

std::optional<std::size_t> min_distinguishing_size(
    const Signature& sig, int width, const std::vector<Interpretation>& a,
    const std::vector<Interpretation>& b, int cap, const Guards& guards) {
    std::optional<FormulaPtr> f = min_distinguishing_formula(sig, width, a, b, cap, guards);
    if (!f) return std::nullopt;
    return size(*f);
}

TypeCheckReport check_type_indistinguishability(int d, int n_max, const Guards& guards) {
    if (d < 0 || n_max < 0)
        throw UsageError("depth and structure bound must be nonnegative");
    if (d > 2) throw GuardError("the type sweep is limited to depth 2");
    if (n_max > 6) throw GuardError("the type sweep is limited to A_0..A_6");

    std::vector<int> ns;
    for (int n = 0; n <= n_max; ++n) ns.push_back(n);
    ProbeFamily probes = make_probes(3, ns);

    // interpretations laid out exactly like the probe bits
    std::vector<Interpretation> interps;
    interps.reserve(probes.bits);
    for (int n : ns) {
        int m = n + 1;
        for (int x = 0; x < m; ++x)
            for (int y = 0; y < m; ++y)
                for (int z = 0; z < m; ++z)
                    interps.push_back(Interpretation::make(n, x, y, z));
    }

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < interps.size(); ++i)
        groups[type_key(d_type(interps[i], d))].push_back(i);

    TypeCheckReport r;
    r.d = d;
    r.n_max = n_max;
    r.interpretations = static_cast<std::int64_t>(interps.size());
    r.groups = static_cast<std::int64_t>(groups.size());
    for (const auto& [key, members] : groups) {
        (void)key;
        auto k = static_cast<std::int64_t>(members.size());
        r.pairs += k * (k - 1) / 2;
    }
    r.max_size = guards.enum_max_size;

    Enumerator e(Signature::order(), 3, guards.enum_max_size, d, std::move(probes),
                 guards);
    e.run([](std::uint32_t) { return true; });
    r.classes = static_cast<std::int64_t>(e.count());

    for (std::uint32_t id = 0; id < e.count(); ++id) {
        const std::uint64_t* v = e.vec(id);
        for (const auto& [key, members] : groups) {
            (void)key;
            bool first = get_bit(v, members[0]);
            for (std::size_t k = 1; k < members.size(); ++k) {
                if (get_bit(v, members[k]) == first) continue;
                if (r.counterexamples.size() < 25)
                    r.counterexamples.push_back(
                        print(e.info(id).formula) + " separates " +
                        interps[members[0]].to_literal() + " and " +
                        interps[members[k]].to_literal());
                break;
            }
        }
    }
    return r;
}

} // namespace fosuccinct
