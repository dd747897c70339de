#include "fosuccinct/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <variant>

#include "fosuccinct/errors.hpp"

namespace fosuccinct {

std::string truth_name(Truth t) {
    switch (t) {
        case Truth::False: return "false";
        case Truth::True: return "true";
        case Truth::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

// Tables above this bit count are not materialized; quantifiers over such
// bodies are evaluated by streaming one word-packed vector at a time.
constexpr std::int64_t kMatBits = std::int64_t(1) << 27;

struct Domain {
    std::vector<int> vals;    // ascending positions
    std::vector<int> pos2idx; // -1 where absent

    static std::shared_ptr<const Domain> make(std::vector<int> v, int last) {
        auto d = std::make_shared<Domain>();
        d->vals = std::move(v);
        d->pos2idx.assign(last + 1, -1);
        for (std::size_t i = 0; i < d->vals.size(); ++i)
            d->pos2idx[d->vals[i]] = static_cast<int>(i);
        return d;
    }
    int size() const { return static_cast<int>(vals.size()); }
    int index_of(int pos) const {
        if (pos < 0 || pos >= static_cast<int>(pos2idx.size())) return -1;
        return pos2idx[pos];
    }
};
using DomainPtr = std::shared_ptr<const Domain>;

struct Dim {
    std::string var;
    DomainPtr dom;
};

struct Table {
    std::vector<Dim> dims; // sorted by variable name; last dim is word-packed
    std::int64_t slices = 1;
    int lastSize = 1;
    int wps = 1; // words per slice
    std::uint64_t lastMask = 1; // mask for the final word of each slice
    std::vector<std::uint64_t> bits;

    std::int64_t words() const { return slices * wps; }

    void setLinearBit(std::int64_t linear, bool v) {
        std::int64_t slice = linear / lastSize;
        int off = static_cast<int>(linear % lastSize);
        std::uint64_t& w = bits[slice * wps + off / 64];
        std::uint64_t m = std::uint64_t(1) << (off % 64);
        if (v) w |= m; else w &= ~m;
    }
    bool getSliceBit(std::int64_t slice, int off) const {
        return (bits[slice * wps + off / 64] >> (off % 64)) & 1;
    }
};
using TablePtr = std::shared_ptr<const Table>;

std::uint64_t wordMask(int nbits) {
    return nbits >= 64 ? ~std::uint64_t(0) : ((std::uint64_t(1) << nbits) - 1);
}

// Per-word mask: full words except the final word of a slice.
std::uint64_t sliceWordMask(const Table& t, int wordInSlice) {
    return wordInSlice + 1 == t.wps ? t.lastMask : ~std::uint64_t(0);
}

struct Binding {
    bool pinned = false;
    int value = 0;
    DomainPtr dom;
};
using Ctx = std::map<std::string, Binding>;

struct ScopedBind {
    Ctx& ctx;
    std::string var;
    std::optional<Binding> saved;
    ScopedBind(Ctx& c, const std::string& v, Binding b) : ctx(c), var(v) {
        auto it = ctx.find(v);
        if (it != ctx.end()) saved = it->second;
        ctx[v] = std::move(b);
    }
    ~ScopedBind() {
        if (saved) ctx[var] = *saved; else ctx.erase(var);
    }
};

// Environment used while streaming through non-materialized zones.
struct Env {
    std::vector<std::pair<const std::string*, int>> vals;
    const int* find(const std::string& v) const {
        for (auto it = vals.rbegin(); it != vals.rend(); ++it)
            if (*it->first == v) return &it->second;
        return nullptr;
    }
};

// Syntactic overapproximation of the terms a variable must equal for a
// subformula to come out true (or false). top means no constraint.
struct TermSet {
    bool top = true;
    std::vector<Term> terms;

    static TermSet topSet() { return TermSet{}; }
    static TermSet of(Term t) {
        TermSet s; s.top = false; s.terms = {std::move(t)}; return s;
    }
    static TermSet unionOf(const TermSet& a, const TermSet& b) {
        if (a.top || b.top) return topSet();
        TermSet s; s.top = false; s.terms = a.terms;
        for (const auto& t : b.terms)
            if (std::find(s.terms.begin(), s.terms.end(), t) == s.terms.end())
                s.terms.push_back(t);
        return s;
    }
    static TermSet intersectOf(const TermSet& a, const TermSet& b) {
        if (a.top) return b;
        if (b.top) return a;
        TermSet s; s.top = false;
        for (const auto& t : a.terms)
            if (std::find(b.terms.begin(), b.terms.end(), t) != b.terms.end())
                s.terms.push_back(t);
        return s;
    }
    bool mentions(const std::string& var) const {
        for (const auto& t : terms)
            if (t.kind == Term::Kind::Var && t.name == var) return true;
        return false;
    }
};

struct Frame {
    std::string setVar; // empty for the global frame
    std::vector<std::uint64_t> member; // position bitmask
    std::map<std::string, TablePtr> cache; // keyed by node pointer + bindings
};

class Engine {
public:
    Engine(const Structure& s, const MsoOptions& mso, const Guards& guards)
        : st_(s), mso_(mso), guards_(guards) {
        last_ = static_cast<int>(st_.universe_size()) - 1;
        isString_ = st_.is_string();
        if (isString_) {
            alphabet_ = alphabet(st_.string().h);
            for (std::size_t i = 0; i < alphabet_.size(); ++i)
                letterToIdx_[alphabet_[i].name()] = static_cast<int>(i);
            letterIdx_.reserve(st_.string().word.size());
            for (const Letter& l : st_.string().word)
                letterIdx_.push_back(letterToIdx_.at(l.name()));
        }
        std::vector<int> full(static_cast<std::size_t>(last_) + 1);
        for (int i = 0; i <= last_; ++i) full[static_cast<std::size_t>(i)] = i;
        fullDomain_ = Domain::make(std::move(full), last_);
        frames_.push_back(Frame{});
    }

    Truth run(const FormulaPtr& f, const std::map<std::string, int>& assign) {
        validate(f, assign);
        FormulaPtr cf = canonicalize(f);
        Ctx ctx;
        for (const auto& [v, val] : assign)
            ctx[v] = Binding{true, val, nullptr};
        if (mso_.mode == MsoMode::Witness) checkWitnessShape(cf.get(), true);
        TablePtr t = evalNode(cf.get(), ctx);
        bool value = t->bits[0] & 1;
        t.reset();
        frames_.clear();
        if (value) return Truth::True;
        return witnessSubstituted_ ? Truth::Inconclusive : Truth::False;
    }

private:
    std::int64_t liveBytes_ = 0; // declared first: freed tables update it
                                 // while later members are destroyed
    const Structure& st_;
    MsoOptions mso_;
    Guards guards_;
    int last_ = 0;
    bool isString_ = false;
    std::vector<Letter> alphabet_;
    std::map<std::string, int> letterToIdx_;
    std::vector<int> letterIdx_;
    DomainPtr fullDomain_;
    std::map<std::uint64_t, DomainPtr> maskDomains_;
    std::vector<Frame> frames_;
    double candidateWork_ = 1.0;
    bool witnessSubstituted_ = false;

    std::unordered_map<const Formula*, std::vector<std::string>> freeVarsMemo_;
    std::unordered_map<const Formula*, std::vector<std::string>> freeSetVarsMemo_;
    std::map<std::pair<const Formula*, std::string>, std::uint64_t> possLettersMemo_;
    std::map<std::pair<const Formula*, std::string>, std::uint64_t> falseLettersMemo_;
    std::map<std::pair<const Formula*, std::string>, TermSet> possValuesMemo_;
    std::map<std::pair<const Formula*, std::string>, TermSet> falseValuesMemo_;
    std::map<std::tuple<const Formula*, std::string, std::string>, FormulaPtr>
        substMemo_;
    // Structurally identical nodes share one pointer, so pointer-keyed memos
    // and the table cache see substituted trees as the nodes they rebuild.
    // The pool also keeps every node alive for the engine's lifetime.
    std::map<std::string, FormulaPtr> nodePool_;
    std::unordered_map<const Formula*, FormulaPtr> canonMemo_;

    // ---- validation ----------------------------------------------------

    void validate(const FormulaPtr& f, const std::map<std::string, int>& assign) {
        if (uses_letters(f) && !isString_)
            throw UsageError("letter atoms require a labeled string structure");
        for (const auto& [v, val] : assign) {
            if (val < 0 || val > last_)
                throw UsageError("assignment " + v + "=" + std::to_string(val) +
                                 " is outside the universe 0.." + std::to_string(last_));
        }
        for (const std::string& v : freeVars(f.get()))
            if (!assign.count(v))
                throw UsageError("free variable " + v + " has no assignment");
        if (mso_.mode == MsoMode::Restricted) {
            if (!isString_)
                throw UsageError("restricted set mode requires a labeled string");
            if (!mso_.restrict_letter)
                throw UsageError("restricted set mode requires a letter");
        }
        for (const auto& [name, vals] : mso_.witness) {
            (void)name;
            for (int p : vals)
                if (p < 0 || p > last_)
                    throw UsageError("witness set position " + std::to_string(p) +
                                     " is outside the universe");
        }
    }

    void checkWitnessShape(const Formula* f, bool positive) {
        switch (f->kind) {
            case FormulaKind::Less:
            case FormulaKind::Equal:
            case FormulaKind::Succ:
            case FormulaKind::Letter:
            case FormulaKind::In:
                return;
            case FormulaKind::Not:
                checkWitnessShape(f->left.get(), !positive);
                return;
            case FormulaKind::Imp:
                checkWitnessShape(f->left.get(), !positive);
                checkWitnessShape(f->right.get(), positive);
                return;
            case FormulaKind::And:
            case FormulaKind::Or:
                checkWitnessShape(f->left.get(), positive);
                checkWitnessShape(f->right.get(), positive);
                return;
            case FormulaKind::Exists:
            case FormulaKind::Forall:
                checkWitnessShape(f->left.get(), positive);
                return;
            case FormulaKind::ExistsSet:
                if (!positive)
                    throw UsageError("witness mode requires positively occurring "
                                     "existential set quantifiers");
                if (!mso_.witness.count(f->set_var))
                    throw UsageError("witness mode is missing a set for " + f->set_var);
                checkWitnessShape(f->left.get(), positive);
                return;
            case FormulaKind::ForallSet:
                throw UsageError("witness mode does not support universal set "
                                 "quantifiers");
        }
    }

    // ---- memoized syntactic analyses ------------------------------------

    const std::vector<std::string>& freeVars(const Formula* f) {
        auto it = freeVarsMemo_.find(f);
        if (it != freeVarsMemo_.end()) return it->second;
        std::set<std::string> s;
        collectFreeVars(f, s);
        auto& slot = freeVarsMemo_[f];
        slot.assign(s.begin(), s.end());
        return slot;
    }

    static void addTermVar(const Term& t, std::set<std::string>& out) {
        if (t.kind == Term::Kind::Var) out.insert(t.name);
    }

    void collectFreeVars(const Formula* f, std::set<std::string>& out) {
        switch (f->kind) {
            case FormulaKind::Less:
            case FormulaKind::Equal:
            case FormulaKind::Succ:
                addTermVar(f->lhs, out); addTermVar(f->rhs, out); return;
            case FormulaKind::Letter:
            case FormulaKind::In:
                addTermVar(f->lhs, out); return;
            case FormulaKind::Not:
                collectFreeVars(f->left.get(), out); return;
            case FormulaKind::And:
            case FormulaKind::Or:
            case FormulaKind::Imp:
                collectFreeVars(f->left.get(), out);
                collectFreeVars(f->right.get(), out);
                return;
            case FormulaKind::Exists:
            case FormulaKind::Forall: {
                std::set<std::string> inner;
                collectFreeVars(f->left.get(), inner);
                inner.erase(f->bound_var);
                out.insert(inner.begin(), inner.end());
                return;
            }
            case FormulaKind::ExistsSet:
            case FormulaKind::ForallSet:
                collectFreeVars(f->left.get(), out); return;
        }
    }

    // Every variable mentioned in f, free or bound.
    void collectAllVars(const Formula* f, std::set<std::string>& out) {
        switch (f->kind) {
            case FormulaKind::Less:
            case FormulaKind::Equal:
            case FormulaKind::Succ:
                addTermVar(f->lhs, out); addTermVar(f->rhs, out); return;
            case FormulaKind::Letter:
            case FormulaKind::In:
                addTermVar(f->lhs, out); return;
            case FormulaKind::Not:
                collectAllVars(f->left.get(), out); return;
            case FormulaKind::And:
            case FormulaKind::Or:
            case FormulaKind::Imp:
                collectAllVars(f->left.get(), out);
                collectAllVars(f->right.get(), out);
                return;
            case FormulaKind::Exists:
            case FormulaKind::Forall:
                out.insert(f->bound_var);
                collectAllVars(f->left.get(), out);
                return;
            case FormulaKind::ExistsSet:
            case FormulaKind::ForallSet:
                collectAllVars(f->left.get(), out); return;
        }
    }

    const std::vector<std::string>& freeSetVars(const Formula* f) {
        auto it = freeSetVarsMemo_.find(f);
        if (it != freeSetVarsMemo_.end()) return it->second;
        std::set<std::string> s;
        collectFreeSetVars(f, s);
        auto& slot = freeSetVarsMemo_[f];
        slot.assign(s.begin(), s.end());
        return slot;
    }

    void collectFreeSetVars(const Formula* f, std::set<std::string>& out) {
        switch (f->kind) {
            case FormulaKind::In: out.insert(f->set_var); return;
            case FormulaKind::Less:
            case FormulaKind::Equal:
            case FormulaKind::Succ:
            case FormulaKind::Letter:
                return;
            case FormulaKind::Not:
                collectFreeSetVars(f->left.get(), out); return;
            case FormulaKind::And:
            case FormulaKind::Or:
            case FormulaKind::Imp:
                collectFreeSetVars(f->left.get(), out);
                collectFreeSetVars(f->right.get(), out);
                return;
            case FormulaKind::Exists:
            case FormulaKind::Forall:
                collectFreeSetVars(f->left.get(), out); return;
            case FormulaKind::ExistsSet:
            case FormulaKind::ForallSet: {
                std::set<std::string> inner;
                collectFreeSetVars(f->left.get(), inner);
                inner.erase(f->set_var);
                out.insert(inner.begin(), inner.end());
                return;
            }
        }
    }

    std::uint64_t allLettersMask() const {
        return wordMask(static_cast<int>(alphabet_.size()));
    }

    bool termIsVar(const Term& t, const std::string& v) {
        return t.kind == Term::Kind::Var && t.name == v;
    }

    // Letters a position bound to `v` may carry in a satisfying extension.
    std::uint64_t possLetters(const Formula* f, const std::string& v) {
        auto key = std::make_pair(f, v);
        auto it = possLettersMemo_.find(key);
        if (it != possLettersMemo_.end()) return it->second;
        std::uint64_t top = allLettersMask();
        std::uint64_t r = top;
        switch (f->kind) {
            case FormulaKind::Letter:
                if (termIsVar(f->lhs, v)) {
                    auto li = letterToIdx_.find(f->letter);
                    r = li == letterToIdx_.end() ? 0
                                                 : (std::uint64_t(1) << li->second);
                }
                break;
            case FormulaKind::Less:
            case FormulaKind::Equal:
            case FormulaKind::Succ:
            case FormulaKind::In:
                break;
            case FormulaKind::Not:
                r = falseLetters(f->left.get(), v);
                break;
            case FormulaKind::And:
                r = possLetters(f->left.get(), v) & possLetters(f->right.get(), v);
                break;
            case FormulaKind::Or:
                r = possLetters(f->left.get(), v) | possLetters(f->right.get(), v);
                break;
            case FormulaKind::Imp:
                r = falseLetters(f->left.get(), v) | possLetters(f->right.get(), v);
                break;
            case FormulaKind::Exists:
            case FormulaKind::Forall:
                r = f->bound_var == v ? top : possLetters(f->left.get(), v);
                break;
            case FormulaKind::ExistsSet:
            case FormulaKind::ForallSet:
                r = possLetters(f->left.get(), v);
                break;
        }
        possLettersMemo_[key] = r;
        return r;
    }

    // Letters a position bound to `v` may carry in a falsifying extension.
    std::uint64_t falseLetters(const Formula* f, const std::string& v) {
        auto key = std::make_pair(f, v);
        auto it = falseLettersMemo_.find(key);
        if (it != falseLettersMemo_.end()) return it->second;
        std::uint64_t top = allLettersMask();
        std::uint64_t r = top;
        switch (f->kind) {
            case FormulaKind::Letter:
                if (termIsVar(f->lhs, v)) {
                    auto li = letterToIdx_.find(f->letter);
                    r = li == letterToIdx_.end()
                            ? top
                            : (top & ~(std::uint64_t(1) << li->second));
                }
                break;
            case FormulaKind::Less:
            case FormulaKind::Equal:
            case FormulaKind::Succ:
            case FormulaKind::In:
                break;
            case FormulaKind::Not:
                r = possLetters(f->left.get(), v);
                break;
            case FormulaKind::And:
                r = falseLetters(f->left.get(), v) | falseLetters(f->right.get(), v);
                break;
            case FormulaKind::Or:
                r = falseLetters(f->left.get(), v) & falseLetters(f->right.get(), v);
                break;
            case FormulaKind::Imp:
                r = possLetters(f->left.get(), v) & falseLetters(f->right.get(), v);
                break;
            case FormulaKind::Exists:
            case FormulaKind::Forall:
                r = f->bound_var == v ? top : falseLetters(f->left.get(), v);
                break;
            case FormulaKind::ExistsSet:
            case FormulaKind::ForallSet:
                r = falseLetters(f->left.get(), v);
                break;
        }
        falseLettersMemo_[key] = r;
        return r;
    }

    // Terms `v` must equal for f to be true (possValues) or false.
    TermSet possValues(const Formula* f, const std::string& v) {
        auto key = std::make_pair(f, v);
        auto it = possValuesMemo_.find(key);
        if (it != possValuesMemo_.end()) return it->second;
        TermSet r = TermSet::topSet();
        switch (f->kind) {
            case FormulaKind::Equal: {
                bool lv = termIsVar(f->lhs, v), rv = termIsVar(f->rhs, v);
                if (lv && !rv) r = TermSet::of(f->rhs);
                else if (rv && !lv) r = TermSet::of(f->lhs);
                break;
            }
            case FormulaKind::Less:
            case FormulaKind::Succ:
            case FormulaKind::Letter:
            case FormulaKind::In:
                break;
            case FormulaKind::Not:
                r = falseValues(f->left.get(), v);
                break;
            case FormulaKind::And:
                r = TermSet::intersectOf(possValues(f->left.get(), v),
                                         possValues(f->right.get(), v));
                break;
            case FormulaKind::Or:
                r = TermSet::unionOf(possValues(f->left.get(), v),
                                     possValues(f->right.get(), v));
                break;
            case FormulaKind::Imp:
                r = TermSet::unionOf(falseValues(f->left.get(), v),
                                     possValues(f->right.get(), v));
                break;
            case FormulaKind::Exists:
            case FormulaKind::Forall:
                if (f->bound_var != v) {
                    r = possValues(f->left.get(), v);
                    if (r.mentions(f->bound_var)) r = TermSet::topSet();
                }
                break;
            case FormulaKind::ExistsSet:
            case FormulaKind::ForallSet:
                r = possValues(f->left.get(), v);
                break;
        }
        possValuesMemo_[key] = r;
        return r;
    }

    TermSet falseValues(const Formula* f, const std::string& v) {
        auto key = std::make_pair(f, v);
        auto it = falseValuesMemo_.find(key);
        if (it != falseValuesMemo_.end()) return it->second;
        TermSet r = TermSet::topSet();
        switch (f->kind) {
            case FormulaKind::Less:
            case FormulaKind::Equal:
            case FormulaKind::Succ:
            case FormulaKind::Letter:
            case FormulaKind::In:
                break;
            case FormulaKind::Not:
                r = possValues(f->left.get(), v);
                break;
            case FormulaKind::And:
                r = TermSet::unionOf(falseValues(f->left.get(), v),
                                     falseValues(f->right.get(), v));
                break;
            case FormulaKind::Or:
                r = TermSet::intersectOf(falseValues(f->left.get(), v),
                                         falseValues(f->right.get(), v));
                break;
            case FormulaKind::Imp:
                r = TermSet::intersectOf(possValues(f->left.get(), v),
                                         falseValues(f->right.get(), v));
                break;
            case FormulaKind::Exists:
            case FormulaKind::Forall:
                if (f->bound_var != v) {
                    r = falseValues(f->left.get(), v);
                    if (r.mentions(f->bound_var)) r = TermSet::topSet();
                }
                break;
            case FormulaKind::ExistsSet:
            case FormulaKind::ForallSet:
                r = falseValues(f->left.get(), v);
                break;
        }
        falseValuesMemo_[key] = r;
        return r;
    }

    // ---- domains ---------------------------------------------------------

    DomainPtr domainFromMask(std::uint64_t mask) {
        if (!isString_ || mask == allLettersMask()) return fullDomain_;
        auto it = maskDomains_.find(mask);
        if (it != maskDomains_.end()) return it->second;
        std::vector<int> vals;
        for (int p = 0; p <= last_; ++p)
            if ((mask >> letterIdx_[p]) & 1) vals.push_back(p);
        DomainPtr d = Domain::make(std::move(vals), last_);
        maskDomains_[mask] = d;
        return d;
    }

    DomainPtr quantifierDomain(const Formula* q) {
        if (!isString_) return fullDomain_;
        std::uint64_t mask = q->kind == FormulaKind::Exists
                                 ? possLetters(q->left.get(), q->bound_var)
                                 : falseLetters(q->left.get(), q->bound_var);
        return domainFromMask(mask);
    }

    // ---- table allocation ------------------------------------------------

    static std::int64_t dimsBits(const std::vector<Dim>& dims) {
        std::int64_t prod = 1;
        for (const Dim& d : dims) {
            int sz = std::max(1, d.dom->size());
            if (prod > (std::int64_t(1) << 62) / sz) return std::int64_t(1) << 62;
            prod *= sz;
        }
        return prod;
    }

    std::shared_ptr<Table> alloc(std::vector<Dim> dims) {
        auto t = new Table();
        t->dims = std::move(dims);
        if (t->dims.empty()) {
            t->slices = 1; t->lastSize = 1; t->wps = 1;
        } else {
            t->lastSize = std::max(1, t->dims.back().dom->size());
            t->wps = (t->lastSize + 63) / 64;
            t->slices = 1;
            for (std::size_t i = 0; i + 1 < t->dims.size(); ++i)
                t->slices *= std::max(1, t->dims[i].dom->size());
        }
        t->lastMask = wordMask(t->lastSize - (t->wps - 1) * 64);
        std::int64_t bytes = t->words() * 8;
        if (static_cast<std::size_t>(liveBytes_ + bytes) > guards_.eval_table_bytes)
            evictTables(bytes);
        if (static_cast<std::size_t>(liveBytes_ + bytes) > guards_.eval_table_bytes) {
            delete t;
            throw GuardError("eval_table_bytes: live truth tables would exceed " +
                             std::to_string(guards_.eval_table_bytes) + " bytes");
        }
        t->bits.assign(static_cast<std::size_t>(t->words()), 0);
        liveBytes_ += bytes;
        std::int64_t* live = &liveBytes_;
        return std::shared_ptr<Table>(t, [live, bytes](Table* p) {
            *live -= bytes;
            delete p;
        });
    }

    // Drop cached tables nothing else references, largest first, until
    // `need` more bytes fit under the guard. Dropped entries recompute on
    // a later miss.
    void evictTables(std::int64_t need) {
        struct Victim {
            std::int64_t bytes;
            std::size_t frame;
            const std::string* key;
        };
        std::vector<Victim> victims;
        for (std::size_t i = 0; i < frames_.size(); ++i)
            for (const auto& [key, tab] : frames_[i].cache)
                if (tab.use_count() == 1)
                    victims.push_back({tab->words() * 8, i, &key});
        std::sort(victims.begin(), victims.end(),
                  [](const Victim& a, const Victim& b) { return a.bytes > b.bytes; });
        for (const Victim& v : victims) {
            if (static_cast<std::size_t>(liveBytes_ + need) <= guards_.eval_table_bytes)
                return;
            frames_[v.frame].cache.erase(*v.key);
        }
    }

    std::shared_ptr<Table> allocConst(std::vector<Dim> dims, bool value) {
        auto t = alloc(std::move(dims));
        if (value) {
            std::fill(t->bits.begin(), t->bits.end(), ~std::uint64_t(0));
            maskPadding(*t);
        }
        return t;
    }

    static void maskPadding(Table& t) {
        for (std::int64_t s = 0; s < t.slices; ++s)
            t.bits[static_cast<std::size_t>(s * t.wps + t.wps - 1)] &= t.lastMask;
    }

    static bool allFalse(const Table& t) {
        for (std::uint64_t w : t.bits)
            if (w) return false;
        return true;
    }

    static bool allTrue(const Table& t) {
        for (std::int64_t s = 0; s < t.slices; ++s)
            for (int w = 0; w < t.wps; ++w)
                if (t.bits[static_cast<std::size_t>(s * t.wps + w)] !=
                    sliceWordMask(t, w))
                    return false;
        return true;
    }

    // ---- node dimensions and cache keys -----------------------------------

    std::vector<Dim> dimsFor(const Formula* f, const Ctx& ctx) {
        std::vector<Dim> dims;
        for (const std::string& v : freeVars(f)) {
            auto it = ctx.find(v);
            if (it == ctx.end())
                throw InternalError("variable " + v + " is neither bound nor assigned");
            if (!it->second.pinned) dims.push_back(Dim{v, it->second.dom});
        }
        return dims;
    }

    std::string cacheKey(const Formula* f, const Ctx& ctx) {
        std::ostringstream os;
        os << static_cast<const void*>(f);
        for (const std::string& v : freeVars(f)) {
            auto it = ctx.find(v);
            os << '|' << v;
            if (it->second.pinned) os << '=' << it->second.value;
            else os << '@' << static_cast<const void*>(it->second.dom.get());
        }
        return os.str();
    }

    Frame& cacheFrame(const Formula* f) {
        const auto& fsv = freeSetVars(f);
        for (std::size_t i = frames_.size(); i-- > 1;) {
            if (std::find(fsv.begin(), fsv.end(), frames_[i].setVar) != fsv.end())
                return frames_[i];
        }
        return frames_[0];
    }

    // ---- term resolution ----------------------------------------------------

    int resolvePinned(const Term& t, const Ctx& ctx) const {
        switch (t.kind) {
            case Term::Kind::Min: return 0;
            case Term::Kind::Max: return last_;
            case Term::Kind::Var: {
                auto it = ctx.find(t.name);
                if (it == ctx.end() || !it->second.pinned)
                    throw InternalError("term variable " + t.name + " is not pinned");
                return it->second.value;
            }
        }
        return 0;
    }

    // Either a fixed value or a dim index within a table's dims.
    struct TermRef {
        bool fixed = true;
        int value = 0;
        int dimIdx = -1;
    };

    TermRef termRef(const Term& t, const Ctx& ctx, const std::vector<Dim>& dims) const {
        TermRef r;
        if (t.kind == Term::Kind::Min) { r.value = 0; return r; }
        if (t.kind == Term::Kind::Max) { r.value = last_; return r; }
        auto it = ctx.find(t.name);
        if (it != ctx.end() && it->second.pinned) { r.value = it->second.value; return r; }
        for (std::size_t i = 0; i < dims.size(); ++i)
            if (dims[i].var == t.name) { r.fixed = false; r.dimIdx = static_cast<int>(i); return r; }
        throw InternalError("term variable " + t.name + " is unbound");
    }

    const std::vector<std::uint64_t>* setMembership(const std::string& X) {
        for (std::size_t i = frames_.size(); i-- > 1;)
            if (frames_[i].setVar == X) return &frames_[i].member;
        auto it = mso_.witness.find(X);
        if (it != mso_.witness.end()) {
            witnessFreeSets_.emplace(X, makeMember(it->second));
            return &witnessFreeSets_.at(X);
        }
        throw UsageError("set variable " + X + " is neither bound nor supplied");
    }

    std::map<std::string, std::vector<std::uint64_t>> witnessFreeSets_;

    std::vector<std::uint64_t> makeMember(const std::vector<int>& positions) {
        std::vector<std::uint64_t> m(static_cast<std::size_t>(last_ / 64 + 1), 0);
        for (int p : positions)
            m[static_cast<std::size_t>(p / 64)] |= std::uint64_t(1) << (p % 64);
        return m;
    }

    static bool memberBit(const std::vector<std::uint64_t>& m, int p) {
        return (m[static_cast<std::size_t>(p / 64)] >> (p % 64)) & 1;
    }

    // ---- atom evaluation -----------------------------------------------------

    bool atomValue(const Formula* f, int a, int b) const {
        switch (f->kind) {
            case FormulaKind::Less: return a < b;
            case FormulaKind::Equal: return a == b;
            case FormulaKind::Succ: return a + 1 == b;
            default: throw InternalError("atomValue on non-binary atom");
        }
    }

    TablePtr evalAtom(const Formula* f, const Ctx& ctx) {
        std::vector<Dim> dims = dimsFor(f, ctx);
        auto t = alloc(dims);
        switch (f->kind) {
            case FormulaKind::Less:
            case FormulaKind::Equal:
            case FormulaKind::Succ: {
                TermRef l = termRef(f->lhs, ctx, dims);
                TermRef r = termRef(f->rhs, ctx, dims);
                fillBinary(*t, f, l, r);
                break;
            }
            case FormulaKind::Letter: {
                TermRef l = termRef(f->lhs, ctx, dims);
                auto li = letterToIdx_.find(f->letter);
                int target = li == letterToIdx_.end() ? -1 : li->second;
                fillUnary(*t, l, [&](int p) {
                    return target >= 0 && letterIdx_[static_cast<std::size_t>(p)] == target;
                });
                break;
            }
            case FormulaKind::In: {
                TermRef l = termRef(f->lhs, ctx, dims);
                const auto* m = setMembership(f->set_var);
                fillUnary(*t, l, [&](int p) { return memberBit(*m, p); });
                break;
            }
            default:
                throw InternalError("evalAtom on non-atom");
        }
        return t;
    }

    template <class Pred>
    void fillUnary(Table& t, const TermRef& l, Pred pred) {
        if (t.dims.empty()) {
            if (pred(l.value)) t.bits[0] |= 1;
            return;
        }
        // one dim; the term either indexes it or is fixed
        const Domain& d = *t.dims[0].dom;
        for (int i = 0; i < d.size(); ++i) {
            int v = l.fixed ? l.value : d.vals[static_cast<std::size_t>(i)];
            if (pred(v)) t.setLinearBit(i, true);
        }
    }

    void fillBinary(Table& t, const Formula* f, const TermRef& l, const TermRef& r) {
        if (t.dims.empty()) {
            if (atomValue(f, l.value, r.value)) t.bits[0] |= 1;
            return;
        }
        if (t.dims.size() == 1) {
            const Domain& d = *t.dims[0].dom;
            for (int i = 0; i < d.size(); ++i) {
                int vi = d.vals[static_cast<std::size_t>(i)];
                int a = l.fixed ? l.value : vi;
                int b = r.fixed ? r.value : vi;
                if (atomValue(f, a, b)) t.setLinearBit(i, true);
            }
            return;
        }
        const Domain& d0 = *t.dims[0].dom;
        const Domain& d1 = *t.dims[1].dom;
        for (int i = 0; i < d0.size(); ++i) {
            for (int j = 0; j < d1.size(); ++j) {
                int a = l.fixed ? l.value
                                : (l.dimIdx == 0 ? d0.vals[static_cast<std::size_t>(i)]
                                                 : d1.vals[static_cast<std::size_t>(j)]);
                int b = r.fixed ? r.value
                                : (r.dimIdx == 0 ? d0.vals[static_cast<std::size_t>(i)]
                                                 : d1.vals[static_cast<std::size_t>(j)]);
                if (atomValue(f, a, b))
                    t.setLinearBit(static_cast<std::int64_t>(i) * d1.size() + j, true);
            }
        }
    }

    // ---- combine / negate / eliminate ----------------------------------------

    TablePtr negate(const TablePtr& a) {
        auto t = alloc(a->dims);
        for (std::size_t i = 0; i < a->bits.size(); ++i)
            t->bits[i] = ~a->bits[i];
        maskPadding(*t);
        return t;
    }

    // Bit strides of table dims within a padded linear bit space where the
    // last dim is rounded up to whole words.
    struct Accessor {
        const Table* t;
        bool hasAxis = false;
        std::vector<std::int64_t> stride; // per result leading dim
    };

    Accessor makeAccessor(const Table& t, const std::vector<Dim>& resultDims) {
        Accessor a;
        a.t = &t;
        std::size_t leading = resultDims.empty() ? 0 : resultDims.size() - 1;
        a.hasAxis = !t.dims.empty() && !resultDims.empty() &&
                    t.dims.back().var == resultDims.back().var;
        a.stride.assign(leading, 0);
        if (t.dims.empty()) return a;
        // padded strides within t
        std::vector<std::int64_t> pad(t.dims.size());
        std::int64_t acc = 1;
        for (std::size_t i = t.dims.size(); i-- > 0;) {
            pad[i] = acc;
            std::int64_t sz = std::max(1, t.dims[i].dom->size());
            if (i + 1 == t.dims.size()) sz = static_cast<std::int64_t>(t.wps) * 64;
            acc *= sz;
        }
        for (std::size_t d = 0; d < leading; ++d)
            for (std::size_t i = 0; i < t.dims.size(); ++i)
                if (t.dims[i].var == resultDims[d].var) a.stride[d] = pad[i];
        return a;
    }

    TablePtr combine(FormulaKind op, const TablePtr& A, const TablePtr& B) {
        std::vector<Dim> dims = A->dims;
        for (const Dim& d : B->dims) {
            bool found = false;
            for (const Dim& e : dims)
                if (e.var == d.var) { found = true; break; }
            if (!found) dims.push_back(d);
        }
        std::sort(dims.begin(), dims.end(),
                  [](const Dim& a, const Dim& b) { return a.var < b.var; });
        auto out = alloc(dims);
        Accessor aa = makeAccessor(*A, dims);
        Accessor ab = makeAccessor(*B, dims);
        std::size_t leading = dims.empty() ? 0 : dims.size() - 1;
        std::vector<int> idx(leading, 0);
        std::int64_t outSlice = 0;
        while (true) {
            std::int64_t bitA = 0, bitB = 0;
            for (std::size_t d = 0; d < leading; ++d) {
                bitA += idx[d] * aa.stride[d];
                bitB += idx[d] * ab.stride[d];
            }
            std::uint64_t* dst = out->bits.data() + outSlice * out->wps;
            combineSlice(op, *out, aa, bitA, ab, bitB, dst);
            // mixed radix increment over leading dims (last varies fastest)
            std::size_t d = leading;
            while (d > 0) {
                --d;
                if (++idx[d] < dims[d].dom->size()) break;
                idx[d] = 0;
                if (d == 0) { d = leading + 1; break; }
            }
            ++outSlice;
            if (leading == 0 || d == leading + 1) break;
        }
        maskPadding(*out);
        return out;
    }

    void combineSlice(FormulaKind op, const Table& out, const Accessor& aa,
                      std::int64_t bitA, const Accessor& ab, std::int64_t bitB,
                      std::uint64_t* dst) {
        auto fetch = [&](const Accessor& ac, std::int64_t bit,
                         int w) -> std::uint64_t {
            if (ac.hasAxis) return ac.t->bits[static_cast<std::size_t>((bit >> 6) + w)];
            bool v = ac.t->bits[static_cast<std::size_t>(bit >> 6)] >> (bit & 63) & 1;
            return v ? ~std::uint64_t(0) : 0;
        };
        for (int w = 0; w < out.wps; ++w) {
            std::uint64_t x = fetch(aa, bitA, w);
            std::uint64_t y = fetch(ab, bitB, w);
            switch (op) {
                case FormulaKind::And: dst[w] = x & y; break;
                case FormulaKind::Or: dst[w] = x | y; break;
                case FormulaKind::Imp: dst[w] = ~x | y; break;
                default: throw InternalError("combine on non-connective");
            }
        }
    }

    TablePtr eliminate(const TablePtr& src, const std::string& var, bool isForall) {
        int dimIdx = -1;
        for (std::size_t i = 0; i < src->dims.size(); ++i)
            if (src->dims[i].var == var) dimIdx = static_cast<int>(i);
        if (dimIdx < 0) return src; // vacuous binder over a nonempty domain
        std::vector<Dim> outDims = src->dims;
        outDims.erase(outDims.begin() + dimIdx);
        auto out = alloc(outDims);
        if (dimIdx + 1 == static_cast<int>(src->dims.size())) {
            // reducing the packed axis
            for (std::int64_t s = 0; s < src->slices; ++s) {
                bool v = isForall;
                if (isForall) {
                    v = true;
                    for (int w = 0; w < src->wps; ++w)
                        if (src->bits[static_cast<std::size_t>(s * src->wps + w)] !=
                            sliceWordMask(*src, w)) { v = false; break; }
                } else {
                    v = false;
                    for (int w = 0; w < src->wps; ++w)
                        if (src->bits[static_cast<std::size_t>(s * src->wps + w)]) {
                            v = true; break;
                        }
                }
                if (v) out->setLinearBit(s, true);
            }
            return out;
        }
        // middle or leading dim: word-parallel accumulate over planes
        std::int64_t pre = 1, post = 1;
        for (int i = 0; i < dimIdx; ++i) pre *= src->dims[static_cast<std::size_t>(i)].dom->size();
        for (std::size_t i = static_cast<std::size_t>(dimIdx) + 1; i + 1 < src->dims.size(); ++i)
            post *= src->dims[i].dom->size();
        std::int64_t blockW = post * src->wps;
        int dv = src->dims[static_cast<std::size_t>(dimIdx)].dom->size();
        if (isForall)
            std::fill(out->bits.begin(), out->bits.end(), ~std::uint64_t(0));
        for (std::int64_t p = 0; p < pre; ++p) {
            std::uint64_t* dst = out->bits.data() + p * blockW;
            for (int j = 0; j < dv; ++j) {
                const std::uint64_t* sp =
                    src->bits.data() + (p * dv + j) * blockW;
                if (isForall)
                    for (std::int64_t w = 0; w < blockW; ++w) dst[w] &= sp[w];
                else
                    for (std::int64_t w = 0; w < blockW; ++w) dst[w] |= sp[w];
            }
        }
        maskPadding(*out);
        return out;
    }

    // ---- main materialized evaluation ----------------------------------------

    TablePtr evalNode(const Formula* f, Ctx& ctx) {
        std::string key = cacheKey(f, ctx);
        {
            Frame& fr = cacheFrame(f);
            auto hit = fr.cache.find(key);
            if (hit != fr.cache.end()) return hit->second;
        }
        TablePtr t = evalNodeUncached(f, ctx);
        // find the frame again: nested set quantifiers may have reallocated
        // the frame stack during evaluation
        cacheFrame(f).cache[key] = t;
        return t;
    }

    TablePtr evalNodeUncached(const Formula* f, Ctx& ctx) {
        switch (f->kind) {
            case FormulaKind::Less:
            case FormulaKind::Equal:
            case FormulaKind::Succ:
            case FormulaKind::Letter:
            case FormulaKind::In:
                return evalAtom(f, ctx);
            case FormulaKind::Not:
                return negate(evalNode(f->left.get(), ctx));
            case FormulaKind::And: {
                TablePtr a = evalNode(f->left.get(), ctx);
                if (allFalse(*a)) return a;
                if (allTrue(*a)) return evalNode(f->right.get(), ctx);
                return combine(FormulaKind::And, a, evalNode(f->right.get(), ctx));
            }
            case FormulaKind::Or: {
                TablePtr a = evalNode(f->left.get(), ctx);
                if (allTrue(*a)) return a;
                if (allFalse(*a)) return evalNode(f->right.get(), ctx);
                return combine(FormulaKind::Or, a, evalNode(f->right.get(), ctx));
            }
            case FormulaKind::Imp: {
                TablePtr a = evalNode(f->left.get(), ctx);
                if (allFalse(*a)) return allocConst(a->dims, true);
                if (allTrue(*a)) return evalNode(f->right.get(), ctx);
                return combine(FormulaKind::Imp, a, evalNode(f->right.get(), ctx));
            }
            case FormulaKind::Exists:
            case FormulaKind::Forall:
                return evalQuantifier(f, ctx);
            case FormulaKind::ExistsSet:
            case FormulaKind::ForallSet:
                return evalSetQuantifier(f, ctx);
        }
        throw InternalError("unhandled formula kind");
    }

    TablePtr evalQuantifier(const Formula* f, Ctx& ctx) {
        bool isForall = f->kind == FormulaKind::Forall;
        const std::string& v = f->bound_var;
        DomainPtr dom = quantifierDomain(f);
        std::vector<Dim> resultDims = dimsFor(f, ctx);
        if (dom->size() == 0)
            return allocConst(resultDims, isForall);
        ScopedBind bind(ctx, v, Binding{false, 0, dom});
        std::vector<Dim> bodyDims = dimsFor(f->left.get(), ctx);
        if (dimsBits(bodyDims) <= kMatBits) {
            TablePtr body = evalNode(f->left.get(), ctx);
            return eliminate(body, v, isForall);
        }
        // streamed evaluation: body too large to materialize
        if (dimsBits(resultDims) > kMatBits)
            throw GuardError("eval_table_bytes: quantifier result table too large");
        if (resultDims.empty())
            throw InternalError("oversized body under a closed quantifier");
        TermSet guard = isForall ? falseValues(f->left.get(), v)
                                 : possValues(f->left.get(), v);
        if (!guard.top) {
            TablePtr folded = foldGuardTerms(f, ctx, resultDims, guard, isForall);
            if (folded) return folded;
        }
        auto out = allocConst(resultDims, isForall);
        const Dim axis = resultDims.back();
        std::size_t leading = resultDims.size() - 1;
        std::vector<std::uint64_t> tmp(static_cast<std::size_t>(out->wps));
        std::vector<int> idx(leading, 0);
        Env env;
        env.vals.reserve(leading + 8);
        std::int64_t slice = 0;
        while (true) {
            env.vals.clear();
            for (std::size_t d = 0; d < leading; ++d)
                env.vals.emplace_back(&resultDims[d].var,
                                      resultDims[d].dom->vals[static_cast<std::size_t>(idx[d])]);
            std::uint64_t* dst = out->bits.data() + slice * out->wps;
            quantifyVec(f, ctx, env, axis, guard, dom, isForall, dst, tmp);
            std::size_t d = leading;
            while (d > 0) {
                --d;
                if (++idx[d] < resultDims[d].dom->size()) break;
                idx[d] = 0;
                if (d == 0) { d = leading + 1; break; }
            }
            ++slice;
            if (leading == 0 || d == leading + 1) break;
        }
        maskPadding(*out);
        return out;
    }

    // Exists/Forall f computed as a fold of body[v -> t] over the terms that
    // can decide it. Every such term is free in the body, so each substituted
    // body drops a variable and fits a smaller table. Returns null when a
    // substitution would capture; the caller then streams slices instead.
    TablePtr foldGuardTerms(const Formula* f, Ctx& ctx,
                            const std::vector<Dim>& resultDims,
                            const TermSet& guard, bool isForall) {
        std::vector<FormulaPtr> bodies;
        bodies.reserve(guard.terms.size());
        for (const Term& t : guard.terms) {
            FormulaPtr b = substBody(f, t);
            if (!b) return nullptr;
            bodies.push_back(std::move(b));
        }
        TablePtr out = allocConst(resultDims, isForall);
        FormulaKind op = isForall ? FormulaKind::And : FormulaKind::Or;
        for (const FormulaPtr& b : bodies) {
            out = combine(op, out, evalNode(b.get(), ctx));
            if (isForall ? allFalse(*out) : allTrue(*out)) break;
        }
        return out;
    }

    // Accumulate one output slice of Exists/Forall f along `axis`.
    void quantifyVec(const Formula* f, Ctx& ctx, Env& env, const Dim& axis,
                     const TermSet& guard, const DomainPtr& dom, bool isForall,
                     std::uint64_t* dst, std::vector<std::uint64_t>& tmp) {
        const std::string& v = f->bound_var;
        std::vector<int> loopVals;
        bool full = guard.top;
        bool diagonal = false;
        if (!full) {
            for (const Term& t : guard.terms) {
                std::optional<int> val = tryResolveEnvTerm(t, env, ctx);
                if (!val) {
                    // the term names the axis variable, whose value differs
                    // per output position; folded in by a diagonal pass below
                    if (t.kind != Term::Kind::Var || t.name != axis.var)
                        throw InternalError("guard term is unresolved");
                    diagonal = true;
                    continue;
                }
                if (dom->index_of(*val) >= 0 &&
                    std::find(loopVals.begin(), loopVals.end(), *val) == loopVals.end())
                    loopVals.push_back(*val);
            }
        }
        int wps = static_cast<int>(tmp.size());
        if (diagonal && !full) {
            FormulaPtr diag = substBody(f, Term::var(axis.var));
            if (!diag) {
                full = true;
            } else {
                // the bound variable set per axis position: body[v -> axis]
                evalVec(diag.get(), ctx, env, axis, tmp.data());
                if (isForall) {
                    for (int w = 0; w < wps; ++w) dst[w] &= tmp[static_cast<std::size_t>(w)];
                } else {
                    for (int w = 0; w < wps; ++w) dst[w] |= tmp[static_cast<std::size_t>(w)];
                }
            }
        }
        if (full) loopVals = dom->vals;
        for (int val : loopVals) {
            env.vals.emplace_back(&v, val);
            evalVec(f->left.get(), ctx, env, axis, tmp.data());
            env.vals.pop_back();
            bool done = true;
            if (isForall) {
                for (int w = 0; w < wps; ++w) {
                    dst[w] &= tmp[static_cast<std::size_t>(w)];
                    if (dst[w]) done = false;
                }
            } else {
                for (int w = 0; w < wps; ++w) {
                    dst[w] |= tmp[static_cast<std::size_t>(w)];
                    std::uint64_t full = w + 1 == wps
                        ? wordMask(axis.dom->size() - (wps - 1) * 64)
                        : ~std::uint64_t(0);
                    if (dst[w] != full) done = false;
                }
            }
            if (done) break;
        }
    }

    std::optional<int> tryResolveEnvTerm(const Term& t, const Env& env,
                                         const Ctx& ctx) const {
        if (t.kind == Term::Kind::Min) return 0;
        if (t.kind == Term::Kind::Max) return last_;
        if (const int* p = env.find(t.name)) return *p;
        auto it = ctx.find(t.name);
        if (it != ctx.end() && it->second.pinned) return it->second.value;
        return std::nullopt;
    }

    static void appendTermKey(std::string& k, const Term& t) {
        switch (t.kind) {
            case Term::Kind::Var: k += 'v'; k += t.name; return;
            case Term::Kind::Min: k += 'm'; return;
            case Term::Kind::Max: k += 'M'; return;
        }
    }

    static std::string nodeKey(const Formula* f) {
        std::string k;
        k += static_cast<char>('A' + static_cast<int>(f->kind));
        appendTermKey(k, f->lhs);
        k += '|';
        appendTermKey(k, f->rhs);
        k += '|';
        k += f->letter;
        k += '|';
        k += f->set_var;
        k += '|';
        k += f->bound_var;
        char buf[2 * sizeof(void*) * 2 + 4];
        std::snprintf(buf, sizeof buf, "|%p|%p",
                      static_cast<const void*>(f->left.get()),
                      static_cast<const void*>(f->right.get()));
        k += buf;
        return k;
    }

    FormulaPtr pooled(FormulaPtr n) {
        auto [it, inserted] = nodePool_.try_emplace(nodeKey(n.get()), std::move(n));
        return it->second;
    }

    // Rebuild f bottom-up through the node pool so repeated subtrees share
    // pointers and substitution results can land on existing nodes.
    FormulaPtr canonicalize(const FormulaPtr& f) {
        auto it = canonMemo_.find(f.get());
        if (it != canonMemo_.end()) return it->second;
        FormulaPtr r;
        switch (f->kind) {
            case FormulaKind::Less: r = lt(f->lhs, f->rhs); break;
            case FormulaKind::Equal: r = eq(f->lhs, f->rhs); break;
            case FormulaKind::Succ: r = succ(f->lhs, f->rhs); break;
            case FormulaKind::Letter: r = letter(f->letter, f->lhs); break;
            case FormulaKind::In: r = in_set(f->lhs, f->set_var); break;
            case FormulaKind::Not: r = lnot(canonicalize(f->left)); break;
            case FormulaKind::And:
                r = land(canonicalize(f->left), canonicalize(f->right)); break;
            case FormulaKind::Or:
                r = lor(canonicalize(f->left), canonicalize(f->right)); break;
            case FormulaKind::Imp:
                r = imp(canonicalize(f->left), canonicalize(f->right)); break;
            case FormulaKind::Exists:
                r = exists(f->bound_var, canonicalize(f->left)); break;
            case FormulaKind::Forall:
                r = forall(f->bound_var, canonicalize(f->left)); break;
            case FormulaKind::ExistsSet:
                r = exists_set(f->set_var, canonicalize(f->left)); break;
            case FormulaKind::ForallSet:
                r = forall_set(f->set_var, canonicalize(f->left)); break;
        }
        r = pooled(std::move(r));
        canonMemo_[f.get()] = r;
        return r;
    }

    // f with every free occurrence of v replaced by the term `to`, or
    // nullptr when a binder of to's variable inside f would capture the
    // replacement. Expects f to be pooled and returns pooled nodes.
    FormulaPtr substFreeVar(const FormulaPtr& f, const std::string& v,
                            const Term& to) {
        const auto& fv = freeVars(f.get());
        if (std::find(fv.begin(), fv.end(), v) == fv.end()) return f;
        auto st = [&](const Term& t) {
            return t.kind == Term::Kind::Var && t.name == v ? to : t;
        };
        switch (f->kind) {
            case FormulaKind::Less: return pooled(lt(st(f->lhs), st(f->rhs)));
            case FormulaKind::Equal: return pooled(eq(st(f->lhs), st(f->rhs)));
            case FormulaKind::Succ: return pooled(succ(st(f->lhs), st(f->rhs)));
            case FormulaKind::Letter: return pooled(letter(f->letter, st(f->lhs)));
            case FormulaKind::In: return pooled(in_set(st(f->lhs), f->set_var));
            case FormulaKind::Not: {
                FormulaPtr a = substFreeVar(f->left, v, to);
                return a ? pooled(lnot(a)) : nullptr;
            }
            case FormulaKind::And:
            case FormulaKind::Or:
            case FormulaKind::Imp: {
                FormulaPtr a = substFreeVar(f->left, v, to);
                if (!a) return nullptr;
                FormulaPtr b = substFreeVar(f->right, v, to);
                if (!b) return nullptr;
                if (f->kind == FormulaKind::And) return pooled(land(a, b));
                if (f->kind == FormulaKind::Or) return pooled(lor(a, b));
                return pooled(imp(a, b));
            }
            case FormulaKind::Exists:
            case FormulaKind::Forall: {
                FormulaPtr inner = f->left;
                std::string b = f->bound_var;
                if (to.kind == Term::Kind::Var && b == to.name) {
                    // rename this binder so the incoming term stays free
                    std::set<std::string> used;
                    collectAllVars(f->left.get(), used);
                    used.insert(v);
                    std::string nb = b;
                    do nb += '\''; while (used.count(nb));
                    inner = substFreeVar(f->left, b, Term::var(nb));
                    if (!inner) return nullptr;
                    b = nb;
                }
                FormulaPtr a = substFreeVar(inner, v, to);
                if (!a) return nullptr;
                return pooled(f->kind == FormulaKind::Exists ? exists(b, a)
                                                             : forall(b, a));
            }
            case FormulaKind::ExistsSet:
            case FormulaKind::ForallSet: {
                FormulaPtr a = substFreeVar(f->left, v, to);
                if (!a) return nullptr;
                return pooled(f->kind == FormulaKind::ExistsSet
                                  ? exists_set(f->set_var, a)
                                  : forall_set(f->set_var, a));
            }
        }
        throw InternalError("unhandled formula kind");
    }

    static std::string termKey(const Term& t) {
        switch (t.kind) {
            case Term::Kind::Var: return t.name;
            case Term::Kind::Min: return "$min";
            case Term::Kind::Max: return "$max";
        }
        throw InternalError("unhandled term kind");
    }

    // Body of quantifier f with its bound variable replaced by `to`, shared
    // across evaluations; nullptr when the substitution would capture.
    FormulaPtr substBody(const Formula* f, const Term& to) {
        auto key = std::make_tuple(f->left.get(), f->bound_var, termKey(to));
        auto it = substMemo_.find(key);
        if (it != substMemo_.end()) return it->second;
        FormulaPtr d = substFreeVar(f->left, f->bound_var, to);
        substMemo_[key] = d;
        return d;
    }

    // Evaluate f along `axis`, all other free variables fixed by env/pins.
    void evalVec(const Formula* f, Ctx& ctx, Env& env, const Dim& axis,
                 std::uint64_t* out) {
        int wps = (std::max(1, axis.dom->size()) + 63) / 64;
        std::vector<Dim> dims = dimsFor(f, ctx);
        if (dimsBits(dims) <= kMatBits) {
            TablePtr t = evalNode(f, ctx);
            extractVec(*t, env, ctx, axis, out);
            return;
        }
        switch (f->kind) {
            case FormulaKind::Less:
            case FormulaKind::Equal:
            case FormulaKind::Succ:
            case FormulaKind::Letter:
            case FormulaKind::In:
                throw InternalError("atom inside a streamed zone is always small");
            case FormulaKind::Not: {
                evalVec(f->left.get(), ctx, env, axis, out);
                std::uint64_t m = wordMask(axis.dom->size() - (wps - 1) * 64);
                for (int w = 0; w < wps; ++w)
                    out[w] = ~out[w] & (w + 1 == wps ? m : ~std::uint64_t(0));
                return;
            }
            case FormulaKind::And:
            case FormulaKind::Or:
            case FormulaKind::Imp: {
                evalVec(f->left.get(), ctx, env, axis, out);
                bool lFalse = true, lTrue = true;
                std::uint64_t m = wordMask(axis.dom->size() - (wps - 1) * 64);
                for (int w = 0; w < wps; ++w) {
                    std::uint64_t full = w + 1 == wps ? m : ~std::uint64_t(0);
                    if (out[w]) lFalse = false;
                    if (out[w] != full) lTrue = false;
                }
                if (f->kind == FormulaKind::And && lFalse) return;
                if (f->kind == FormulaKind::Or && lTrue) return;
                if (f->kind == FormulaKind::Imp && lFalse) {
                    for (int w = 0; w < wps; ++w)
                        out[w] = w + 1 == wps ? m : ~std::uint64_t(0);
                    return;
                }
                std::vector<std::uint64_t> rhs(static_cast<std::size_t>(wps));
                evalVec(f->right.get(), ctx, env, axis, rhs.data());
                for (int w = 0; w < wps; ++w) {
                    switch (f->kind) {
                        case FormulaKind::And: out[w] &= rhs[static_cast<std::size_t>(w)]; break;
                        case FormulaKind::Or: out[w] |= rhs[static_cast<std::size_t>(w)]; break;
                        default:
                            out[w] = (~out[w] | rhs[static_cast<std::size_t>(w)]) &
                                     (w + 1 == wps ? m : ~std::uint64_t(0));
                    }
                }
                return;
            }
            case FormulaKind::Exists:
            case FormulaKind::Forall: {
                bool isForall = f->kind == FormulaKind::Forall;
                DomainPtr dom = quantifierDomain(f);
                std::uint64_t m = wordMask(axis.dom->size() - (wps - 1) * 64);
                for (int w = 0; w < wps; ++w)
                    out[w] = isForall ? (w + 1 == wps ? m : ~std::uint64_t(0)) : 0;
                if (dom->size() == 0) return;
                ScopedBind bind(ctx, f->bound_var, Binding{false, 0, dom});
                TermSet guard = isForall ? falseValues(f->left.get(), f->bound_var)
                                         : possValues(f->left.get(), f->bound_var);
                std::vector<std::uint64_t> tmp(static_cast<std::size_t>(wps));
                quantifyVec(f, ctx, env, axis, guard, dom, isForall, out, tmp);
                return;
            }
            case FormulaKind::ExistsSet:
            case FormulaKind::ForallSet:
                throw GuardError("eval_table_bytes: set quantifier over an "
                                 "oversized first-order body");
        }
    }

    void extractVec(const Table& t, const Env& env, const Ctx& ctx,
                    const Dim& axis, std::uint64_t* out) {
        int wps = (std::max(1, axis.dom->size()) + 63) / 64;
        int axisIdx = -1;
        for (std::size_t i = 0; i < t.dims.size(); ++i)
            if (t.dims[i].var == axis.var) axisIdx = static_cast<int>(i);
        if (axisIdx < 0) {
            // scalar broadcast
            std::int64_t bit = linearBit(t, env, ctx, nullptr, 0);
            bool v = (t.bits[static_cast<std::size_t>(bit >> 6)] >> (bit & 63)) & 1;
            std::uint64_t m = wordMask(axis.dom->size() - (wps - 1) * 64);
            for (int w = 0; w < wps; ++w)
                out[w] = v ? (w + 1 == wps ? m : ~std::uint64_t(0)) : 0;
            return;
        }
        if (axisIdx + 1 == static_cast<int>(t.dims.size())) {
            if (t.dims.back().dom != axis.dom)
                throw InternalError("axis domain mismatch");
            std::int64_t bit = linearBit(t, env, ctx, &axis.var, 0);
            std::memcpy(out, t.bits.data() + (bit >> 6),
                        static_cast<std::size_t>(wps) * 8);
            return;
        }
        // gather: axis is a non-last dim of t
        if (t.dims[static_cast<std::size_t>(axisIdx)].dom != axis.dom)
            throw InternalError("axis domain mismatch");
        std::fill(out, out + wps, 0);
        for (int i = 0; i < axis.dom->size(); ++i) {
            std::int64_t bit = linearBit(t, env, ctx, &axis.var, i);
            if ((t.bits[static_cast<std::size_t>(bit >> 6)] >> (bit & 63)) & 1)
                out[i / 64] |= std::uint64_t(1) << (i % 64);
        }
    }

    // Padded linear bit index of the cell selected by env. When axisVar is
    // given, that dim contributes the domain index axisDomIdx directly.
    std::int64_t linearBit(const Table& t, const Env& env, const Ctx& ctx,
                           const std::string* axisVar, int axisDomIdx) const {
        std::int64_t bit = 0;
        std::int64_t stride = 1;
        for (std::size_t i = t.dims.size(); i-- > 0;) {
            const Dim& d = t.dims[i];
            int idx;
            if (axisVar && d.var == *axisVar) {
                idx = axisDomIdx;
            } else {
                int val;
                if (const int* p = env.find(d.var)) {
                    val = *p;
                } else {
                    auto it = ctx.find(d.var);
                    if (it == ctx.end() || !it->second.pinned)
                        throw InternalError("dim variable " + d.var + " unresolved");
                    val = it->second.value;
                }
                idx = d.dom->index_of(val);
                if (idx < 0) throw InternalError("value outside dim domain");
            }
            bit += static_cast<std::int64_t>(idx) * stride;
            std::int64_t sz = i + 1 == t.dims.size()
                                  ? static_cast<std::int64_t>(t.wps) * 64
                                  : d.dom->size();
            stride *= sz;
        }
        return bit;
    }

    // ---- set quantifiers -------------------------------------------------------

    std::vector<int> setDomainPositions() {
        std::vector<int> pos;
        if (mso_.mode == MsoMode::Restricted) {
            int target = -1;
            auto it = letterToIdx_.find(mso_.restrict_letter->name());
            if (it != letterToIdx_.end()) target = it->second;
            for (int p = 0; p <= last_; ++p)
                if (letterIdx_[static_cast<std::size_t>(p)] == target) pos.push_back(p);
        } else {
            for (int p = 0; p <= last_; ++p) pos.push_back(p);
        }
        return pos;
    }

    TablePtr evalSetQuantifier(const Formula* f, Ctx& ctx) {
        bool isForall = f->kind == FormulaKind::ForallSet;
        if (mso_.mode == MsoMode::Witness) {
            witnessSubstituted_ = true;
            frames_.push_back(Frame{f->set_var,
                                    makeMember(mso_.witness.at(f->set_var)),
                                    {}});
            TablePtr t = evalNode(f->left.get(), ctx);
            frames_.pop_back();
            return t;
        }
        std::vector<int> pos = setDomainPositions();
        int k = static_cast<int>(pos.size());
        if (k >= 63)
            throw GuardError("mso_set_domain: candidate set domain has " +
                             std::to_string(k) + " positions");
        if (static_cast<std::size_t>(k) > guards_.mso_set_domain)
            throw GuardError("mso_set_domain: candidate set domain has " +
                             std::to_string(k) + " positions, limit " +
                             std::to_string(guards_.mso_set_domain));
        double work = std::ldexp(1.0, k);
        if (candidateWork_ * work > guards_.mso_candidates)
            throw GuardError("mso_candidates: candidate sets exceed " +
                             std::to_string(guards_.mso_candidates));
        std::vector<Dim> resultDims = dimsFor(f, ctx);
        if (dimsBits(resultDims) > kMatBits)
            throw GuardError("eval_table_bytes: set quantifier result too large");
        TablePtr acc = allocConst(resultDims, isForall);
        double savedWork = candidateWork_;
        candidateWork_ *= work;
        frames_.push_back(Frame{f->set_var, makeMember({}), {}});
        std::uint64_t total = std::uint64_t(1) << k;
        for (std::uint64_t candidate = 0; candidate < total; ++candidate) {
            Frame& fr = frames_.back();
            std::fill(fr.member.begin(), fr.member.end(), 0);
            for (int i = 0; i < k; ++i)
                if ((candidate >> i) & 1) {
                    int p = pos[static_cast<std::size_t>(i)];
                    fr.member[static_cast<std::size_t>(p / 64)] |=
                        std::uint64_t(1) << (p % 64);
                }
            fr.cache.clear();
            TablePtr t = evalNode(f->left.get(), ctx);
            // dims of t may be a subset of the result dims (constant folding)
            acc = isForall ? combine(FormulaKind::And, acc, t)
                           : combine(FormulaKind::Or, acc, t);
            bool done = isForall ? allFalse(*acc) : allTrue(*acc);
            if (done) break;
        }
        frames_.pop_back();
        candidateWork_ = savedWork;
        return acc;
    }
};

Structure orderStructure(std::int64_t n) {
    return Structure(LinearOrder{static_cast<int>(n)});
}

} // namespace

bool eval_fo(const FormulaPtr& f, const Structure& s,
             const std::map<std::string, int>& assign, const Guards& guards) {
    if (!f) throw UsageError("null formula");
    if (uses_sets(f))
        throw UsageError("formula uses sets; use eval_mso");
    Engine e(s, MsoOptions{}, guards);
    return e.run(f, assign) == Truth::True;
}

Truth eval_mso(const FormulaPtr& f, const Structure& s, const MsoOptions& mso,
               const std::map<std::string, int>& assign, const Guards& guards) {
    if (!f) throw UsageError("null formula");
    Engine e(s, mso, guards);
    return e.run(f, assign);
}

StabilizationResult stabilization_threshold(const FormulaPtr& f,
                                            const Guards& guards) {
    if (!f) throw UsageError("null formula");
    if (uses_sets(f)) throw UsageError("stabilization requires a first-order sentence");
    if (uses_letters(f)) throw UsageError("stabilization is over plain linear orders");
    if (!is_sentence(f)) throw UsageError("stabilization requires a sentence");
    std::int64_t d = quantifier_depth(f);
    if (d + 1 >= 62) throw GuardError("stabilization_cap: quantifier depth too large");
    std::int64_t cap = std::int64_t(1) << (d + 1);
    if (cap > guards.stabilization_cap)
        throw GuardError("stabilization_cap: 2^(d+1) = " + std::to_string(cap) +
                         " exceeds " + std::to_string(guards.stabilization_cap));
    StabilizationResult r;
    r.cap = cap;
    r.values.reserve(static_cast<std::size_t>(cap) + 1);
    for (std::int64_t n = 0; n <= cap; ++n)
        r.values.push_back(eval_fo(f, orderStructure(n), {}, guards));
    r.tail = r.values.back();
    std::int64_t least = cap;
    while (least > 0 && r.values[static_cast<std::size_t>(least - 1)] == r.tail)
        --least;
    r.least = least;
    return r;
}

} // namespace fosuccinct
