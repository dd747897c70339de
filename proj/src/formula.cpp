#include "fosuccinct/formula.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

namespace fosuccinct {

namespace {

bool valid_var_name(const std::string& s) {
    if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
    if (s == "min" || s == "max") return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    });
}

bool valid_set_var_name(const std::string& s) {
    if (s.empty() || !std::isupper(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

bool valid_letter_name(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c));
    });
}

void check_term(const Term& t) {
    if (t.is_var() && !valid_var_name(t.name))
        throw UsageError("invalid variable name '" + t.name + "'");
}

FormulaPtr make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

FormulaPtr binary_atom(FormulaKind k, Term a, Term b) {
    check_term(a);
    check_term(b);
    Formula f;
    f.kind = k;
    f.lhs = std::move(a);
    f.rhs = std::move(b);
    return make(std::move(f));
}

FormulaPtr connective(FormulaKind k, FormulaPtr a, FormulaPtr b) {
    if (!a || (is_binary_connective(k) && !b))
        throw UsageError("null subformula");
    Formula f;
    f.kind = k;
    f.left = std::move(a);
    f.right = std::move(b);
    return make(std::move(f));
}

// Pointer-memoized fold over the syntax DAG; shared subtrees are visited once.
template <typename T, typename Fn>
T fold(const FormulaPtr& f, std::unordered_map<const Formula*, T>& memo, Fn&& fn) {
    auto it = memo.find(f.get());
    if (it != memo.end()) return it->second;
    T l{}, r{};
    if (f->left) l = fold<T>(f->left, memo, fn);
    if (f->right) r = fold<T>(f->right, memo, fn);
    T v = fn(*f, l, r);
    memo.emplace(f.get(), v);
    return v;
}

} // namespace

bool is_atom(FormulaKind k) {
    switch (k) {
    case FormulaKind::Less:
    case FormulaKind::Equal:
    case FormulaKind::Succ:
    case FormulaKind::Letter:
    case FormulaKind::In:
        return true;
    default:
        return false;
    }
}

bool is_binary_connective(FormulaKind k) {
    return k == FormulaKind::And || k == FormulaKind::Or || k == FormulaKind::Imp;
}

bool is_fo_quantifier(FormulaKind k) {
    return k == FormulaKind::Exists || k == FormulaKind::Forall;
}

bool is_set_quantifier(FormulaKind k) {
    return k == FormulaKind::ExistsSet || k == FormulaKind::ForallSet;
}

FormulaPtr lt(Term a, Term b) { return binary_atom(FormulaKind::Less, std::move(a), std::move(b)); }
FormulaPtr eq(Term a, Term b) { return binary_atom(FormulaKind::Equal, std::move(a), std::move(b)); }
FormulaPtr succ(Term a, Term b) { return binary_atom(FormulaKind::Succ, std::move(a), std::move(b)); }

FormulaPtr letter(std::string name, Term t) {
    if (!valid_letter_name(name))
        throw UsageError("invalid letter name '" + name + "'");
    check_term(t);
    Formula f;
    f.kind = FormulaKind::Letter;
    f.letter = std::move(name);
    f.lhs = std::move(t);
    return make(std::move(f));
}

FormulaPtr in_set(Term t, std::string set_var) {
    if (!valid_set_var_name(set_var))
        throw UsageError("invalid set-variable name '" + set_var + "'");
    check_term(t);
    Formula f;
    f.kind = FormulaKind::In;
    f.set_var = std::move(set_var);
    f.lhs = std::move(t);
    return make(std::move(f));
}

FormulaPtr lnot(FormulaPtr f) { return connective(FormulaKind::Not, std::move(f), nullptr); }
FormulaPtr land(FormulaPtr a, FormulaPtr b) { return connective(FormulaKind::And, std::move(a), std::move(b)); }
FormulaPtr lor(FormulaPtr a, FormulaPtr b) { return connective(FormulaKind::Or, std::move(a), std::move(b)); }
FormulaPtr imp(FormulaPtr a, FormulaPtr b) { return connective(FormulaKind::Imp, std::move(a), std::move(b)); }

namespace {

FormulaPtr fo_quantifier(FormulaKind k, std::string v, FormulaPtr body) {
    if (!valid_var_name(v)) throw UsageError("invalid variable name '" + v + "'");
    if (!body) throw UsageError("null subformula");
    Formula f;
    f.kind = k;
    f.bound_var = std::move(v);
    f.left = std::move(body);
    return make(std::move(f));
}

FormulaPtr set_quantifier(FormulaKind k, std::string v, FormulaPtr body) {
    if (!valid_set_var_name(v)) throw UsageError("invalid set-variable name '" + v + "'");
    if (!body) throw UsageError("null subformula");
    Formula f;
    f.kind = k;
    f.set_var = std::move(v);
    f.left = std::move(body);
    return make(std::move(f));
}

} // namespace

FormulaPtr exists(std::string v, FormulaPtr f) {
    return fo_quantifier(FormulaKind::Exists, std::move(v), std::move(f));
}

FormulaPtr forall(std::string v, FormulaPtr f) {
    return fo_quantifier(FormulaKind::Forall, std::move(v), std::move(f));
}

FormulaPtr exists_set(std::string v, FormulaPtr f) {
    return set_quantifier(FormulaKind::ExistsSet, std::move(v), std::move(f));
}

FormulaPtr forall_set(std::string v, FormulaPtr f) {
    return set_quantifier(FormulaKind::ForallSet, std::move(v), std::move(f));
}

FormulaPtr conj(const std::vector<FormulaPtr>& fs) {
    if (fs.empty()) throw UsageError("conj of empty list");
    FormulaPtr acc = fs.back();
    for (auto it = std::next(fs.rbegin()); it != fs.rend(); ++it) acc = land(*it, acc);
    return acc;
}

FormulaPtr disj(const std::vector<FormulaPtr>& fs) {
    if (fs.empty()) throw UsageError("disj of empty list");
    FormulaPtr acc = fs.back();
    for (auto it = std::next(fs.rbegin()); it != fs.rend(); ++it) acc = lor(*it, acc);
    return acc;
}

std::size_t size(const FormulaPtr& f) {
    std::unordered_map<const Formula*, std::size_t> memo;
    return fold<std::size_t>(f, memo, [](const Formula&, std::size_t l, std::size_t r) {
        return 1 + l + r;
    });
}

namespace {

std::set<std::string> all_fo_variables(const FormulaPtr& f) {
    std::unordered_map<const Formula*, std::set<std::string>> memo;
    return fold<std::set<std::string>>(
        f, memo,
        [](const Formula& n, std::set<std::string> l, const std::set<std::string>& r) {
            l.insert(r.begin(), r.end());
            if (n.lhs.is_var()) l.insert(n.lhs.name);
            if (is_atom(n.kind) && n.kind != FormulaKind::Letter && n.kind != FormulaKind::In &&
                n.rhs.is_var())
                l.insert(n.rhs.name);
            if (is_fo_quantifier(n.kind)) l.insert(n.bound_var);
            return l;
        });
}

} // namespace

std::size_t variable_width(const FormulaPtr& f) { return all_fo_variables(f).size(); }

std::size_t quantifier_depth(const FormulaPtr& f) {
    std::unordered_map<const Formula*, std::size_t> memo;
    return fold<std::size_t>(f, memo, [](const Formula& n, std::size_t l, std::size_t r) {
        return std::max(l, r) + (is_fo_quantifier(n.kind) ? 1 : 0);
    });
}

std::size_t set_quantifier_depth(const FormulaPtr& f) {
    std::unordered_map<const Formula*, std::size_t> memo;
    return fold<std::size_t>(f, memo, [](const Formula& n, std::size_t l, std::size_t r) {
        return std::max(l, r) + (is_set_quantifier(n.kind) ? 1 : 0);
    });
}

std::set<std::string> free_variables(const FormulaPtr& f) {
    std::unordered_map<const Formula*, std::set<std::string>> memo;
    return fold<std::set<std::string>>(
        f, memo,
        [](const Formula& n, std::set<std::string> l, const std::set<std::string>& r) {
            l.insert(r.begin(), r.end());
            if (n.lhs.is_var()) l.insert(n.lhs.name);
            if ((n.kind == FormulaKind::Less || n.kind == FormulaKind::Equal ||
                 n.kind == FormulaKind::Succ) &&
                n.rhs.is_var())
                l.insert(n.rhs.name);
            if (is_fo_quantifier(n.kind)) l.erase(n.bound_var);
            return l;
        });
}

std::set<std::string> free_set_variables(const FormulaPtr& f) {
    std::unordered_map<const Formula*, std::set<std::string>> memo;
    return fold<std::set<std::string>>(
        f, memo,
        [](const Formula& n, std::set<std::string> l, const std::set<std::string>& r) {
            l.insert(r.begin(), r.end());
            if (n.kind == FormulaKind::In) l.insert(n.set_var);
            if (is_set_quantifier(n.kind)) l.erase(n.set_var);
            return l;
        });
}

bool is_sentence(const FormulaPtr& f) {
    return free_variables(f).empty() && free_set_variables(f).empty();
}

bool uses_sets(const FormulaPtr& f) {
    std::unordered_map<const Formula*, bool> memo;
    return fold<bool>(f, memo, [](const Formula& n, bool l, bool r) {
        return l || r || n.kind == FormulaKind::In || is_set_quantifier(n.kind);
    });
}

bool uses_letters(const FormulaPtr& f) {
    std::unordered_map<const Formula*, bool> memo;
    return fold<bool>(f, memo, [](const Formula& n, bool l, bool r) {
        return l || r || n.kind == FormulaKind::Letter;
    });
}

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->lhs != b->lhs || a->rhs != b->rhs ||
        a->letter != b->letter || a->set_var != b->set_var || a->bound_var != b->bound_var)
        return false;
    return structurally_equal(a->left, b->left) && structurally_equal(a->right, b->right);
}

void validate_against(const FormulaPtr& f, const Signature& sig) {
    auto check_const_term = [&](const Term& t) {
        if (t.kind == Term::Kind::Min && !sig.allow_min)
            throw UsageError("signature does not include min");
        if (t.kind == Term::Kind::Max && !sig.allow_max)
            throw UsageError("signature does not include max");
    };
    std::unordered_map<const Formula*, bool> memo;
    fold<bool>(f, memo, [&](const Formula& n, bool, bool) {
        switch (n.kind) {
        case FormulaKind::Succ:
            if (!sig.allow_succ) throw UsageError("signature does not include succ");
            check_const_term(n.lhs);
            check_const_term(n.rhs);
            break;
        case FormulaKind::Less:
        case FormulaKind::Equal:
            check_const_term(n.lhs);
            check_const_term(n.rhs);
            break;
        case FormulaKind::Letter: {
            if (sig.letter_h < 1) throw UsageError("signature does not include letters");
            const std::string& name = n.letter;
            bool ok = name == "0" || name == "1" || name == "dot";
            if (!ok && name.size() >= 2 && (name[0] == 'T' || name[0] == 'E')) {
                int level = 0;
                for (std::size_t i = 1; i < name.size(); ++i) {
                    if (name[i] < '0' || name[i] > '9') { level = -1; break; }
                    level = level * 10 + (name[i] - '0');
                }
                ok = level >= 1 && level <= sig.letter_h + 1;
            }
            if (!ok)
                throw UsageError("letter " + name + " is not in the level-" +
                                 std::to_string(sig.letter_h) + " alphabet");
            check_const_term(n.lhs);
            break;
        }
        case FormulaKind::In:
            if (!sig.allow_sets) throw UsageError("signature does not allow set variables");
            check_const_term(n.lhs);
            break;
        case FormulaKind::ExistsSet:
        case FormulaKind::ForallSet:
            if (!sig.allow_sets) throw UsageError("signature does not allow set quantifiers");
            break;
        default:
            break;
        }
        return true;
    });
}

ParseError::ParseError(const std::string& msg, std::size_t offset)
    : UsageError(msg + " at offset " + std::to_string(offset)), offset_(offset) {}

namespace {

std::string term_text(const Term& t) {
    switch (t.kind) {
    case Term::Kind::Min: return "min";
    case Term::Kind::Max: return "max";
    default: return t.name;
    }
}

void print_rec(const FormulaPtr& f, std::string& out) {
    switch (f->kind) {
    case FormulaKind::Less:
        out += "(< " + term_text(f->lhs) + " " + term_text(f->rhs) + ")";
        return;
    case FormulaKind::Equal:
        out += "(= " + term_text(f->lhs) + " " + term_text(f->rhs) + ")";
        return;
    case FormulaKind::Succ:
        out += "(succ " + term_text(f->lhs) + " " + term_text(f->rhs) + ")";
        return;
    case FormulaKind::Letter:
        out += "(letter " + f->letter + " " + term_text(f->lhs) + ")";
        return;
    case FormulaKind::In:
        out += "(in " + term_text(f->lhs) + " " + f->set_var + ")";
        return;
    case FormulaKind::Not:
        out += "(not ";
        print_rec(f->left, out);
        out += ")";
        return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
        out += f->kind == FormulaKind::And ? "(and " : f->kind == FormulaKind::Or ? "(or " : "(imp ";
        print_rec(f->left, out);
        out += " ";
        print_rec(f->right, out);
        out += ")";
        return;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
        out += f->kind == FormulaKind::Exists ? "(exists " : "(forall ";
        out += f->bound_var + " ";
        print_rec(f->left, out);
        out += ")";
        return;
    case FormulaKind::ExistsSet:
    case FormulaKind::ForallSet:
        out += f->kind == FormulaKind::ExistsSet ? "(existsSet " : "(forallSet ";
        out += f->set_var + " ";
        print_rec(f->left, out);
        out += ")";
        return;
    }
    throw InternalError("print: unhandled node kind");
}

struct Token {
    enum class Kind { LParen, RParen, Symbol, End };
    Kind kind;
    std::string text;
    std::size_t pos;
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) {}

    Token next() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (i_ >= s_.size()) return {Token::Kind::End, "", s_.size()};
        std::size_t start = i_;
        char c = s_[i_];
        if (c == '(') { ++i_; return {Token::Kind::LParen, "(", start}; }
        if (c == ')') { ++i_; return {Token::Kind::RParen, ")", start}; }
        while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) &&
               s_[i_] != '(' && s_[i_] != ')')
            ++i_;
        return {Token::Kind::Symbol, s_.substr(start, i_ - start), start};
    }

private:
    const std::string& s_;
    std::size_t i_ = 0;
};

class Parser {
public:
    explicit Parser(const std::string& s) : lex_(s) { advance(); }

    FormulaPtr parse_all() {
        FormulaPtr f = formula();
        if (cur_.kind != Token::Kind::End)
            throw ParseError("trailing input", cur_.pos);
        return f;
    }

private:
    void advance() { cur_ = lex_.next(); }

    [[noreturn]] void fail(const std::string& what) { throw ParseError(what, cur_.pos); }

    std::string symbol(const char* what) {
        if (cur_.kind != Token::Kind::Symbol) fail(std::string("expected ") + what);
        std::string s = cur_.text;
        advance();
        return s;
    }

    void rparen() {
        if (cur_.kind != Token::Kind::RParen) fail("expected ')'");
        advance();
    }

    Term term() {
        std::size_t pos = cur_.pos;
        std::string s = symbol("term");
        if (s == "min") return Term::min();
        if (s == "max") return Term::max();
        if (!valid_var_name(s)) throw ParseError("invalid variable name '" + s + "'", pos);
        return Term::var(s);
    }

    std::string var_name() {
        std::size_t pos = cur_.pos;
        std::string s = symbol("variable");
        if (!valid_var_name(s)) throw ParseError("invalid variable name '" + s + "'", pos);
        return s;
    }

    std::string set_name() {
        std::size_t pos = cur_.pos;
        std::string s = symbol("set variable");
        if (!valid_set_var_name(s)) throw ParseError("invalid set-variable name '" + s + "'", pos);
        return s;
    }

    FormulaPtr formula() {
        if (cur_.kind != Token::Kind::LParen) fail("expected '('");
        advance();
        std::size_t head_pos = cur_.pos;
        std::string head = symbol("operator");
        FormulaPtr result;
        if (head == "<" || head == "=" || head == "succ") {
            Term a = term();
            Term b = term();
            result = head == "<"   ? lt(std::move(a), std::move(b))
                     : head == "=" ? eq(std::move(a), std::move(b))
                                   : succ(std::move(a), std::move(b));
        } else if (head == "letter") {
            std::size_t pos = cur_.pos;
            std::string name = symbol("letter name");
            if (!valid_letter_name(name)) throw ParseError("invalid letter name '" + name + "'", pos);
            result = letter(std::move(name), term());
        } else if (head == "in") {
            Term t = term();
            result = in_set(std::move(t), set_name());
        } else if (head == "not") {
            result = lnot(formula());
        } else if (head == "and" || head == "or" || head == "imp") {
            FormulaPtr a = formula();
            FormulaPtr b = formula();
            result = head == "and"  ? land(std::move(a), std::move(b))
                     : head == "or" ? lor(std::move(a), std::move(b))
                                    : imp(std::move(a), std::move(b));
        } else if (head == "exists" || head == "forall") {
            std::string v = var_name();
            FormulaPtr body = formula();
            result = head == "exists" ? exists(std::move(v), std::move(body))
                                      : forall(std::move(v), std::move(body));
        } else if (head == "existsSet" || head == "forallSet") {
            std::string v = set_name();
            FormulaPtr body = formula();
            result = head == "existsSet" ? exists_set(std::move(v), std::move(body))
                                         : forall_set(std::move(v), std::move(body));
        } else {
            throw ParseError("unknown operator '" + head + "'", head_pos);
        }
        rparen();
        return result;
    }

    Lexer lex_;
    Token cur_{Token::Kind::End, "", 0};
};

} // namespace

std::string print(const FormulaPtr& f) {
    if (!f) throw UsageError("print: null formula");
    std::string out;
    print_rec(f, out);
    return out;
}

FormulaPtr parse(const std::string& text) { return Parser(text).parse_all(); }

} // namespace fosuccinct
