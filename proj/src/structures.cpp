#include "fosuccinct/structures.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <sstream>

namespace fosuccinct {

std::string Letter::name() const {
    switch (kind) {
    case Kind::Zero: return "0";
    case Kind::One: return "1";
    case Kind::Open: return "T" + std::to_string(level);
    case Kind::Close: return "E" + std::to_string(level);
    case Kind::Dot: return "dot";
    }
    throw InternalError("Letter::name: bad kind");
}

Letter Letter::parse(const std::string& name) {
    if (name == "0") return zero();
    if (name == "1") return one();
    if (name == "dot") return dot();
    if (name.size() >= 2 && (name[0] == 'T' || name[0] == 'E')) {
        int level = 0;
        auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), level);
        if (ec == std::errc() && p == name.data() + name.size() && level >= 1)
            return name[0] == 'T' ? open(level) : close(level);
    }
    throw UsageError("unknown letter '" + name + "'");
}

std::vector<Letter> alphabet(int h) {
    if (h < 1) throw UsageError("alphabet level must be >= 1");
    std::vector<Letter> a{Letter::zero(), Letter::one()};
    for (int i = 1; i <= h + 1; ++i) {
        a.push_back(Letter::open(i));
        a.push_back(Letter::close(i));
    }
    a.push_back(Letter::dot());
    return a;
}

Structure::Structure(LabeledString s) : v_(std::move(s)) {
    const auto& ls = std::get<LabeledString>(v_);
    if (ls.word.empty()) throw UsageError("labeled string must be nonempty");
    if (ls.h < 1) throw UsageError("labeled string level must be >= 1");
    for (const Letter& l : ls.word)
        if ((l.kind == Letter::Kind::Open || l.kind == Letter::Kind::Close) &&
            l.level > ls.h + 1)
            throw UsageError("letter " + l.name() + " outside the level-" +
                             std::to_string(ls.h) + " alphabet");
}

const LinearOrder& Structure::order() const {
    if (is_string()) throw UsageError("expected a linear order, got a string");
    return std::get<LinearOrder>(v_);
}

const LabeledString& Structure::string() const {
    if (!is_string()) throw UsageError("expected a string, got a linear order");
    return std::get<LabeledString>(v_);
}

int Structure::last() const {
    if (is_string()) return static_cast<int>(string().word.size()) - 1;
    return order().n;
}

Structure Structure::parse(const std::string& literal) {
    if (literal.rfind("A:", 0) == 0) {
        int n = 0;
        const char* begin = literal.data() + 2;
        const char* end = literal.data() + literal.size();
        auto [p, ec] = std::from_chars(begin, end, n);
        if (ec != std::errc() || p != end || n < 0)
            throw UsageError("bad linear-order literal '" + literal + "'");
        return Structure(LinearOrder{n});
    }
    std::istringstream iss(literal);
    std::vector<Letter> word;
    std::string tok;
    int max_level = 0;
    while (iss >> tok) {
        Letter l = Letter::parse(tok);
        if (l.kind == Letter::Kind::Open || l.kind == Letter::Kind::Close)
            max_level = std::max(max_level, l.level);
        word.push_back(l);
    }
    if (word.empty()) throw UsageError("empty structure literal");
    return Structure(LabeledString{std::max(1, max_level - 1), std::move(word)});
}

std::string Structure::to_literal() const {
    if (!is_string()) return "A:" + std::to_string(order().n);
    std::string out;
    for (const Letter& l : string().word) {
        if (!out.empty()) out += ' ';
        out += l.name();
    }
    return out;
}

std::string point_name(Point p) {
    switch (p) {
    case Point::Min: return "min";
    case Point::X: return "x";
    case Point::Y: return "y";
    case Point::Z: return "z";
    case Point::Max: return "max";
    }
    throw InternalError("point_name: bad point");
}

Interpretation Interpretation::make(int n, int x, int y, int z) {
    if (n < 0) throw UsageError("linear order size must be >= 0");
    for (int v : {x, y, z})
        if (v < 0 || v > n)
            throw UsageError("assignment value " + std::to_string(v) +
                             " outside universe {0.." + std::to_string(n) + "}");
    return Interpretation{n, {x, y, z}};
}

int Interpretation::value(Point p) const {
    switch (p) {
    case Point::Min: return 0;
    case Point::Max: return n;
    case Point::X: return xyz[0];
    case Point::Y: return xyz[1];
    case Point::Z: return xyz[2];
    }
    throw InternalError("Interpretation::value: bad point");
}

std::string Interpretation::to_literal() const {
    return "A:" + std::to_string(n) + " x:" + std::to_string(xyz[0]) + " y:" +
           std::to_string(xyz[1]) + " z:" + std::to_string(xyz[2]);
}

Interpretation Interpretation::parse(const std::string& text) {
    std::istringstream in(text);
    std::string token;
    std::map<std::string, int> fields;
    while (in >> token) {
        std::size_t colon = token.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
            throw UsageError("bad interpretation token '" + token +
                             "', expected name:value");
        std::string name = token.substr(0, colon);
        std::string digits = token.substr(colon + 1);
        if (digits.find_first_not_of("0123456789") != std::string::npos ||
            digits.size() > 9)
            throw UsageError("bad value '" + digits + "' for " + name);
        if (name != "A" && name != "x" && name != "y" && name != "z")
            throw UsageError("unknown interpretation field '" + name + "'");
        if (fields.count(name))
            throw UsageError("duplicate interpretation field '" + name + "'");
        fields[name] = std::stoi(digits);
    }
    if (!fields.count("A"))
        throw UsageError("interpretation literal needs the universe field A:N");
    return make(fields["A"], fields.count("x") ? fields["x"] : 0,
                fields.count("y") ? fields["y"] : 0,
                fields.count("z") ? fields["z"] : 0);
}

std::map<std::string, int> parse_assignment(const std::string& text) {
    std::map<std::string, int> out;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t j = text.find(',', i);
        if (j == std::string::npos) j = text.size();
        std::string item = text.substr(i, j - i);
        if (!item.empty()) {
            std::size_t eq = item.find('=');
            if (eq == std::string::npos || eq == 0)
                throw UsageError("bad assignment item '" + item + "' (want var=value)");
            std::string var = item.substr(0, eq);
            int value = 0;
            const char* begin = item.data() + eq + 1;
            const char* end = item.data() + item.size();
            auto [p, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc() || p != end || value < 0)
                throw UsageError("bad assignment value in '" + item + "'");
            if (out.count(var)) throw UsageError("duplicate assignment for '" + var + "'");
            out[var] = value;
        }
        i = j + 1;
    }
    return out;
}

std::int64_t diff(std::int64_t m, std::int64_t n) { return m - n; }

LtType lt_type(std::int64_t m, std::int64_t n) {
    if (m < n) return LtType::Less;
    if (m == n) return LtType::Equal;
    return LtType::Greater;
}

char lt_type_name(LtType t) {
    switch (t) {
    case LtType::Less: return '<';
    case LtType::Equal: return '=';
    case LtType::Greater: return '>';
    }
    throw InternalError("lt_type_name: bad value");
}

DType d_type(const Interpretation& i, int d) {
    if (d < 0) throw UsageError("d must be >= 0");
    DType t;
    t.d = d;
    t.ord = {Point::Min, Point::X, Point::Y, Point::Z, Point::Max};
    std::stable_sort(t.ord.begin(), t.ord.end(),
                     [&](Point a, Point b) { return i.value(a) < i.value(b); });
    std::int64_t cap = d + 1 >= 62 ? std::numeric_limits<std::int64_t>::max()
                                   : (std::int64_t(1) << (d + 1));
    for (int k = 0; k < 4; ++k) {
        std::int64_t gap = i.value(t.ord[k + 1]) - i.value(t.ord[k]);
        t.dist[k] = std::min(gap, cap);
    }
    return t;
}

bool types_equal(const DType& a, const DType& b) {
    if (a.d != b.d) throw UsageError("types_equal: mismatched d");
    return a.ord == b.ord && a.dist == b.dist;
}

} // namespace fosuccinct
