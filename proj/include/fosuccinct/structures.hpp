#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "fosuccinct/errors.hpp"

namespace fosuccinct {

// Letters of the string alphabets: bits, opening/closing tags of levels
// 1..h+1, and the copy separator (written "dot").
struct Letter {
    enum class Kind { Zero, One, Open, Close, Dot };
    Kind kind = Kind::Zero;
    int level = 0; // Open/Close only

    static Letter zero() { return {Kind::Zero, 0}; }
    static Letter one() { return {Kind::One, 0}; }
    static Letter open(int level) { return {Kind::Open, level}; }
    static Letter close(int level) { return {Kind::Close, level}; }
    static Letter dot() { return {Kind::Dot, 0}; }

    std::string name() const; // "0" "1" "T3" "E3" "dot"
    static Letter parse(const std::string& name);

    friend bool operator==(const Letter&, const Letter&) = default;
    friend auto operator<=>(const Letter&, const Letter&) = default;
};

// The alphabet for level h: 0, 1, T1, E1, ..., T(h+1), E(h+1), dot.
std::vector<Letter> alphabet(int h);

// Finite linear order with universe {0..n}, min = 0, max = n.
struct LinearOrder {
    int n = 0;
    friend bool operator==(const LinearOrder&, const LinearOrder&) = default;
};

// Word over the level-h alphabet; universe is the 0-based positions.
struct LabeledString {
    int h = 1;
    std::vector<Letter> word;
    friend bool operator==(const LabeledString&, const LabeledString&) = default;
};

// Either structure kind, as accepted by the evaluator.
class Structure {
public:
    Structure(LinearOrder o) : v_(o) {}
    Structure(LabeledString s);

    bool is_string() const { return std::holds_alternative<LabeledString>(v_); }
    const LinearOrder& order() const;
    const LabeledString& string() const;

    // Largest element of the universe (n, or last position).
    int last() const;
    int universe_size() const { return last() + 1; }

    // "A:12", or whitespace-separated letter names.
    static Structure parse(const std::string& literal);
    std::string to_literal() const;

    friend bool operator==(const Structure&, const Structure&) = default;

private:
    std::variant<LinearOrder, LabeledString> v_;
};

// The distinguished points of an interpretation, in d-type tie-break
// precedence order.
enum class Point { Min = 0, X = 1, Y = 2, Z = 3, Max = 4 };
std::string point_name(Point p);

// A linear order together with values for x, y, z.
struct Interpretation {
    int n = 0;
    std::array<int, 3> xyz{0, 0, 0};

    static Interpretation make(int n, int x, int y, int z);
    int value(Point p) const;

    // "A:5 x:1 y:2 z:3"
    std::string to_literal() const;
    static Interpretation parse(const std::string& text);

    friend bool operator==(const Interpretation&, const Interpretation&) = default;
    friend auto operator<=>(const Interpretation&, const Interpretation&) = default;
};

// "x=3,y=0,z=7"; omitted variables default to 0.
std::map<std::string, int> parse_assignment(const std::string& text);

std::int64_t diff(std::int64_t m, std::int64_t n);

enum class LtType { Less, Equal, Greater };
LtType lt_type(std::int64_t m, std::int64_t n);
char lt_type_name(LtType t);

// Order of the five points under the assignment plus gap sizes between
// neighbours, with gaps capped at 2^(d+1).
struct DType {
    int d = 0;
    std::array<Point, 5> ord{};
    std::array<std::int64_t, 4> dist{};
    friend bool operator==(const DType&, const DType&) = default;
};

DType d_type(const Interpretation& i, int d);
bool types_equal(const DType& a, const DType& b); // throws on mismatched d

} // namespace fosuccinct
