#include "fosuccinct/est.hpp"

#include <algorithm>

#include "json.hpp"

#include "fosuccinct/errors.hpp"
#include "fosuccinct/evaluator.hpp"

namespace fosuccinct {

namespace {

using Int128 = __int128;

Point var_point(const std::string& name) {
    if (name == "x") return Point::X;
    if (name == "y") return Point::Y;
    if (name == "z") return Point::Z;
    throw UsageError("extended syntax trees use variables x, y, z only (got " +
                     name + ")");
}

void check_names(const Formula* f) {
    if (!f) return;
    auto check_term = [](const Term& t) {
        if (t.kind == Term::Kind::Var) var_point(t.name);
    };
    switch (f->kind) {
    case FormulaKind::Less:
    case FormulaKind::Equal:
    case FormulaKind::Succ:
        check_term(f->lhs);
        check_term(f->rhs);
        break;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
        var_point(f->bound_var);
        break;
    default:
        break;
    }
    check_names(f->left.get());
    check_names(f->right.get());
}

void check_vocabulary(const FormulaPtr& f) {
    validate_against(f, Signature::order_full());
    check_names(f.get());
}

bool holds(const FormulaPtr& f, const Interpretation& I, const Guards& guards) {
    std::map<std::string, int> env;
    for (const auto& v : free_variables(f))
        env[v] = I.value(var_point(v));
    return eval_fo(f, Structure(LinearOrder{I.n}), env, guards);
}

Interpretation with_value(const Interpretation& I, Point p, int a) {
    Interpretation out = I;
    out.xyz[static_cast<int>(p) - 1] = a;
    return out;
}

void dedup(std::vector<Interpretation>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

EstNode build_node(const FormulaPtr& f, std::vector<Interpretation> A,
                   std::vector<Interpretation> B, const Guards& guards) {
    dedup(A);
    dedup(B);
    if (A.size() + B.size() > guards.est_node_interps)
        throw GuardError("extended syntax tree node exceeds " +
                         std::to_string(guards.est_node_interps) +
                         " interpretations");
    EstNode node{f, A, B, {}};
    switch (f->kind) {
    case FormulaKind::Less:
    case FormulaKind::Equal:
    case FormulaKind::Succ:
        break;
    case FormulaKind::Not:
        node.children.push_back(build_node(f->left, std::move(B), std::move(A), guards));
        break;
    case FormulaKind::Or: {
        std::vector<Interpretation> A1, A2;
        for (const auto& I : A)
            (holds(f->left, I, guards) ? A1 : A2).push_back(I);
        node.children.push_back(build_node(f->left, std::move(A1), B, guards));
        node.children.push_back(build_node(f->right, std::move(A2), std::move(B), guards));
        break;
    }
    case FormulaKind::And: {
        std::vector<Interpretation> B1, B2;
        for (const auto& J : B)
            (holds(f->left, J, guards) ? B2 : B1).push_back(J);
        node.children.push_back(build_node(f->left, A, std::move(B1), guards));
        node.children.push_back(build_node(f->right, std::move(A), std::move(B2), guards));
        break;
    }
    case FormulaKind::Imp: {
        // satisfiers of the antecedent must satisfy the consequent; the rest
        // falsify the antecedent and feed its child on the falsifying side
        std::vector<Interpretation> Af, Ag;
        for (const auto& I : A)
            (holds(f->left, I, guards) ? Ag : Af).push_back(I);
        node.children.push_back(build_node(f->left, B, std::move(Af), guards));
        node.children.push_back(build_node(f->right, std::move(Ag), std::move(B), guards));
        break;
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
        bool isExists = f->kind == FormulaKind::Exists;
        Point p = var_point(f->bound_var);
        // the side that owns the quantifier picks one witness per member,
        // the other side is extended with every element
        std::vector<Interpretation> picked, expanded;
        const auto& pickFrom = isExists ? A : B;
        const auto& expandFrom = isExists ? B : A;
        for (const auto& I : pickFrom) {
            int witness = -1;
            for (int a = 0; a <= I.n && witness < 0; ++a)
                if (holds(f->left, with_value(I, p, a), guards) == isExists)
                    witness = a;
            if (witness < 0)
                throw InternalError("no quantifier witness for " + I.to_literal() +
                                    " in " + print(f));
            picked.push_back(with_value(I, p, witness));
        }
        for (const auto& J : expandFrom)
            for (int a = 0; a <= J.n; ++a)
                expanded.push_back(with_value(J, p, a));
        if (isExists)
            node.children.push_back(
                build_node(f->left, std::move(picked), std::move(expanded), guards));
        else
            node.children.push_back(
                build_node(f->left, std::move(expanded), std::move(picked), guards));
        break;
    }
    default:
        throw InternalError("unexpected formula kind in est build");
    }
    return node;
}

std::size_t count_nodes(const EstNode& n) {
    std::size_t total = 1;
    for (const auto& c : n.children) total += count_nodes(c);
    return total;
}

void verify_node(const EstNode& n, const Guards& guards) {
    for (const auto& I : n.A)
        if (!holds(n.formula, I, guards))
            throw InternalError("satisfying label fails at " + I.to_literal() +
                                " for " + print(n.formula));
    for (const auto& J : n.B)
        if (holds(n.formula, J, guards))
            throw InternalError("falsifying label holds at " + J.to_literal() +
                                " for " + print(n.formula));
    for (const auto& c : n.children) verify_node(c, guards);
}

// Weight of the node's minimal separator, or nullopt when a guard stopped
// the search here or in a child.
std::optional<Weight> keyprop_node(const EstNode& n, KeypropReport& report,
                                   std::size_t& counter, const Guards& guards) {
    std::size_t index = counter++;
    std::vector<std::optional<Weight>> childWeights;
    for (const auto& c : n.children)
        childWeights.push_back(keyprop_node(c, report, counter, guards));

    KeypropNodeCheck check;
    check.index = index;
    check.clause = n.children.empty() ? 'a' : (n.children.size() == 2 ? 'b' : 'c');

    std::optional<Weight> w;
    try {
        auto sep = minimal_separator(n.A, n.B, guards);
        if (!sep)
            throw InternalError("node labels admit no separator: " + print(n.formula));
        w = weight(*sep);
    } catch (const GuardError& e) {
        check.skipped = true;
        check.note = e.what();
    }
    bool childrenKnown = std::all_of(childWeights.begin(), childWeights.end(),
                                     [](const auto& cw) { return cw.has_value(); });
    if (w && childrenKnown) {
        check.w = *w;
        switch (check.clause) {
        case 'a':
            check.pass = weight_leq_one(*w);
            break;
        case 'b':
            check.w1 = *childWeights[0];
            check.w2 = *childWeights[1];
            check.pass = weight_leq_sum(*w, check.w1, check.w2);
            break;
        case 'c':
            check.w1 = *childWeights[0];
            check.pass = weight_leq_plus2(*w, check.w1);
            break;
        }
        if (!check.pass) ++report.violations;
    } else {
        check.skipped = true;
        ++report.skipped;
    }
    report.checks.push_back(check);
    return w;
}

nlohmann::json node_json(const EstNode& n) {
    nlohmann::json j;
    switch (n.formula->kind) {
    case FormulaKind::Not: j["sl"] = "not"; break;
    case FormulaKind::And: j["sl"] = "and"; break;
    case FormulaKind::Or: j["sl"] = "or"; break;
    case FormulaKind::Imp: j["sl"] = "imp"; break;
    case FormulaKind::Exists: j["sl"] = "exists " + n.formula->bound_var; break;
    case FormulaKind::Forall: j["sl"] = "forall " + n.formula->bound_var; break;
    default: j["sl"] = print(n.formula); break;
    }
    nlohmann::json a = nlohmann::json::array();
    for (const auto& I : n.A) a.push_back(I.to_literal());
    nlohmann::json b = nlohmann::json::array();
    for (const auto& J : n.B) b.push_back(J.to_literal());
    j["il"] = {{"A", a}, {"B", b}};
    nlohmann::json kids = nlohmann::json::array();
    for (const auto& c : n.children) kids.push_back(node_json(c));
    j["children"] = kids;
    return j;
}

} // namespace

ExtSyntaxTree build_est(const FormulaPtr& f, const std::vector<Interpretation>& A,
                        const std::vector<Interpretation>& B, const Guards& guards) {
    if (!f) throw UsageError("build_est: null formula");
    check_vocabulary(f);
    for (const auto& I : A)
        if (!holds(f, I, guards))
            throw UsageError("interpretation " + I.to_literal() +
                             " does not satisfy the formula");
    for (const auto& J : B)
        if (holds(f, J, guards))
            throw UsageError("interpretation " + J.to_literal() +
                             " does not falsify the formula");
    return ExtSyntaxTree{build_node(f, A, B, guards)};
}

std::size_t node_count(const ExtSyntaxTree& t) { return count_nodes(t.root); }

void verify_est(const ExtSyntaxTree& t, const Guards& guards) {
    verify_node(t.root, guards);
}

KeypropReport check_keyprop(const ExtSyntaxTree& t, const Guards& guards) {
    KeypropReport report;
    std::size_t counter = 0;
    keyprop_node(t.root, report, counter, guards);
    std::sort(report.checks.begin(), report.checks.end(),
              [](const auto& a, const auto& b) { return a.index < b.index; });
    return report;
}

TreeSizeBound tree_size_bound(const ExtSyntaxTree& t, const Guards& guards) {
    TreeSizeBound r;
    r.nodes = node_count(t);
    auto sep = minimal_separator(t.root.A, t.root.B, guards);
    if (!sep)
        throw InternalError("root labels admit no separator");
    Weight w = weight(*sep);
    r.root_weight = w.value();
    Int128 twice = Int128(2) * static_cast<long long>(r.nodes);
    r.bound_holds = twice * twice >= Int128(w.centre) * w.centre + w.border;
    return r;
}

Certificate certify_lower_bound(const FormulaPtr& f,
                                const std::vector<Interpretation>& A,
                                const std::vector<Interpretation>& B,
                                const Guards& guards) {
    if (!f) throw UsageError("certify_lower_bound: null formula");
    check_vocabulary(f);
    for (const auto& I : A)
        if (!holds(f, I, guards))
            throw UsageError("interpretation " + I.to_literal() +
                             " does not satisfy the formula");
    for (const auto& J : B)
        if (holds(f, J, guards))
            throw UsageError("interpretation " + J.to_literal() +
                             " does not falsify the formula");
    auto sep = minimal_separator(A, B, guards);
    if (!sep)
        throw InternalError("satisfier/falsifier sets admit no separator");
    Certificate cert;
    cert.formula_size = size(f);
    cert.separator = *sep;
    cert.separator_weight = weight(*sep);
    Int128 twice = Int128(2) * static_cast<long long>(cert.formula_size);
    cert.verdict = twice * twice >= Int128(cert.separator_weight.centre) *
                                            cert.separator_weight.centre +
                                        cert.separator_weight.border;
    return cert;
}

std::string est_json(const ExtSyntaxTree& t) {
    return node_json(t.root).dump(2);
}

} // namespace fosuccinct
