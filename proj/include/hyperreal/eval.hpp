#pragma once

// Evaluation of parsed expressions into engine values.

#include <cmath>
#include <map>
#include <variant>

#include <hyperreal/dsl.hpp>
#include <hyperreal/expectations.hpp>
#include <hyperreal/nsprob.hpp>
#include <hyperreal/numerosity.hpp>
#include <hyperreal/streams.hpp>
#include <hyperreal/worlds.hpp>

namespace hyperreal::dsl
{

using Value = std::variant<Hyperreal, SetPtr, UtilityStream, DiscreteDistribution, ContinuousDistribution,
                           SpatialDensity, HazardProcess>;

using Definitions = std::map<std::string, NodePtr>;

inline std::string value_kind(const Value &v)
{
    static const char *names[] = {"number", "set", "stream", "distribution", "distribution", "world", "process"};
    return names[v.index()];
}

[[noreturn]] inline void node_error(const Node &n, ErrorCode code, const std::string &msg)
{
    fail(code, "at " + std::to_string(n.pos + 1) + "-" + std::to_string(std::max(n.end, n.pos + 1)) + ": " + msg);
}

inline Rational number_literal(const std::string &lexeme)
{
    const auto dot = lexeme.find('.');
    if (dot == std::string::npos) {
        return Rational(BigInt(lexeme));
    }
    const std::string frac = lexeme.substr(dot + 1);
    BigInt den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    return make_rational(BigInt(lexeme.substr(0, dot) + frac), den);
}

inline bool mentions(const Node &n, const std::string &var)
{
    if (n.kind == NodeKind::ident && n.text == var) {
        return true;
    }
    for (const auto &k : n.kids) {
        if (mentions(*k, var)) {
            return true;
        }
    }
    return false;
}

// Inlines definitions so that translated terms do not depend on the evaluator.
inline NodePtr substitute(const NodePtr &n, const Definitions &defs, const std::string &bound, int depth = 0)
{
    if (depth > 64) {
        node_error(*n, ErrorCode::invalid_argument, "definitions nest too deeply");
    }
    if (n->kind == NodeKind::ident && n->text != bound) {
        auto it = defs.find(n->text);
        if (it != defs.end()) {
            return substitute(it->second, defs, bound, depth + 1);
        }
        return n;
    }
    if (n->kids.empty()) {
        return n;
    }
    std::vector<NodePtr> kids;
    for (const auto &k : n->kids) {
        kids.push_back(substitute(k, defs, bound, depth));
    }
    return make_node(n->kind, n->text, std::move(kids), n->pos, n->end);
}

namespace eval_detail
{

// Value of a term at an integer (or real) point of the bound variable.
template <class T>
Element element_at(const Node &n, const std::string &var, const T &at)
{
    auto dbl = [](const Element &e) { return element_double(e); };
    switch (n.kind) {
        case NodeKind::num: return number_literal(n.text);
        case NodeKind::ident:
            if (n.text == var) {
                if constexpr (std::is_same_v<T, BigInt>) {
                    return Rational(at);
                } else {
                    return at;
                }
            }
            if (n.text == "pi") {
                return M_PI;
            }
            if (n.text == "e") {
                return M_E;
            }
            node_error(n, ErrorCode::parse_error, "unknown identifier '" + n.text + "' in a term of " + var);
        case NodeKind::neg: return Element(Rational(0)) - element_at(*n.kids[0], var, at);
        case NodeKind::binary: {
            const Element a = element_at(*n.kids[0], var, at);
            const Element b = element_at(*n.kids[1], var, at);
            if (n.text == "+") return a + b;
            if (n.text == "-") return a - b;
            if (n.text == "*") return a * b;
            if (n.text == "/") {
                if (element_exact(b) && std::get<Rational>(b) == 0) {
                    node_error(n, ErrorCode::division_by_possibly_zero, "division by zero at " + var + "=" +
                                                                            element_string(element_at(*n.kids[0], var, at)));
                }
                return a / b;
            }
            if (n.text == "^") {
                if (element_exact(a) && element_exact(b) && is_integer(std::get<Rational>(b))) {
                    const BigInt k = std::get<Rational>(b).get_num();
                    if (abs(k) <= 100000 && !(std::get<Rational>(a) == 0 && k < 0)) {
                        return rational_pow(std::get<Rational>(a), k.get_si());
                    }
                }
                return std::pow(dbl(a), dbl(b));
            }
            node_error(n, ErrorCode::invalid_argument, "'" + n.text + "' is not an arithmetic operator");
        }
        case NodeKind::call: {
            if (n.kids.size() != 1) {
                node_error(n, ErrorCode::parse_error, n.text + " takes one argument in a term");
            }
            const Element x = element_at(*n.kids[0], var, at);
            if (n.text == "floor" || n.text == "ceil") {
                if (element_exact(x)) {
                    const Rational &q = std::get<Rational>(x);
                    return Rational(n.text == "floor" ? floor_of(q) : ceil_of(q));
                }
                return n.text == "floor" ? std::floor(dbl(x)) : std::ceil(dbl(x));
            }
            if (n.text == "abs") {
                return element_exact(x) ? Element(Rational(abs(std::get<Rational>(x)))) : Element(std::abs(dbl(x)));
            }
            if (n.text == "sqrt") return std::sqrt(dbl(x));
            if (n.text == "log") return std::log(dbl(x));
            if (n.text == "log2") return std::log2(dbl(x));
            if (n.text == "exp") return std::exp(dbl(x));
            if (n.text == "sin") return std::sin(dbl(x));
            if (n.text == "cos") return std::cos(dbl(x));
            if (n.text == "atan") return std::atan(dbl(x));
            node_error(n, ErrorCode::parse_error, "unknown function '" + n.text + "' in a term");
        }
        default: node_error(n, ErrorCode::parse_error, "not allowed in a term of " + var);
    }
}

inline bool is_num(const Node &n, const char *lexeme)
{
    return n.kind == NodeKind::num && number_literal(n.text) == number_literal(lexeme);
}

inline bool is_ident(const Node &n, const std::string &name)
{
    return n.kind == NodeKind::ident && n.text == name;
}

// 1 + x^2 or x^2 + 1
inline bool is_one_plus_square(const Node &n, const std::string &var)
{
    if (n.kind != NodeKind::binary || n.text != "+") {
        return false;
    }
    auto square = [&](const Node &s) {
        return s.kind == NodeKind::binary && s.text == "^" && is_ident(*s.kids[0], var) && is_num(*s.kids[1], "2");
    };
    return (is_num(*n.kids[0], "1") && square(*n.kids[1])) || (square(*n.kids[0]) && is_num(*n.kids[1], "1"));
}

} // namespace eval_detail

class Evaluator
{
public:
    Definitions defs;
    std::uint64_t horizon = default_horizon;

    Evaluator() = default;
    explicit Evaluator(Definitions d) : defs(std::move(d)) {}

    Value eval(const Node &n)
    {
        switch (n.kind) {
            case NodeKind::num: return Hyperreal(number_literal(n.text));
            case NodeKind::ident: return identifier(n);
            case NodeKind::neg: {
                Value v = eval(*n.kids[0]);
                if (auto s = std::get_if<UtilityStream>(&v)) {
                    return stream::scale(-1, *s);
                }
                return -coerce(v, n);
            }
            case NodeKind::complement: return sets::complement(set_value(*n.kids[0]));
            case NodeKind::binary: return binary(n);
            case NodeKind::call: return call(n);
            case NodeKind::map: return set_value(n);
            default: node_error(n, ErrorCode::parse_error, "'" + render(n) + "' is only allowed as a call argument");
        }
    }

    Hyperreal number(const Node &n) { return coerce(eval(n), n); }

    Hyperreal coerce(const Value &v, const Node &where)
    {
        switch (v.index()) {
            case 0: return std::get<Hyperreal>(v);
            case 1: return numerosity(std::get<SetPtr>(v));
            case 2: return value_of(std::get<UtilityStream>(v));
            case 3: return expected_value_by_levels(std::get<DiscreteDistribution>(v));
            case 4:
                node_error(where, ErrorCode::invalid_argument,
                           "a continuous distribution has no single value; use mean(...), variance(...) or moment(...)");
            case 5: return shell_integral_value(std::get<SpatialDensity>(v));
            case 6: return survival_at_omega(std::get<HazardProcess>(v));
        }
        return Hyperreal(0);
    }

    ExactScalar scalar(const Node &n)
    {
        const Hyperreal h = number(n);
        if (!h.is_symbolic() || h.is_periodic() || !h.symbolic().is_constant()) {
            node_error(n, ErrorCode::invalid_argument, "expected a real constant, got " + h.to_string());
        }
        return h.symbolic().constant_value();
    }

    Rational rational(const Node &n)
    {
        const ExactScalar s = scalar(n);
        if (!s.is_rational()) {
            node_error(n, ErrorCode::invalid_argument, "expected a rational number, got " + s.to_string());
        }
        return s.rational_part();
    }

    BigInt integer(const Node &n)
    {
        const Rational q = rational(n);
        if (!is_integer(q)) {
            node_error(n, ErrorCode::invalid_argument, "expected an integer, got " + q.get_str());
        }
        return q.get_num();
    }

    long small_integer(const Node &n, long lo, long hi)
    {
        const BigInt k = integer(n);
        if (k < lo || k > hi) {
            node_error(n, ErrorCode::invalid_argument,
                       "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        return k.get_si();
    }

    // Summand f(i) as a series, keeping closed-form structure where it is visible.
    SeriesPtr series_of(const NodePtr &body, const std::string &var)
    {
        return series_term(*substitute(body, defs, var), var);
    }

    // Integrand f(x) as a function expression.
    FuncPtr func_of(const NodePtr &body, const std::string &var)
    {
        return func_term(*substitute(body, defs, var), var);
    }

    IntegralBound integral_bound(const Node &n)
    {
        if (eval_detail::is_ident(n, "inf")) {
            return IntegralBound::plus_inf();
        }
        if (n.kind == NodeKind::neg && eval_detail::is_ident(*n.kids[0], "inf")) {
            return IntegralBound::minus_inf();
        }
        return IntegralBound::at(rational(n));
    }

    Symbolic sum_bound(const Node &n)
    {
        if (eval_detail::is_ident(n, "inf")) {
            return Symbolic::omega();
        }
        if (n.kind == NodeKind::neg && eval_detail::is_ident(*n.kids[0], "inf")) {
            return -Symbolic::omega();
        }
        const Hyperreal h = number(n);
        if (!h.is_symbolic() || h.is_periodic()) {
            node_error(n, ErrorCode::invalid_argument, "summation bound needs a closed form");
        }
        return h.symbolic();
    }

    struct IntegralParts
    {
        FuncPtr f;
        IntegralBound a, b;
        std::vector<Rational> singular;
    };

    IntegralParts integral_parts(const Node &n)
    {
        if (n.kind != NodeKind::call || n.text != "int") {
            node_error(n, ErrorCode::invalid_argument, "expected int(x=a..b, f)");
        }
        Args a = split(n, {"singular"});
        need(n, a.ranges.size() == 1 && a.positional.size() == 1, "int(x=a..b, f[, singular=s])");
        IntegralParts p;
        const Node &r = *a.ranges[0];
        p.a = integral_bound(*r.kids[0]);
        p.b = integral_bound(*r.kids[1]);
        p.f = func_of(a.positional[0], r.text);
        if (auto it = a.named.find("singular"); it != a.named.end()) {
            const Node &s = *it->second;
            if (s.kind == NodeKind::list || s.kind == NodeKind::map) {
                for (const auto &k : s.kids) {
                    p.singular.push_back(rational(*k));
                }
            } else {
                p.singular.push_back(rational(s));
            }
        }
        return p;
    }

    SetPtr set_value(const Node &n)
    {
        switch (n.kind) {
            case NodeKind::ident: {
                if (auto s = named_set(n.text)) {
                    if (!defs.count(n.text)) {
                        return s;
                    }
                }
                break;
            }
            case NodeKind::map: {
                std::vector<BigInt> xs;
                for (const auto &k : n.kids) {
                    xs.push_back(integer(*k));
                }
                return sets::finite(xs);
            }
            case NodeKind::binary: {
                if (n.text == "|" || n.text == "&" || n.text == "\\") {
                    SetPtr a = set_value(*n.kids[0]);
                    SetPtr b = set_value(*n.kids[1]);
                    return n.text == "|" ? sets::unite(a, b) : n.text == "&" ? sets::intersect(a, b)
                                                                             : sets::difference(a, b);
                }
                break;
            }
            case NodeKind::complement: return sets::complement(set_value(*n.kids[0]));
            case NodeKind::call: {
                if (auto s = set_constructor(n.text, n.kids, n)) {
                    return s;
                }
                break;
            }
            default: break;
        }
        Value v = eval(n);
        if (auto s = std::get_if<SetPtr>(&v)) {
            return *s;
        }
        node_error(n, ErrorCode::invalid_argument, "expected a set, got a " + value_kind(v));
    }

    UtilityStream stream_value(const Node &n)
    {
        Value v = eval(n);
        if (auto s = std::get_if<UtilityStream>(&v)) {
            return *s;
        }
        node_error(n, ErrorCode::invalid_argument, "expected a stream, got a " + value_kind(v));
    }

    template <class T>
    T typed(const Node &n, const char *what)
    {
        Value v = eval(n);
        if (auto x = std::get_if<T>(&v)) {
            return *x;
        }
        node_error(n, ErrorCode::invalid_argument, std::string("expected a ") + what + ", got a " + value_kind(v));
    }

    // {i:j, ...} as an index map
    std::map<BigInt, BigInt> index_map(const Node &n)
    {
        if (n.kind != NodeKind::map) {
            node_error(n, ErrorCode::invalid_argument, "expected {i:j, ...}");
        }
        std::map<BigInt, BigInt> out;
        for (const auto &k : n.kids) {
            if (k->kind != NodeKind::pair) {
                node_error(*k, ErrorCode::invalid_argument, "expected i:j");
            }
            out[integer(*k->kids[0])] = integer(*k->kids[1]);
        }
        return out;
    }

    struct Args
    {
        std::vector<NodePtr> positional;
        std::vector<NodePtr> ranges;
        std::map<std::string, NodePtr> named;
    };

    static Args split(const Node &call, std::initializer_list<const char *> allowed)
    {
        Args a;
        for (const auto &k : call.kids) {
            if (k->kind == NodeKind::range) {
                a.ranges.push_back(k);
            } else if (k->kind == NodeKind::named) {
                bool ok = false;
                for (const char *name : allowed) {
                    ok = ok || k->text == name;
                }
                if (!ok) {
                    node_error(*k, ErrorCode::parse_error, call.text + " has no option '" + k->text + "'");
                }
                if (a.named.count(k->text)) {
                    node_error(*k, ErrorCode::parse_error, "option '" + k->text + "' given twice");
                }
                a.named[k->text] = k->kids[0];
            } else {
                a.positional.push_back(k);
            }
        }
        return a;
    }

    static void need(const Node &call, bool ok, const std::string &usage)
    {
        if (!ok) {
            node_error(call, ErrorCode::parse_error, "arity mismatch; usage: " + usage);
        }
    }

private:
    int depth_ = 0;

    static SetPtr named_set(const std::string &name)
    {
        if (name == "evens") return sets::progression(2, 2);
        if (name == "odds") return sets::progression(1, 2);
        if (name == "squares") return sets::image(1, 2);
        if (name == "cubes") return sets::image(1, 3);
        if (name == "naturals" || name == "positives") return sets::positives();
        if (name == "integers") return sets::integers();
        if (name == "empty") return sets::finite({});
        return nullptr;
    }

    SetPtr set_constructor(const std::string &name, const std::vector<NodePtr> &args, const Node &where)
    {
        auto arity = [&](std::size_t lo, std::size_t hi, const std::string &usage) {
            if (args.size() < lo || args.size() > hi) {
                node_error(where, ErrorCode::parse_error, "arity mismatch; usage: " + usage);
            }
        };
        if (name == "ap") {
            arity(2, 2, "ap a d");
            return sets::progression(integer(*args[0]), integer(*args[1]));
        }
        if (name == "mod") {
            arity(2, 2, "mod a d");
            return sets::residue(integer(*args[0]), integer(*args[1]));
        }
        if (name == "powers") {
            arity(1, 2, "powers b [k0]");
            return sets::powers(small_integer(*args[0], 2, 1 << 20), args.size() > 1 ? small_integer(*args[1], 0, 4096) : 0);
        }
        if (name == "image") {
            arity(2, 2, "image c m");
            return sets::image(rational(*args[0]), small_integer(*args[1], 1, 64));
        }
        if (name == "range") {
            arity(2, 2, "range a b");
            const BigInt a = integer(*args[0]);
            const BigInt b = integer(*args[1]);
            if (b - a > 1000000) {
                node_error(where, ErrorCode::invalid_argument, "finite range too long");
            }
            std::vector<BigInt> xs;
            for (BigInt k = a; k <= b; ++k) {
                xs.push_back(k);
            }
            return sets::finite(xs);
        }
        return nullptr;
    }

    Value identifier(const Node &n)
    {
        const std::string &id = n.text;
        if (auto it = defs.find(id); it != defs.end()) {
            if (++depth_ > 64) {
                depth_ = 0;
                node_error(n, ErrorCode::invalid_argument, "definition of '" + id + "' is circular");
            }
            Value v = eval(*it->second);
            --depth_;
            return v;
        }
        if (id == "w" || id == "omega") {
            return Hyperreal::omega();
        }
        if (id == "pi") {
            return Hyperreal(ExactScalar::pi());
        }
        if (id == "e") {
            return Hyperreal(ExactScalar::e());
        }
        if (id == "inf") {
            node_error(n, ErrorCode::parse_error, "'inf' is only allowed as a bound");
        }
        if (auto s = named_set(id)) {
            return s;
        }
        node_error(n, ErrorCode::parse_error, "unknown identifier '" + id + "'");
    }

    Hyperreal power(const Hyperreal &x, const Hyperreal &y, const Node &where)
    {
        if (y.is_symbolic() && !y.is_periodic() && y.symbolic().is_rational_constant()) {
            const Rational r = y.symbolic().constant_value().rational_part();
            if (is_integer(r) && r < 0 && r > -64) {
                return Hyperreal(1) / power(x, Hyperreal(Rational(-r)), where);
            }
            if (is_integer(r) && r >= 0 && r < 64) {
                Hyperreal acc(1);
                for (long k = 0; k < r.get_num().get_si(); ++k) {
                    acc *= x;
                }
                return acc;
            }
            return hr_pow(x, r);
        }
        if (!x.is_symbolic() || x.is_periodic() || !x.symbolic().is_constant()) {
            node_error(where, ErrorCode::unsupported, "power with a non-constant exponent needs a constant base");
        }
        if (!y.is_symbolic() || y.is_periodic()) {
            node_error(where, ErrorCode::unsupported, "exponent needs a single closed form");
        }
        const ExactScalar b = x.symbolic().constant_value();
        const Symbolic &e = y.symbolic();
        if (b == ExactScalar::e()) {
            return Hyperreal(sym_exp(e));
        }
        if (!b.is_rational()) {
            node_error(where, ErrorCode::unsupported, "base " + b.to_string() + " with a non-constant exponent");
        }
        const Rational q = b.rational_part();
        if (q > 0) {
            return q == 1 ? Hyperreal(1) : Hyperreal(sym_exp(e * Symbolic(ExactScalar::log(q))));
        }
        if (q == -1) {
            // (-1)^y = 1 - 2 (y - 2 floor(y/2)) for integer y
            const Symbolic parity = e - Symbolic(2) * sym_floor(e / Symbolic(2));
            return Hyperreal(Symbolic(1) - Symbolic(2) * parity);
        }
        node_error(where, ErrorCode::unsupported, "negative base " + q.get_str() + " with a non-constant exponent");
    }

    Value binary(const Node &n)
    {
        const std::string &op = n.text;
        if (op == "|" || op == "&" || op == "\\") {
            return set_value(n);
        }
        Value a = eval(*n.kids[0]);
        Value b = eval(*n.kids[1]);
        auto *sa = std::get_if<UtilityStream>(&a);
        auto *sb = std::get_if<UtilityStream>(&b);
        if (sa && sb && (op == "+" || op == "-")) {
            return op == "+" ? stream::add(*sa, *sb) : stream::subtract(*sa, *sb);
        }
        if (op == "*" && (sa || sb) && !(sa && sb)) {
            const Node &k = sa ? *n.kids[1] : *n.kids[0];
            return stream::scale(rational(k), sa ? *sa : *sb);
        }
        if (op == "/" && sa && !sb) {
            const Rational d = rational(*n.kids[1]);
            if (d == 0) {
                node_error(n, ErrorCode::division_by_possibly_zero, "division of a stream by zero");
            }
            return stream::scale(Rational(1) / d, *sa);
        }
        const Hyperreal x = coerce(a, *n.kids[0]);
        const Hyperreal y = coerce(b, *n.kids[1]);
        if (op == "+") return x + y;
        if (op == "-") return x - y;
        if (op == "*") return x * y;
        if (op == "/") return x / y;
        if (op == "^") return power(x, y, n);
        node_error(n, ErrorCode::parse_error, "unknown operator '" + op + "'");
    }

    Value call(const Node &n)
    {
        const std::string &f = n.text;
        static const std::map<std::string, Hyperreal (*)(const Hyperreal &)> unary = {
            {"floor", &hr_floor}, {"ceil", &hr_ceil}, {"sqrt", &hr_sqrt}, {"log", &hr_log}, {"exp", &hr_exp},
            {"cos", &hr_cos},     {"sin", &hr_sin},   {"atan", &hr_atan}, {"abs", &hr_abs}, {"shadow", &hr_shadow},
        };
        if (auto it = unary.find(f); it != unary.end()) {
            need(n, n.kids.size() == 1, f + "(x)");
            return it->second(number(*n.kids[0]));
        }
        if (f == "log2") {
            need(n, n.kids.size() == 1, "log2(x)");
            return hr_log(number(*n.kids[0])) / Hyperreal(ExactScalar::log(Rational(2)));
        }
        if (f == "sum") {
            Args a = split(n, {});
            need(n, a.ranges.size() == 1 && a.positional.size() == 1, "sum(i=lo..hi, f)");
            const Node &r = *a.ranges[0];
            return sum(series_of(a.positional[0], r.text), sum_bound(*r.kids[0]), sum_bound(*r.kids[1]));
        }
        if (f == "int") {
            auto p = integral_parts(n);
            return integral(p.f, p.a, p.b, p.singular);
        }
        if (f == "num" || f == "numerosity") {
            need(n, n.kids.size() == 1, f + "(set)");
            return numerosity(set_value(*n.kids[0]));
        }
        if (f == "proportion") {
            need(n, n.kids.size() == 2, "proportion(subset, set)");
            return proportion(set_value(*n.kids[0]), set_value(*n.kids[1]));
        }
        if (f == "set") {
            need(n, !n.kids.empty(), "set(name | expr | ap a d | mod a d | powers b [k0] | image c m)");
            if (n.kids.size() == 1) {
                return set_value(*n.kids[0]);
            }
            if (n.kids[0]->kind == NodeKind::ident) {
                std::vector<NodePtr> rest(n.kids.begin() + 1, n.kids.end());
                if (auto s = set_constructor(n.kids[0]->text, rest, n)) {
                    return s;
                }
            }
            node_error(n, ErrorCode::parse_error, "unknown set constructor");
        }
        if (f == "stream") {
            return make_stream(n);
        }
        if (f == "value") {
            need(n, n.kids.size() == 1, "value(stream)");
            return number(*n.kids[0]);
        }
        if (f == "average") {
            need(n, n.kids.size() == 1, "average(stream | world)");
            Value v = eval(*n.kids[0]);
            if (auto w = std::get_if<SpatialDensity>(&v)) {
                return spatial_average(*w);
            }
            if (auto s = std::get_if<UtilityStream>(&v)) {
                return average_of(*s);
            }
            node_error(n, ErrorCode::invalid_argument, "average of a " + value_kind(v));
        }
        if (f == "dist") {
            return make_distribution(n);
        }
        if (f == "ev") {
            need(n, n.kids.size() == 1, "ev(dist)");
            return expected_value_by_levels(typed<DiscreteDistribution>(*n.kids[0], "discrete distribution"));
        }
        if (f == "evq") {
            need(n, n.kids.size() == 1, "evq(dist)");
            return expected_value_by_quantile(typed<DiscreteDistribution>(*n.kids[0], "discrete distribution"));
        }
        if (f == "mean" || f == "variance") {
            need(n, n.kids.size() == 1, f + "(dist)");
            Value v = eval(*n.kids[0]);
            if (auto c = std::get_if<ContinuousDistribution>(&v)) {
                const Hyperreal m = moment(*c, 1);
                return f == "mean" ? m : moment(*c, 2) - m * m;
            }
            if (auto d = std::get_if<DiscreteDistribution>(&v); d && f == "mean") {
                return expected_value_by_levels(*d);
            }
            node_error(n, ErrorCode::invalid_argument, f + " of a " + value_kind(v));
        }
        if (f == "moment") {
            need(n, n.kids.size() == 2, "moment(dist, k)");
            return moment(typed<ContinuousDistribution>(*n.kids[0], "continuous distribution"),
                          static_cast<unsigned>(small_integer(*n.kids[1], 0, 16)));
        }
        if (f == "pascal") {
            need(n, n.kids.size() == 2, "pascal(k, p)");
            return pascal_value(scalar(*n.kids[0]), rational(*n.kids[1]));
        }
        if (f == "hierarchy") {
            need(n, n.kids.size() == 1, "hierarchy(k)");
            return hierarchy_value(rational(*n.kids[0]));
        }
        if (f == "world") {
            return make_world(n);
        }
        if (f == "total" || f == "normalized") {
            need(n, n.kids.size() == 1, f + "(world)");
            const auto w = typed<SpatialDensity>(*n.kids[0], "world");
            return f == "total" ? shell_integral_value(w) : normalized_value(w);
        }
        if (f == "proc") {
            return make_process(n);
        }
        if (f == "survival" || f == "smooth_survival") {
            need(n, n.kids.size() == 1, f + "(proc)");
            const auto p = typed<HazardProcess>(*n.kids[0], "process");
            return f == "survival" ? survival_at_omega(p) : smooth_survival_at_omega(p);
        }
        node_error(n, ErrorCode::parse_error, "unknown function '" + f + "'");
    }

    Value make_stream(const Node &n)
    {
        const std::string usage =
            "stream(const c | geom a r | arith a d | indicator S | overlay s {i:v} | delay s | dyson L | terms f(i))";
        need(n, !n.kids.empty() && (n.kids[0]->kind == NodeKind::ident || n.kids[0]->kind == NodeKind::call), usage);
        const std::string &kind = n.kids[0]->text;
        std::vector<NodePtr> a;
        if (n.kids[0]->kind == NodeKind::call) {
            // "arith (-3) 1" reads as arith(-3) followed by 1
            a = n.kids[0]->kids;
        }
        a.insert(a.end(), n.kids.begin() + 1, n.kids.end());
        if (kind == "const") {
            need(n, a.size() == 1, "stream(const c)");
            return stream::constant(rational(*a[0]));
        }
        if (kind == "geom") {
            need(n, a.size() == 2, "stream(geom a r)");
            const Rational r = rational(*a[1]);
            if (r == 0) {
                node_error(*a[1], ErrorCode::invalid_argument, "ratio must be non-zero");
            }
            return stream::geometric(rational(*a[0]), r);
        }
        if (kind == "arith") {
            need(n, a.size() == 2, "stream(arith a d)");
            return stream::arithmetic(rational(*a[0]), rational(*a[1]));
        }
        if (kind == "indicator") {
            need(n, a.size() == 1, "stream(indicator S)");
            return stream::indicator(set_value(*a[0]));
        }
        if (kind == "overlay") {
            need(n, a.size() == 2 && a[1]->kind == NodeKind::map, "stream(overlay s {i:v, ...})");
            std::map<BigInt, Element> over;
            for (const auto &k : a[1]->kids) {
                if (k->kind != NodeKind::pair) {
                    node_error(*k, ErrorCode::invalid_argument, "expected i:v");
                }
                over[integer(*k->kids[0])] = rational(*k->kids[1]);
            }
            return stream::overlay(stream_value(*a[0]), over);
        }
        if (kind == "delay") {
            need(n, a.size() == 1, "stream(delay s)");
            return stream::delay(stream_value(*a[0]));
        }
        if (kind == "permute") {
            need(n, a.size() == 2, "stream(permute s {i:j, ...})");
            return stream::permute(stream_value(*a[0]), index_map(*a[1]));
        }
        if (kind == "dyson") {
            need(n, a.size() == 1, "stream(dyson L)");
            return dyson_stream(static_cast<unsigned long>(small_integer(*a[0], 1, 1 << 16)));
        }
        if (kind == "terms") {
            need(n, a.size() == 1, "stream(terms f(i))");
            return stream::of(series_of(a[0], "i"));
        }
        node_error(*n.kids[0], ErrorCode::parse_error, "unknown stream kind '" + kind + "'; " + usage);
    }

    Value make_distribution(const Node &n)
    {
        const std::string usage = "dist(stpetersburg | levels | cauchy | table u:p, ...)";
        need(n, !n.kids.empty() && n.kids[0]->kind == NodeKind::ident, usage);
        const std::string &kind = n.kids[0]->text;
        if (kind == "stpetersburg") {
            need(n, n.kids.size() == 1, "dist(stpetersburg)");
            return dist::st_petersburg();
        }
        if (kind == "levels") {
            need(n, n.kids.size() == 1, "dist(levels)");
            return dist::geometric_levels();
        }
        if (kind == "cauchy") {
            need(n, n.kids.size() == 1, "dist(cauchy)");
            return dist::cauchy();
        }
        if (kind == "table") {
            std::vector<NodePtr> pairs(n.kids.begin() + 1, n.kids.end());
            if (pairs.size() == 1 && pairs[0]->kind == NodeKind::map) {
                pairs = pairs[0]->kids;
            }
            need(n, !pairs.empty(), "dist(table u:p, ...)");
            std::map<BigInt, Rational> t;
            for (const auto &p : pairs) {
                if (p->kind != NodeKind::pair) {
                    node_error(*p, ErrorCode::invalid_argument, "expected u:p");
                }
                const BigInt u = integer(*p->kids[0]);
                if (t.count(u)) {
                    node_error(*p, ErrorCode::invalid_argument, "level " + u.get_str() + " listed twice");
                }
                t[u] = rational(*p->kids[1]);
            }
            return dist::table(t);
        }
        node_error(*n.kids[0], ErrorCode::parse_error, "unknown distribution '" + kind + "'; " + usage);
    }

    Value make_world(const Node &n)
    {
        Args a = split(n, {"rho", "deltas"});
        need(n, a.positional.size() == 1 && a.positional[0]->kind == NodeKind::ident && a.ranges.empty(),
             "world(cube | sphere, rho=f(r), deltas=[r:c, ...])");
        SpatialDensity d;
        const std::string &g = a.positional[0]->text;
        if (g == "cube") {
            d.geometry = Geometry::cube;
        } else if (g == "sphere") {
            d.geometry = Geometry::sphere;
        } else {
            node_error(*a.positional[0], ErrorCode::parse_error, "geometry must be cube or sphere");
        }
        if (auto it = a.named.find("rho"); it != a.named.end()) {
            d.rho = func_of(it->second, "r");
        }
        if (auto it = a.named.find("deltas"); it != a.named.end()) {
            const Node &l = *it->second;
            if (l.kind != NodeKind::list && l.kind != NodeKind::map) {
                node_error(l, ErrorCode::invalid_argument, "deltas must be a list [r:c, ...]");
            }
            for (const auto &p : l.kids) {
                if (p->kind != NodeKind::pair) {
                    node_error(*p, ErrorCode::invalid_argument, "expected r:c");
                }
                d.deltas.emplace_back(rational(*p->kids[0]), rational(*p->kids[1]));
            }
            delta_total(d);
        }
        return d;
    }

    Value make_process(const Node &n)
    {
        Args a = split(n, {"base", "rate", "start"});
        const std::string usage = "proc(flips base=b rate=r start=t | decay rate=r start=t | harmonic rate=r start=t)";
        need(n, a.positional.size() == 1 && a.positional[0]->kind == NodeKind::ident && a.ranges.empty(), usage);
        const std::string &kind = a.positional[0]->text;
        auto opt = [&](const char *name, const ExactScalar &dflt) {
            auto it = a.named.find(name);
            return it == a.named.end() ? dflt : scalar(*it->second);
        };
        const ExactScalar rate = opt("rate", ExactScalar(1));
        const ExactScalar start = opt("start", ExactScalar(0));
        if (kind == "flips") {
            Rational base = 2;
            if (auto it = a.named.find("base"); it != a.named.end()) {
                base = rational(*it->second);
            }
            if (base <= 1) {
                node_error(n, ErrorCode::invalid_argument, "base must exceed 1");
            }
            return proc::flips(base, rate, start);
        }
        if (a.named.count("base")) {
            node_error(*a.named["base"], ErrorCode::parse_error, "base applies to flip processes only");
        }
        if (kind == "decay") {
            return proc::decay(rate, start);
        }
        if (kind == "harmonic") {
            return proc::harmonic(rate, start);
        }
        node_error(*a.positional[0], ErrorCode::parse_error, "unknown process '" + kind + "'; " + usage);
    }

    // a*var + b with rational a, b
    std::optional<std::pair<Rational, Rational>> linear(const Node &n, const std::string &var)
    {
        using L = std::pair<Rational, Rational>;
        if (!mentions(n, var)) {
            const Hyperreal h = number(n);
            if (h.is_symbolic() && !h.is_periodic() && h.symbolic().is_rational_constant()) {
                return L{Rational(0), h.symbolic().constant_value().rational_part()};
            }
            return std::nullopt;
        }
        switch (n.kind) {
            case NodeKind::ident: return L{Rational(1), Rational(0)};
            case NodeKind::neg: {
                auto x = linear(*n.kids[0], var);
                if (!x) return std::nullopt;
                return L{Rational(-x->first), Rational(-x->second)};
            }
            case NodeKind::binary: {
                auto x = linear(*n.kids[0], var);
                auto y = linear(*n.kids[1], var);
                if (!x || !y) return std::nullopt;
                if (n.text == "+") return L{Rational(x->first + y->first), Rational(x->second + y->second)};
                if (n.text == "-") return L{Rational(x->first - y->first), Rational(x->second - y->second)};
                if (n.text == "*") {
                    if (x->first == 0) return L{Rational(x->second * y->first), Rational(x->second * y->second)};
                    if (y->first == 0) return L{Rational(y->second * x->first), Rational(y->second * x->second)};
                    return std::nullopt;
                }
                if (n.text == "/" && y->first == 0 && y->second != 0) {
                    return L{Rational(x->first / y->second), Rational(x->second / y->second)};
                }
                return std::nullopt;
            }
            default: return std::nullopt;
        }
    }

    SeriesPtr generic_series(const Node &n, const std::string &var)
    {
        auto keep = std::make_shared<Node>(n);
        return series::generator(render(n), [keep, var](const BigInt &i) -> Element {
            return eval_detail::element_at(*keep, var, i);
        });
    }

    SeriesPtr series_term(const Node &n, const std::string &var)
    {
        if (!mentions(n, var)) {
            return series::constant(scalar(n));
        }
        switch (n.kind) {
            case NodeKind::ident: return series::power(1);
            case NodeKind::neg: return series::scale(ExactScalar(-1), series_term(*n.kids[0], var));
            case NodeKind::binary: {
                const Node &l = *n.kids[0];
                const Node &r = *n.kids[1];
                if (n.text == "+") return series::add(series_term(l, var), series_term(r, var));
                if (n.text == "-") {
                    return series::add(series_term(l, var), series::scale(ExactScalar(-1), series_term(r, var)));
                }
                if (n.text == "*") {
                    if (!mentions(l, var)) return series::scale(scalar(l), series_term(r, var));
                    if (!mentions(r, var)) return series::scale(scalar(r), series_term(l, var));
                    return series::product(series_term(l, var), series_term(r, var));
                }
                if (n.text == "/" && !mentions(r, var)) {
                    const ExactScalar d = scalar(r);
                    if (scalar_sign(d) == 0) {
                        node_error(n, ErrorCode::division_by_possibly_zero, "division by zero");
                    }
                    return series::scale(d.reciprocal(), series_term(l, var));
                }
                if (n.text == "^") {
                    if (!mentions(r, var)) {
                        const Hyperreal k = number(r);
                        if (k.is_symbolic() && !k.is_periodic() && k.symbolic().is_rational_constant()) {
                            const Rational q = k.symbolic().constant_value().rational_part();
                            if (is_integer(q) && q >= 1 && q <= 32) {
                                if (eval_detail::is_ident(l, var)) {
                                    return series::power(q.get_num().get_ui());
                                }
                                SeriesPtr base = series_term(l, var);
                                SeriesPtr acc = base;
                                for (long j = 1; j < q.get_num().get_si(); ++j) {
                                    acc = series::product(acc, base);
                                }
                                return acc;
                            }
                        }
                        break;
                    }
                    if (mentions(l, var)) {
                        break;
                    }
                    auto lin = linear(r, var);
                    if (!lin || !is_integer(lin->first)) {
                        break;
                    }
                    const ExactScalar b = scalar(l);
                    const long a = lin->first.get_num().get_si();
                    if (b == ExactScalar::e()) {
                        return series::scale(ExactScalar::exp_rational(lin->second),
                                             series::exp_power(ExactScalar(lin->first)));
                    }
                    if (b.is_rational() && b.rational_part() != 0 && is_integer(lin->second)) {
                        const Rational q = b.rational_part();
                        const Rational c = rational_pow(q, lin->second.get_num().get_si());
                        SeriesPtr g = series::geometric(rational_pow(q, a));
                        return c == 1 ? g : series::scale(ExactScalar(c), g);
                    }
                }
                break;
            }
            case NodeKind::call: {
                if (n.text == "exp" && n.kids.size() == 1) {
                    if (auto lin = linear(*n.kids[0], var)) {
                        return series::scale(ExactScalar::exp_rational(lin->second),
                                             series::exp_power(ExactScalar(lin->first)));
                    }
                }
                break;
            }
            default: break;
        }
        return generic_series(n, var);
    }

    FuncPtr generic_func(const Node &n, const std::string &var)
    {
        auto keep = std::make_shared<Node>(n);
        std::string label = render(n);
        if (var != "x") {
            label += " [" + var + "]";
        }
        return fn::custom(label, [keep, var](double x) { return element_double(eval_detail::element_at(*keep, var, x)); });
    }

    FuncPtr func_term(const Node &n, const std::string &var)
    {
        if (!mentions(n, var)) {
            return fn::constant(scalar(n));
        }
        switch (n.kind) {
            case NodeKind::ident: return fn::x();
            case NodeKind::neg: return fn::scale(ExactScalar(-1), func_term(*n.kids[0], var));
            case NodeKind::binary: {
                const Node &l = *n.kids[0];
                const Node &r = *n.kids[1];
                if (n.text == "+") return fn::add(func_term(l, var), func_term(r, var));
                if (n.text == "-") return fn::add(func_term(l, var), fn::scale(ExactScalar(-1), func_term(r, var)));
                if (n.text == "*") {
                    if (!mentions(l, var)) return fn::scale(scalar(l), func_term(r, var));
                    if (!mentions(r, var)) return fn::scale(scalar(r), func_term(l, var));
                    return fn::mul(func_term(l, var), func_term(r, var));
                }
                if (n.text == "/") {
                    if (!mentions(r, var)) {
                        const ExactScalar d = scalar(r);
                        if (scalar_sign(d) == 0) {
                            node_error(n, ErrorCode::division_by_possibly_zero, "division by zero");
                        }
                        return fn::scale(d.reciprocal(), func_term(l, var));
                    }
                    FuncPtr den;
                    if (eval_detail::is_one_plus_square(r, var)) {
                        den = fn::inv_quad();
                    } else if (eval_detail::is_ident(r, var)) {
                        den = fn::power(-1);
                    } else if (r.kind == NodeKind::binary && r.text == "^" && eval_detail::is_ident(*r.kids[0], var) &&
                               !mentions(*r.kids[1], var)) {
                        den = fn::power(-rational(*r.kids[1]));
                    } else {
                        break;
                    }
                    if (!mentions(l, var)) {
                        const ExactScalar c = scalar(l);
                        return c == ExactScalar(1) ? den : fn::scale(c, den);
                    }
                    return fn::mul(func_term(l, var), den);
                }
                if (n.text == "^") {
                    if (eval_detail::is_ident(l, var) && !mentions(r, var)) {
                        const Rational p = rational(r);
                        return p == 0 ? fn::constant(ExactScalar(1)) : fn::power(p);
                    }
                    if (!mentions(l, var) && scalar(l) == ExactScalar::e()) {
                        if (auto lin = linear(r, var)) {
                            return exp_func(*lin);
                        }
                    }
                }
                break;
            }
            case NodeKind::call: {
                if (n.kids.size() != 1) {
                    break;
                }
                const Node &arg = *n.kids[0];
                if (n.text == "exp") {
                    if (auto lin = linear(arg, var)) {
                        return exp_func(*lin);
                    }
                }
                if (n.text == "sqrt" && eval_detail::is_ident(arg, var)) {
                    return fn::power(make_rational(1, 2));
                }
                if (n.text == "log" && eval_detail::is_ident(arg, var)) {
                    return fn::log();
                }
                if (n.text == "atan" && eval_detail::is_ident(arg, var)) {
                    return fn::atan();
                }
                if (n.text == "sin" || n.text == "cos") {
                    auto lin = linear(arg, var);
                    if (lin && lin->second == 0 && lin->first != 0) {
                        return n.text == "sin" ? fn::sin(lin->first) : fn::cos(lin->first);
                    }
                }
                break;
            }
            default: break;
        }
        return generic_func(n, var);
    }

    static FuncPtr exp_func(const std::pair<Rational, Rational> &lin)
    {
        FuncPtr g = lin.first == 0 ? fn::constant(ExactScalar(1)) : fn::exp(lin.first);
        return lin.second == 0 ? g : fn::scale(ExactScalar::exp_rational(lin.second), g);
    }
};

// "name = expr" lines; '#' starts a comment line.
inline Definitions parse_definitions(const std::string &text)
{
    Definitions defs;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        try {
            if (eq == std::string::npos) {
                fail(ErrorCode::parse_error, "expected 'name = expression'");
            }
            auto name_toks = lex(line.substr(0, eq));
            if (name_toks.size() != 2 || name_toks[0].kind != Tok::ident) {
                fail(ErrorCode::parse_error, "left side must be a single name");
            }
            const std::string name = name_toks[0].text;
            static const char *reserved[] = {"w", "omega", "pi", "e", "inf"};
            for (const char *r : reserved) {
                if (name == r) {
                    fail(ErrorCode::parse_error, "'" + name + "' is reserved");
                }
            }
            if (defs.count(name)) {
                fail(ErrorCode::parse_error, "'" + name + "' defined twice");
            }
            defs[name] = parse(line.substr(eq + 1));
        } catch (const Error &e) {
            fail(e.code(), "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return defs;
}

} // namespace hyperreal::dsl
