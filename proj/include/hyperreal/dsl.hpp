#pragma once

// Expression language for the command line: lexer, parser and renderer.
//
//   sum(i=1..inf, 2^-i)        int(x=0..1, 1/x, singular=0)
//   set(evens | odds)          stream(geom 1 2)     dist(table 1:1/2, 3:1/2)
//   world(cube, rho=3, deltas=[1:7])               proc(flips base=2 rate=1)
//
// Call arguments may be separated by commas or by plain juxtaposition.

#include <algorithm>
#include <cctype>
#include <memory>
#include <string>
#include <vector>

#include <hyperreal/error.hpp>

namespace hyperreal::dsl
{

enum class Tok { num, ident, op, lparen, rparen, lbrace, rbrace, lbracket, rbracket, comma, dotdot, equals, colon, end };

struct Token
{
    Tok kind = Tok::end;
    std::string text;
    std::size_t pos = 0; // byte offset
    std::size_t end = 0;
};

[[noreturn]] inline void syntax_error(std::size_t begin, std::size_t end, const std::string &msg)
{
    fail(ErrorCode::parse_error, "at " + std::to_string(begin + 1) + "-" + std::to_string(std::max(end, begin + 1)) +
                                     ": " + msg);
}

inline std::vector<Token> lex(const std::string &s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    auto is_digit = [&](std::size_t k) { return k < s.size() && s[k] >= '0' && s[k] <= '9'; };
    auto starts = [&](std::size_t k, const char *u) { return s.compare(k, std::char_traits<char>::length(u), u) == 0; };
    while (i < s.size()) {
        const char c = s[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        Token t;
        t.pos = i;
        if (is_digit(i)) {
            std::size_t j = i;
            while (is_digit(j)) {
                ++j;
            }
            if (j < s.size() && s[j] == '.' && is_digit(j + 1)) {
                ++j;
                while (is_digit(j)) {
                    ++j;
                }
            }
            t.kind = Tok::num;
            t.text = s.substr(i, j - i);
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) {
                ++j;
            }
            t.kind = Tok::ident;
            t.text = s.substr(i, j - i);
            i = j;
        } else if (starts(i, "ω")) {
            t.kind = Tok::ident;
            t.text = "w";
            i += std::char_traits<char>::length("ω");
        } else if (starts(i, "∞")) {
            t.kind = Tok::ident;
            t.text = "inf";
            i += std::char_traits<char>::length("∞");
        } else if (starts(i, "..")) {
            t.kind = Tok::dotdot;
            t.text = "..";
            i += 2;
        } else {
            t.text = std::string(1, c);
            switch (c) {
                case '+': case '-': case '*': case '/': case '^': case '|': case '&': case '\\': case '~':
                    t.kind = Tok::op;
                    break;
                case '(': t.kind = Tok::lparen; break;
                case ')': t.kind = Tok::rparen; break;
                case '{': t.kind = Tok::lbrace; break;
                case '}': t.kind = Tok::rbrace; break;
                case '[': t.kind = Tok::lbracket; break;
                case ']': t.kind = Tok::rbracket; break;
                case ',': t.kind = Tok::comma; break;
                case '=': t.kind = Tok::equals; break;
                case ':': t.kind = Tok::colon; break;
                default: syntax_error(i, i + 1, "unexpected character '" + t.text + "'");
            }
            ++i;
        }
        t.end = i;
        out.push_back(t);
    }
    Token e;
    e.kind = Tok::end;
    e.pos = e.end = s.size();
    out.push_back(e);
    return out;
}

enum class NodeKind { num, ident, call, binary, neg, complement, range, named, pair, map, list };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node
{
    NodeKind kind = NodeKind::num;
    std::string text; // lexeme, identifier, call name, operator, range variable or option name
    std::vector<NodePtr> kids;
    std::size_t pos = 0;
    std::size_t end = 0;
};

inline NodePtr make_node(NodeKind k, std::string text, std::vector<NodePtr> kids, std::size_t pos, std::size_t end)
{
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->text = std::move(text);
    n->kids = std::move(kids);
    n->pos = pos;
    n->end = end;
    return n;
}

// Structural equality; source positions are ignored.
inline bool same_ast(const Node &a, const Node &b)
{
    if (a.kind != b.kind || a.text != b.text || a.kids.size() != b.kids.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.kids.size(); ++i) {
        if (!same_ast(*a.kids[i], *b.kids[i])) {
            return false;
        }
    }
    return true;
}

inline int binary_precedence(const std::string &op)
{
    if (op == "|") return 1;
    if (op == "&") return 2;
    if (op == "\\") return 3;
    if (op == "+" || op == "-") return 4;
    if (op == "*" || op == "/") return 5;
    if (op == "^") return 7;
    return 0;
}

inline constexpr int unary_precedence = 6;
inline constexpr int atom_precedence = 8;

inline int precedence(const Node &n)
{
    switch (n.kind) {
        case NodeKind::binary: return binary_precedence(n.text);
        case NodeKind::neg:
        case NodeKind::complement: return unary_precedence;
        default: return atom_precedence;
    }
}

class Parser
{
public:
    explicit Parser(const std::string &src) : toks_(lex(src)) {}

    NodePtr parse_single()
    {
        NodePtr n = expr();
        if (peek().kind != Tok::end) {
            syntax_error(peek().pos, peek().end, "unexpected '" + peek().text + "'");
        }
        return n;
    }

    // Expressions separated by whitespace or commas, as in "w^2/2 w".
    std::vector<NodePtr> parse_many()
    {
        std::vector<NodePtr> out;
        while (peek().kind != Tok::end) {
            out.push_back(expr());
            if (peek().kind == Tok::comma) {
                ++k_;
            }
        }
        return out;
    }

private:
    std::vector<Token> toks_;
    std::size_t k_ = 0;

    const Token &peek(std::size_t ahead = 0) const { return toks_[std::min(k_ + ahead, toks_.size() - 1)]; }

    bool is_op(const char *op) const { return peek().kind == Tok::op && peek().text == op; }

    Token expect(Tok kind, const char *what)
    {
        if (peek().kind != kind) {
            const Token &t = peek();
            syntax_error(t.pos, t.end, std::string("expected ") + what +
                                           (t.kind == Tok::end ? " at end of input" : " before '" + t.text + "'"));
        }
        return toks_[k_++];
    }

    NodePtr binary_level(int level)
    {
        if (level > 5) {
            return unary();
        }
        NodePtr lhs = binary_level(level + 1);
        while (peek().kind == Tok::op && binary_precedence(peek().text) == level) {
            const std::string op = toks_[k_++].text;
            NodePtr rhs = binary_level(level + 1);
            lhs = make_node(NodeKind::binary, op, {lhs, rhs}, lhs->pos, rhs->end);
        }
        return lhs;
    }

    NodePtr expr() { return binary_level(1); }

    NodePtr unary()
    {
        if (is_op("-") || is_op("~")) {
            const Token t = toks_[k_++];
            NodePtr x = unary();
            return make_node(t.text == "-" ? NodeKind::neg : NodeKind::complement, "", {x}, t.pos, x->end);
        }
        NodePtr base = primary();
        if (is_op("^")) {
            ++k_;
            NodePtr e = unary();
            return make_node(NodeKind::binary, "^", {base, e}, base->pos, e->end);
        }
        return base;
    }

    bool starts_item() const
    {
        switch (peek().kind) {
            case Tok::num:
            case Tok::ident:
            case Tok::lparen:
            case Tok::lbrace:
            case Tok::lbracket: return true;
            case Tok::op: return peek().text == "-" || peek().text == "~";
            default: return false;
        }
    }

    // name=lo..hi, name=value, key:value or a plain expression
    NodePtr item()
    {
        if (peek().kind == Tok::ident && peek(1).kind == Tok::equals) {
            const Token name = toks_[k_++];
            ++k_;
            NodePtr v = expr();
            if (peek().kind == Tok::dotdot) {
                ++k_;
                NodePtr hi = expr();
                return make_node(NodeKind::range, name.text, {v, hi}, name.pos, hi->end);
            }
            return make_node(NodeKind::named, name.text, {v}, name.pos, v->end);
        }
        NodePtr v = expr();
        if (peek().kind == Tok::colon) {
            ++k_;
            NodePtr w = expr();
            return make_node(NodeKind::pair, "", {v, w}, v->pos, w->end);
        }
        return v;
    }

    std::vector<NodePtr> items(Tok close, const char *what)
    {
        std::vector<NodePtr> out;
        while (peek().kind != close) {
            if (!starts_item()) {
                expect(close, what);
            }
            out.push_back(item());
            if (peek().kind == Tok::comma) {
                ++k_;
                if (!starts_item()) {
                    syntax_error(peek().pos, peek().end, "expected an argument after ','");
                }
            }
        }
        return out;
    }

    NodePtr primary()
    {
        const Token t = peek();
        switch (t.kind) {
            case Tok::num: ++k_; return make_node(NodeKind::num, t.text, {}, t.pos, t.end);
            case Tok::ident: {
                ++k_;
                if (peek().kind == Tok::lparen) {
                    ++k_;
                    auto args = items(Tok::rparen, "')'");
                    const Token close = expect(Tok::rparen, "')'");
                    return make_node(NodeKind::call, t.text, std::move(args), t.pos, close.end);
                }
                return make_node(NodeKind::ident, t.text, {}, t.pos, t.end);
            }
            case Tok::lparen: {
                ++k_;
                NodePtr x = expr();
                expect(Tok::rparen, "')'");
                return x;
            }
            case Tok::lbrace: {
                ++k_;
                auto xs = items(Tok::rbrace, "'}'");
                const Token close = expect(Tok::rbrace, "'}'");
                return make_node(NodeKind::map, "", std::move(xs), t.pos, close.end);
            }
            case Tok::lbracket: {
                ++k_;
                auto xs = items(Tok::rbracket, "']'");
                const Token close = expect(Tok::rbracket, "']'");
                return make_node(NodeKind::list, "", std::move(xs), t.pos, close.end);
            }
            case Tok::end: syntax_error(t.pos, t.end, "unexpected end of input");
            default: syntax_error(t.pos, t.end, "unexpected '" + t.text + "'");
        }
    }
};

inline NodePtr parse(const std::string &text)
{
    return Parser(text).parse_single();
}

inline std::vector<NodePtr> parse_many(const std::string &text)
{
    return Parser(text).parse_many();
}

inline std::string render(const Node &n);

namespace detail
{

inline std::string render_list(const std::vector<NodePtr> &xs)
{
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        s += (i ? ", " : "") + render(*xs[i]);
    }
    return s;
}

inline std::string wrap(const Node &n, bool paren)
{
    return paren ? "(" + render(n) + ")" : render(n);
}

} // namespace detail

// Canonical text; parse(render(t)) is structurally equal to t.
inline std::string render(const Node &n)
{
    switch (n.kind) {
        case NodeKind::num:
        case NodeKind::ident: return n.text;
        case NodeKind::call: return n.text + "(" + detail::render_list(n.kids) + ")";
        case NodeKind::binary: {
            const int p = binary_precedence(n.text);
            const Node &l = *n.kids[0];
            const Node &r = *n.kids[1];
            if (n.text == "^") {
                // the base is a primary; the exponent is unary-level
                return detail::wrap(l, precedence(l) <= p) + "^" + detail::wrap(r, precedence(r) < unary_precedence);
            }
            const std::string sep = (p == 5) ? n.text : " " + n.text + " ";
            return detail::wrap(l, precedence(l) < p) + sep + detail::wrap(r, precedence(r) <= p);
        }
        case NodeKind::neg: return "-" + detail::wrap(*n.kids[0], precedence(*n.kids[0]) < unary_precedence);
        case NodeKind::complement: return "~" + detail::wrap(*n.kids[0], precedence(*n.kids[0]) < unary_precedence);
        case NodeKind::range: return n.text + "=" + render(*n.kids[0]) + ".." + render(*n.kids[1]);
        case NodeKind::named: return n.text + "=" + render(*n.kids[0]);
        case NodeKind::pair: return render(*n.kids[0]) + ":" + render(*n.kids[1]);
        case NodeKind::map: return "{" + detail::render_list(n.kids) + "}";
        case NodeKind::list: return "[" + detail::render_list(n.kids) + "]";
    }
    return "?";
}

} // namespace hyperreal::dsl
