#include "rdsym/expr.hpp"

#include <cctype>
#include <string>

namespace rdsym {

namespace {

struct Parser {
    std::string_view src;
    std::size_t pos = 0;
    const SymbolTable& tab;

    explicit Parser(std::string_view s, const SymbolTable& t) : src(s), tab(t) {}

    void skip_ws()
    {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool eof()
    {
        skip_ws();
        return pos >= src.size();
    }

    char peek()
    {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    bool accept(char c)
    {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos);
    }

    Expr parse_expr()
    {
        Expr lhs = parse_term();
        for (;;) {
            char c = peek();
            if (c == '+') {
                ++pos;
                lhs = add(lhs, parse_term());
            } else if (c == '-') {
                ++pos;
                lhs = sub(lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_term()
    {
        Expr lhs = parse_unary();
        for (;;) {
            char c = peek();
            if (c == '*') {
                ++pos;
                lhs = mul(lhs, parse_unary());
            } else if (c == '/') {
                ++pos;
                lhs = div(lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_unary()
    {
        if (accept('-')) return neg(parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power()
    {
        Expr base = parse_primary();
        if (peek() == '^') {
            ++pos;
            // exponent may carry a sign: u^-2
            Expr e = accept('-') ? neg(parse_power()) : (accept('+'), parse_power());
            return pow(base, e);
        }
        return base;
    }

    Expr parse_primary()
    {
        char c = peek();
        if (c == '(') {
            ++pos;
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw ParseError("unexpected character", pos);
    }

    Expr parse_number()
    {
        skip_ws();
        std::size_t start = pos;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
        Integer ip(std::string(src.substr(start, pos - start)));
        Rational value(ip);
        if (pos < src.size() && src[pos] == '.') {
            ++pos;
            std::size_t fs = pos;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
            if (pos == fs) throw ParseError("expected digits after decimal point", pos);
            Integer frac(std::string(src.substr(fs, pos - fs)));
            Integer den = 1;
            for (std::size_t i = fs; i < pos; ++i) den *= 10;
            value += Rational(frac, den);
        }
        return num(value);
    }

    Expr parse_ident()
    {
        skip_ws();
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        std::string name(src.substr(start, pos - start));

        int primes = 0;
        while (pos < src.size() && src[pos] == '\'') {
            ++primes;
            ++pos;
        }

        if (peek() == '(') {
            ++pos;
            Expr arg = parse_expr();
            expect(')');
            if (primes == 0) {
                if (name == "exp") return exp_(arg);
                if (name == "log") return log_(arg);
                if (name == "sin") return sin_(arg);
                if (name == "cos") return cos_(arg);
            } else if (name == "exp" || name == "log" || name == "sin" || name == "cos") {
                throw ParseError("derivative marks are only valid on opaque functions", start);
            }
            if (auto fid = tab.lookup_opaque(name)) return fun(*fid, arg, primes);
            throw UnknownSymbolError(name);
        }
        if (primes != 0) throw ParseError("derivative marks require a call: " + name, start);
        return resolve(name, start);
    }

    Expr resolve(const std::string& name, std::size_t at)
    {
        if (auto id = tab.lookup(name)) return sym(*id);
        if (auto did = tab.lookup_declared(name)) return atom(tab, *did, {});

        auto us = name.find('_');
        if (us != std::string::npos && us > 0 && us + 1 < name.size()) {
            std::string head = name.substr(0, us);
            std::string markers = name.substr(us + 1);
            std::vector<SymbolId> multi;
            if (parse_markers(markers, multi)) {
                if (auto base = tab.lookup(head)) {
                    if (tab.is_dependent_base(*base)) return sym(tab.jet(*base, multi));
                }
                if (auto did = tab.lookup_declared(head)) return atom(tab, *did, multi);
            }
        }
        (void)at;
        throw UnknownSymbolError(name);
    }

    bool parse_markers(const std::string& s, std::vector<SymbolId>& out)
    {
        std::size_t i = 0;
        while (i < s.size()) {
            if (s[i] == '_') {
                ++i;
                continue;
            }
            if (s[i] == 't') {
                out.push_back(tab.t());
                ++i;
            } else if (s[i] == 'x') {
                ++i;
                std::size_t d = i;
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
                if (d == i) return false;
                int mu = std::stoi(s.substr(d, i - d));
                if (mu < 1 || mu > tab.m()) return false;
                out.push_back(tab.x(mu));
            } else {
                return false;
            }
        }
        return !out.empty();
    }
};

}  // namespace

Expr parse(std::string_view src, const SymbolTable& tab)
{
    Parser p(src, tab);
    if (p.eof()) throw ParseError("empty expression", 0);
    Expr e = p.parse_expr();
    if (!p.eof()) throw ParseError("trailing input", p.pos);
    return e;
}

}  // namespace rdsym
