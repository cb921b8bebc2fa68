#include "garsamp/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace garsamp {

namespace {

template <class T>
struct Dual {
    T v;
    T d;
};

double primal(double a) { return a; }
template <class T>
double primal(const Dual<T>& a) { return primal(a.v); }

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T>
Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T>
Dual<T> operator*(double s, const Dual<T>& a) { return {s * a.v, s * a.d}; }
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

double constant(double c, double) { return c; }
template <class T>
Dual<T> constant(double c, const Dual<T>& like) { return {constant(c, like.v), constant(0.0, like.d)}; }

double exp_(double a) { return std::exp(a); }
double log_(double a) { return std::log(a); }
double cosh_(double a) { return std::cosh(a); }
double sinh_(double a) { return std::sinh(a); }
double sqrt_(double a) { return std::sqrt(a); }
double pow_(double a, double p) { return std::pow(a, p); }

template <class T>
Dual<T> exp_(const Dual<T>& a) {
    T e = exp_(a.v);
    return {e, a.d * e};
}
template <class T>
Dual<T> log_(const Dual<T>& a) { return {log_(a.v), a.d / a.v}; }
template <class T>
Dual<T> cosh_(const Dual<T>& a) { return {cosh_(a.v), a.d * sinh_(a.v)}; }
template <class T>
Dual<T> sinh_(const Dual<T>& a) { return {sinh_(a.v), a.d * cosh_(a.v)}; }
template <class T>
Dual<T> sqrt_(const Dual<T>& a) {
    T s = sqrt_(a.v);
    return {s, a.d / (2.0 * s)};
}
template <class T>
Dual<T> pow_(const Dual<T>& a, double p) { return {pow_(a.v, p), a.d * (p * pow_(a.v, p - 1))}; }

}  // namespace

struct Expression::Node {
    enum class Op { num, var, add, sub, mul, div, neg, pow, exp, log, cosh, sinh, sqrt, abs };
    Op op;
    double value = 0.0;
    std::unique_ptr<Node> a, b;
};

namespace {

using Node = Expression::Node;
using Op = Node::Op;

template <class T>
T eval(const Node& n, const T& x) {
    switch (n.op) {
        case Op::num: return constant(n.value, x);
        case Op::var: return x;
        case Op::add: return eval(*n.a, x) + eval(*n.b, x);
        case Op::sub: return eval(*n.a, x) - eval(*n.b, x);
        case Op::mul: return eval(*n.a, x) * eval(*n.b, x);
        case Op::div: {
            T den = eval(*n.b, x);
            if (primal(den) == 0) throw DomainError("division by zero");
            return eval(*n.a, x) / den;
        }
        case Op::neg: return -eval(*n.a, x);
        case Op::pow: {
            T base = eval(*n.a, x);
            double p = n.value;
            if (primal(base) < 0 && p != std::floor(p))
                throw DomainError("non-integer power of a negative number");
            if (primal(base) == 0 && p < 1) {
                if (p < 0) throw DomainError("negative power of zero");
            }
            return pow_(base, p);
        }
        case Op::exp: return exp_(eval(*n.a, x));
        case Op::log: {
            T u = eval(*n.a, x);
            if (!(primal(u) > 0)) throw DomainError("log of a non-positive number");
            return log_(u);
        }
        case Op::cosh: return cosh_(eval(*n.a, x));
        case Op::sinh: return sinh_(eval(*n.a, x));
        case Op::sqrt: {
            T u = eval(*n.a, x);
            if (primal(u) < 0) throw DomainError("sqrt of a negative number");
            return sqrt_(u);
        }
        case Op::abs: {
            T u = eval(*n.a, x);
            double s = primal(u) > 0 ? 1.0 : (primal(u) < 0 ? -1.0 : 0.0);
            if constexpr (std::is_same_v<T, double>) return std::abs(u);
            else return s * u;
        }
    }
    return x;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    std::unique_ptr<Node> parse() {
        auto n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos_); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> a = nullptr,
                                      std::unique_ptr<Node> b = nullptr, double v = 0.0) {
        auto n = std::make_unique<Node>();
        n->op = op;
        n->a = std::move(a);
        n->b = std::move(b);
        n->value = v;
        return n;
    }

    std::unique_ptr<Node> expr() {
        auto n = term();
        while (true) {
            if (eat('+')) n = make(Op::add, std::move(n), term());
            else if (eat('-')) n = make(Op::sub, std::move(n), term());
            else return n;
        }
    }

    std::unique_ptr<Node> term() {
        auto n = unary();
        while (true) {
            if (eat('*')) n = make(Op::mul, std::move(n), unary());
            else if (eat('/')) n = make(Op::div, std::move(n), unary());
            else return n;
        }
    }

    std::unique_ptr<Node> unary() {
        if (eat('-')) return make(Op::neg, unary());
        if (eat('+')) return unary();
        return power();
    }

    std::unique_ptr<Node> power() {
        auto n = primary();
        if (eat('^')) return make(Op::pow, std::move(n), nullptr, exponent());
        return n;
    }

    // Signed numeric literal, right-associative for chained powers.
    double exponent() {
        double sign = 1.0;
        while (true) {
            if (eat('-')) sign = -sign;
            else if (eat('+')) continue;
            else break;
        }
        double v;
        if (eat('(')) {
            v = exponent();
            if (!eat(')')) fail("expected ')'");
        } else {
            skip();
            if (pos_ >= s_.size() || !(std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
                fail("exponent must be a number");
            v = number();
        }
        v *= sign;
        if (eat('^')) v = std::pow(v, exponent());
        return v;
    }

    double number() {
        const char* start = s_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(start, &end);
        if (end == start) fail("expected a number");
        pos_ += static_cast<std::size_t>(end - start);
        return v;
    }

    std::unique_ptr<Node> primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return make(Op::num, nullptr, nullptr, number());
        if (eat('(')) {
            auto n = expr();
            if (!eat(')')) fail("expected ')'");
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            if (name == "x") return make(Op::var);
            static const std::pair<const char*, Op> funcs[] = {
                {"exp", Op::exp},   {"log", Op::log},   {"cosh", Op::cosh},
                {"sinh", Op::sinh}, {"sqrt", Op::sqrt}, {"abs", Op::abs}};
            for (const auto& [fname, op] : funcs) {
                if (name != fname) continue;
                if (!eat('(')) fail("expected '(' after " + name);
                auto arg = expr();
                if (!eat(')')) fail("expected ')'");
                return make(op, std::move(arg));
            }
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        fail("unexpected character");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

double Expression::operator()(double x) const { return eval(*root_, x); }

Jet Expression::jet(double x) const {
    using D2 = Dual<Dual<double>>;
    D2 seed{{x, 1.0}, {1.0, 0.0}};
    D2 r = eval(*root_, seed);
    return Jet{r.v.v, r.v.d, r.d.d};
}

JetFn Expression::as_jet_fn() const {
    return [root = root_](double x) {
        using D2 = Dual<Dual<double>>;
        D2 r = eval(*root, D2{{x, 1.0}, {1.0, 0.0}});
        return Jet{r.v.v, r.v.d, r.d.d};
    };
}

Expression parse_expression(const std::string& text) {
    Parser p(text);
    std::shared_ptr<const Node> root = p.parse();
    return Expression(std::move(root), text);
}

}  // namespace garsamp
