#include "expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fg {

namespace {

constexpr std::array<std::pair<std::string_view, Function>, 8> kFunctions{{
    {"sin", Function::Sin},
    {"cos", Function::Cos},
    {"tan", Function::Tan},
    {"sec", Function::Sec},
    {"exp", Function::Exp},
    {"log", Function::Log},
    {"sqrt", Function::Sqrt},
    {"abs", Function::Abs},
}};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ast::Symbol classify_symbol(std::string name) {
  if (name == "t") return {std::move(name), ast::Symbol::Kind::Time, 0};
  if (name.size() >= 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '9') {
    bool digits = true;
    for (std::size_t i = 2; i < name.size(); ++i) digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
    if (digits) {
      std::size_t index = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), index);
      return {std::move(name), ast::Symbol::Kind::State, index - 1};
    }
  }
  return {std::move(name), ast::Symbol::Kind::Param, 0};
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expression parse_all() {
    Expression e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) {
      fail({"operator", "end of input"}, "unexpected '" + std::string(1, src_[pos_]) + "'");
    }
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& detail) const {
    std::ostringstream msg;
    msg << "syntax error at byte " << pos_ << ": " << detail << "; expected one of:";
    for (std::size_t i = 0; i < expected.size(); ++i) msg << (i ? ", " : " ") << expected[i];
    throw ParseError(pos_, std::move(expected), msg.str());
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expression parse_expr() {
    Expression lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = Expression::binary(BinaryOp::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = Expression::binary(BinaryOp::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expression parse_term() {
    Expression lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expression::binary(BinaryOp::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expression::binary(BinaryOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expression parse_unary() {
    if (accept('-')) return Expression::negate(parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expression parse_power() {
    Expression base = parse_primary();
    if (accept('^')) return Expression::binary(BinaryOp::Pow, base, parse_unary());
    return base;
  }

  Expression parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail({"number", "identifier", "'('", "'-'"}, "unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    if (accept('(')) {
      Expression inner = parse_expr();
      if (!accept(')')) fail({"')'"}, "unbalanced parenthesis");
      return inner;
    }
    fail({"number", "identifier", "'('", "'-'"}, "unexpected '" + std::string(1, c) + "'");
  }

  Expression parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = save;  // "2e" -> literal 2 followed by identifier e
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_) {
      pos_ = start;
      fail({"number"}, "malformed number literal");
    }
    return Expression::number(value);
  }

  Expression parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    skip_ws();
    const bool call = pos_ < src_.size() && src_[pos_] == '(';
    auto fn = function_from_name(name);
    if (call) {
      if (!fn) {
        pos_ = start;
        std::vector<std::string> expected;
        for (auto& [n, f] : kFunctions) expected.emplace_back(n);
        fail(std::move(expected), "unknown function '" + name + "'");
      }
      ++pos_;
      Expression arg = parse_expr();
      if (!accept(')')) fail({"')'"}, "unterminated call to " + name);
      return Expression::apply(*fn, arg);
    }
    if (fn) fail({"'('"}, "function '" + name + "' needs an argument");
    if (name == "pi") return Expression::constant(NamedConstant::Pi);
    if (name == "e") return Expression::constant(NamedConstant::E);
    return Expression::symbol(std::move(name));
  }
};

// ---------------------------------------------------------------------------
// Printer

int precedence(const Expression& e) {
  return std::visit(Overloaded{
                        [](const ast::Number& n) { return std::signbit(n.value) ? 3 : 5; },
                        [](const ast::Constant&) { return 5; },
                        [](const ast::Symbol&) { return 5; },
                        [](const ast::Apply&) { return 5; },
                        [](const ast::Negate&) { return 3; },
                        [](const ast::Binary& b) {
                          switch (b.op) {
                            case BinaryOp::Add:
                            case BinaryOp::Sub:
                              return 1;
                            case BinaryOp::Mul:
                            case BinaryOp::Div:
                              return 2;
                            case BinaryOp::Pow:
                              return 4;
                          }
                          return 0;
                        },
                    },
                    e.node());
}

void print(const Expression& e, std::string& out);

void print_min(const Expression& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print_number(double v, std::string& out) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void print(const Expression& e, std::string& out) {
  std::visit(Overloaded{
                 [&](const ast::Number& n) { print_number(n.value, out); },
                 [&](const ast::Constant& c) { out += c.which == NamedConstant::Pi ? "pi" : "e"; },
                 [&](const ast::Symbol& s) { out += s.name; },
                 [&](const ast::Apply& a) {
                   out += function_name(a.fn);
                   out += '(';
                   print(a.arg, out);
                   out += ')';
                 },
                 [&](const ast::Negate& n) {
                   out += '-';
                   print_min(n.arg, 3, out);
                 },
                 [&](const ast::Binary& b) {
                   switch (b.op) {
                     case BinaryOp::Add:
                     case BinaryOp::Sub:
                       print_min(b.lhs, 1, out);
                       out += b.op == BinaryOp::Add ? " + " : " - ";
                       print_min(b.rhs, 2, out);
                       break;
                     case BinaryOp::Mul:
                     case BinaryOp::Div:
                       print_min(b.lhs, 2, out);
                       out += b.op == BinaryOp::Mul ? '*' : '/';
                       print_min(b.rhs, 3, out);
                       break;
                     case BinaryOp::Pow:
                       print_min(b.lhs, 5, out);
                       out += '^';
                       print_min(b.rhs, 3, out);
                       break;
                   }
                 },
             },
             e.node());
}

// ---------------------------------------------------------------------------
// Evaluation

[[noreturn]] void domain_error(const Expression& where, const std::string& why) {
  throw Error(ErrorCode::Domain, "domain error in '" + to_string(where) + "': " + why);
}

double eval_node(const Expression& e, const Environment& env) {
  return std::visit(
      Overloaded{
          [](const ast::Number& n) { return n.value; },
          [](const ast::Constant& c) { return c.which == NamedConstant::Pi ? std::numbers::pi : std::numbers::e; },
          [&](const ast::Symbol& s) -> double {
            switch (s.kind) {
              case ast::Symbol::Kind::Time:
                if (env.time) return *env.time;
                break;
              case ast::Symbol::Kind::State:
                if (s.state_index < env.state.size()) return env.state[s.state_index];
                break;
              case ast::Symbol::Kind::Param:
                if (env.params) {
                  if (auto it = env.params->find(s.name); it != env.params->end()) return it->second;
                }
                break;
            }
            throw Error(ErrorCode::UnboundSymbol, "unbound symbol '" + s.name + "'");
          },
          [&](const ast::Apply& a) -> double {
            const double x = eval_node(a.arg, env);
            double r = 0.0;
            switch (a.fn) {
              case Function::Sin: r = std::sin(x); break;
              case Function::Cos: r = std::cos(x); break;
              case Function::Tan:
                if (std::cos(x) == 0.0) domain_error(e, "tangent pole");
                r = std::tan(x);
                break;
              case Function::Sec: {
                const double c = std::cos(x);
                if (c == 0.0) domain_error(e, "secant pole");
                r = 1.0 / c;
                break;
              }
              case Function::Exp: r = std::exp(x); break;
              case Function::Log:
                if (!(x > 0.0)) domain_error(e, "logarithm of non-positive value " + std::to_string(x));
                r = std::log(x);
                break;
              case Function::Sqrt:
                if (x < 0.0) domain_error(e, "square root of negative value " + std::to_string(x));
                r = std::sqrt(x);
                break;
              case Function::Abs: r = std::abs(x); break;
            }
            if (!std::isfinite(r) && std::isfinite(x)) domain_error(e, "non-finite result");
            return r;
          },
          [&](const ast::Negate& n) { return -eval_node(n.arg, env); },
          [&](const ast::Binary& b) -> double {
            const double l = eval_node(b.lhs, env);
            const double r = eval_node(b.rhs, env);
            double v = 0.0;
            switch (b.op) {
              case BinaryOp::Add: v = l + r; break;
              case BinaryOp::Sub: v = l - r; break;
              case BinaryOp::Mul: v = l * r; break;
              case BinaryOp::Div:
                if (r == 0.0) domain_error(e, "division by zero");
                v = l / r;
                break;
              case BinaryOp::Pow:
                if (l == 0.0 && r < 0.0) domain_error(e, "division by zero");
                v = std::pow(l, r);
                break;
            }
            if (!std::isfinite(v) && std::isfinite(l) && std::isfinite(r)) domain_error(e, "non-finite result");
            return v;
          },
      },
      e.node());
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view function_name(Function f) {
  for (auto& [name, fn] : kFunctions)
    if (fn == f) return name;
  return "?";
}

std::optional<Function> function_from_name(std::string_view name) {
  for (auto& [n, fn] : kFunctions)
    if (n == name) return fn;
  return std::nullopt;
}

Expression::Expression() : node_(std::make_shared<const Node>(ast::Number{0.0})) {}
Expression::Expression(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

Expression Expression::number(double v) { return Expression(Node(ast::Number{v})); }
Expression Expression::constant(NamedConstant c) { return Expression(Node(ast::Constant{c})); }
Expression Expression::symbol(std::string name) { return Expression(Node(classify_symbol(std::move(name)))); }
Expression Expression::apply(Function f, Expression arg) { return Expression(Node(ast::Apply{f, std::move(arg)})); }
Expression Expression::binary(BinaryOp op, Expression lhs, Expression rhs) {
  return Expression(Node(ast::Binary{op, std::move(lhs), std::move(rhs)}));
}
Expression Expression::negate(Expression arg) { return Expression(Node(ast::Negate{std::move(arg)})); }

bool Expression::is_number() const { return std::holds_alternative<ast::Number>(*node_); }
bool Expression::is_number(double v) const {
  auto* n = std::get_if<ast::Number>(node_.get());
  return n && n->value == v;
}
std::optional<double> Expression::as_number() const {
  if (auto* n = std::get_if<ast::Number>(node_.get())) return n->value;
  return std::nullopt;
}

Expression parse(std::string_view source) { return Parser(source).parse_all(); }

double eval(const Expression& e, const Environment& env) { return eval_node(e, env); }

double eval_at(const Expression& e, double t) {
  Environment env;
  env.time = t;
  return eval_node(e, env);
}

std::string to_string(const Expression& e) {
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Folding builders

Expression operator+(const Expression& a, const Expression& b) {
  if (a.is_number() && b.is_number()) return Expression::number(*a.as_number() + *b.as_number());
  if (a.is_number(0.0)) return b;
  if (b.is_number(0.0)) return a;
  return Expression::binary(BinaryOp::Add, a, b);
}

Expression operator-(const Expression& a, const Expression& b) {
  if (a.is_number() && b.is_number()) return Expression::number(*a.as_number() - *b.as_number());
  if (b.is_number(0.0)) return a;
  if (a.is_number(0.0)) return -b;
  return Expression::binary(BinaryOp::Sub, a, b);
}

Expression operator*(const Expression& a, const Expression& b) {
  if (a.is_number() && b.is_number()) return Expression::number(*a.as_number() * *b.as_number());
  if (a.is_number(0.0) || b.is_number(0.0)) return Expression::number(0.0);
  if (a.is_number(1.0)) return b;
  if (b.is_number(1.0)) return a;
  return Expression::binary(BinaryOp::Mul, a, b);
}

Expression operator/(const Expression& a, const Expression& b) {
  if (a.is_number() && b.is_number() && !b.is_number(0.0))
    return Expression::number(*a.as_number() / *b.as_number());
  if (a.is_number(0.0) && !b.is_number(0.0)) return Expression::number(0.0);
  if (b.is_number(1.0)) return a;
  return Expression::binary(BinaryOp::Div, a, b);
}

Expression operator-(const Expression& a) {
  if (auto v = a.as_number()) return Expression::number(-*v);
  return Expression::negate(a);
}

Expression pow(const Expression& base, const Expression& exponent) {
  if (exponent.is_number(1.0)) return base;
  if (exponent.is_number(0.0)) return Expression::number(1.0);
  if (base.is_number() && exponent.is_number() && !base.is_number(0.0))
    return Expression::number(std::pow(*base.as_number(), *exponent.as_number()));
  return Expression::binary(BinaryOp::Pow, base, exponent);
}

Expression apply(Function f, const Expression& arg) { return Expression::apply(f, arg); }

// ---------------------------------------------------------------------------

bool depends_on(const Expression& e, std::string_view symbol) {
  return std::visit(Overloaded{
                        [](const ast::Number&) { return false; },
                        [](const ast::Constant&) { return false; },
                        [&](const ast::Symbol& s) { return s.name == symbol; },
                        [&](const ast::Apply& a) { return depends_on(a.arg, symbol); },
                        [&](const ast::Negate& n) { return depends_on(n.arg, symbol); },
                        [&](const ast::Binary& b) { return depends_on(b.lhs, symbol) || depends_on(b.rhs, symbol); },
                    },
                    e.node());
}

Expression differentiate(const Expression& e, std::string_view symbol) {
  const Expression zero = Expression::number(0.0);
  const Expression one = Expression::number(1.0);
  return std::visit(
      Overloaded{
          [&](const ast::Number&) { return zero; },
          [&](const ast::Constant&) { return zero; },
          [&](const ast::Symbol& s) { return s.name == symbol ? one : zero; },
          [&](const ast::Negate& n) { return -differentiate(n.arg, symbol); },
          [&](const ast::Apply& a) -> Expression {
            const Expression du = differentiate(a.arg, symbol);
            if (du.is_number(0.0)) return zero;
            const Expression& u = a.arg;
            switch (a.fn) {
              case Function::Sin: return apply(Function::Cos, u) * du;
              case Function::Cos: return -apply(Function::Sin, u) * du;
              case Function::Tan: return pow(apply(Function::Sec, u), Expression::number(2.0)) * du;
              case Function::Sec: return apply(Function::Sec, u) * apply(Function::Tan, u) * du;
              case Function::Exp: return apply(Function::Exp, u) * du;
              case Function::Log: return du / u;
              case Function::Sqrt: return du / (Expression::number(2.0) * apply(Function::Sqrt, u));
              case Function::Abs: return u / apply(Function::Abs, u) * du;
            }
            return zero;
          },
          [&](const ast::Binary& b) -> Expression {
            const Expression& u = b.lhs;
            const Expression& v = b.rhs;
            switch (b.op) {
              case BinaryOp::Add: return differentiate(u, symbol) + differentiate(v, symbol);
              case BinaryOp::Sub: return differentiate(u, symbol) - differentiate(v, symbol);
              case BinaryOp::Mul: return differentiate(u, symbol) * v + u * differentiate(v, symbol);
              case BinaryOp::Div: {
                if (!depends_on(v, symbol)) return differentiate(u, symbol) / v;
                return (differentiate(u, symbol) * v - u * differentiate(v, symbol)) /
                       pow(v, Expression::number(2.0));
              }
              case BinaryOp::Pow: {
                const bool base_dep = depends_on(u, symbol);
                const bool exp_dep = depends_on(v, symbol);
                if (!base_dep && !exp_dep) return zero;
                if (!exp_dep) return v * pow(u, v - one) * differentiate(u, symbol);
                if (!base_dep) return pow(u, v) * apply(Function::Log, u) * differentiate(v, symbol);
                return pow(u, v) * (differentiate(v, symbol) * apply(Function::Log, u) +
                                    v * differentiate(u, symbol) / u);
              }
            }
            return zero;
          },
      },
      e.node());
}

Expression bind(const Expression& e, const ParamMap& params) {
  return std::visit(Overloaded{
                        [&](const ast::Number&) { return e; },
                        [&](const ast::Constant&) { return e; },
                        [&](const ast::Symbol& s) {
                          if (s.kind == ast::Symbol::Kind::Param) {
                            if (auto it = params.find(s.name); it != params.end())
                              return Expression::number(it->second);
                          }
                          return e;
                        },
                        [&](const ast::Apply& a) { return Expression::apply(a.fn, bind(a.arg, params)); },
                        [&](const ast::Negate& n) { return -bind(n.arg, params); },
                        [&](const ast::Binary& b) {
                          Expression l = bind(b.lhs, params);
                          Expression r = bind(b.rhs, params);
                          switch (b.op) {
                            case BinaryOp::Add: return l + r;
                            case BinaryOp::Sub: return l - r;
                            case BinaryOp::Mul: return l * r;
                            case BinaryOp::Div: return l / r;
                            case BinaryOp::Pow: return pow(l, r);
                          }
                          return e;
                        },
                    },
                    e.node());
}

bool structurally_equal(const Expression& a, const Expression& b) {
  if (a.node().index() != b.node().index()) return false;
  return std::visit(Overloaded{
                        [&](const ast::Number& n) { return n.value == std::get<ast::Number>(b.node()).value; },
                        [&](const ast::Constant& c) { return c.which == std::get<ast::Constant>(b.node()).which; },
                        [&](const ast::Symbol& s) { return s.name == std::get<ast::Symbol>(b.node()).name; },
                        [&](const ast::Apply& x) {
                          auto& y = std::get<ast::Apply>(b.node());
                          return x.fn == y.fn && structurally_equal(x.arg, y.arg);
                        },
                        [&](const ast::Negate& x) {
                          return structurally_equal(x.arg, std::get<ast::Negate>(b.node()).arg);
                        },
                        [&](const ast::Binary& x) {
                          auto& y = std::get<ast::Binary>(b.node());
                          return x.op == y.op && structurally_equal(x.lhs, y.lhs) && structurally_equal(x.rhs, y.rhs);
                        },
                    },
                    a.node());
}

std::set<std::string> free_symbols(const Expression& e) {
  std::set<std::string> out;
  auto walk = [&out](auto&& self, const Expression& x) -> void {
    std::visit(Overloaded{
                   [](const ast::Number&) {},
                   [](const ast::Constant&) {},
                   [&](const ast::Symbol& s) { out.insert(s.name); },
                   [&](const ast::Apply& a) { self(self, a.arg); },
                   [&](const ast::Negate& n) { self(self, n.arg); },
                   [&](const ast::Binary& b) {
                     self(self, b.lhs);
                     self(self, b.rhs);
                   },
               },
               x.node());
  };
  walk(walk, e);
  return out;
}

}  // namespace fg
