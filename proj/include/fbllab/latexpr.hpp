#pragma once

// Lattice-linear expressions in generators d1, d2, ...
//
//   expr := sum
//   sum  := join (("+" | "-") join)*
//   join := meet ("\/" meet)*
//   meet := term ("/\" term)*
//   term := number "*" term | "|" expr "|" | "(" expr ")" | "d" integer

#include <algorithm>
#include <charconv>
#include <cmath>
#include <climits>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbllab/error.hpp"

namespace fbllab {

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, std::vector<std::string> expected, std::string found)
      : Error(ErrorCode::SyntaxError, describe(line, column, expected, found)),
        line_(line), column_(column), expected_(std::move(expected)) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string describe(std::size_t line, std::size_t col, const std::vector<std::string>& exp,
                              const std::string& found) {
    std::string s = "line " + std::to_string(line) + ", column " + std::to_string(col) + ": expected ";
    for (std::size_t i = 0; i < exp.size(); ++i) s += (i ? ", " : "") + exp[i];
    return s + "; found " + found;
  }
  std::size_t line_, column_;
  std::vector<std::string> expected_;
};

class Expr {
 public:
  enum class Kind { Generator, Scale, Sum, Abs, Join, Meet };

  static Expr gen(int k) {
    if (k < 1) throw Error(ErrorCode::UnknownGenerator, "generator index must be >= 1, got " + std::to_string(k));
    return Expr(Node{Kind::Generator, k, 0.0, {}});
  }
  static Expr scale(double c, Expr e) {
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "scalar must be finite");
    return Expr(Node{Kind::Scale, 0, c, {std::move(e)}});
  }
  static Expr sum(std::vector<Expr> terms) {
    if (terms.size() < 2) throw Error(ErrorCode::InvalidArgument, "sum needs at least two terms");
    return Expr(Node{Kind::Sum, 0, 0.0, std::move(terms)});
  }
  static Expr abs(Expr e) { return Expr(Node{Kind::Abs, 0, 0.0, {std::move(e)}}); }
  static Expr join(Expr a, Expr b) { return Expr(Node{Kind::Join, 0, 0.0, {std::move(a), std::move(b)}}); }
  static Expr meet(Expr a, Expr b) { return Expr(Node{Kind::Meet, 0, 0.0, {std::move(a), std::move(b)}}); }

  Kind kind() const { return n_->kind; }
  int index() const { return n_->index; }
  double scalar() const { return n_->scalar; }
  const std::vector<Expr>& children() const { return n_->children; }

  // Largest generator index used.
  int arity() const {
    if (kind() == Kind::Generator) return index();
    int a = 0;
    for (const auto& c : children()) a = std::max(a, c.arity());
    return a;
  }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& c : children()) d = std::max(d, c.depth());
    return d + 1;
  }

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.n_ == b.n_) return true;
    if (a.kind() != b.kind() || a.index() != b.index() || a.scalar() != b.scalar()) return false;
    return a.children() == b.children();
  }

 private:
  struct Node {
    Kind kind;
    int index;
    double scalar;
    std::vector<Expr> children;
  };
  explicit Expr(Node n) : n_(std::make_shared<const Node>(std::move(n))) {}
  // Nodes are immutable, so sharing a subtree is indistinguishable from copying it.
  std::shared_ptr<const Node> n_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Expr run() {
    Expr e = sum();
    skip();
    if (pos_ != s_.size()) fail({"'+'", "'-'", "'\\/'", "'/\\'", "end of input"});
    return e;
  }

 private:
  static constexpr std::size_t kMaxDepth = 2000;  // two frames per nesting level

  struct Guard {
    Parser& p;
    explicit Guard(Parser& q) : p(q) {
      if (++p.depth_ > kMaxDepth) p.fail({"shallower nesting"});
    }
    ~Guard() { --p.depth_; }
  };

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }
  bool peek(std::string_view tok) {
    skip();
    return s_.substr(pos_, tok.size()) == tok;
  }
  bool accept(std::string_view tok) {
    if (!peek(tok)) return false;
    pos_ += tok.size();
    return true;
  }
  void expect(std::string_view tok, std::vector<std::string> exp) {
    if (!accept(tok)) fail(std::move(exp));
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string found = "end of input";
    if (pos_ < s_.size()) {
      unsigned char c = static_cast<unsigned char>(s_[pos_]);
      found = (c >= 32 && c < 127) ? "'" + std::string(1, s_[pos_]) + "'" : "byte " + std::to_string(int(c));
    }
    throw SyntaxError(line, col, std::move(expected), found);
  }

  Expr sum() {
    Guard g(*this);
    std::vector<Expr> terms{join()};
    for (;;) {
      if (accept("+")) {
        terms.push_back(join());
      } else if (peek("-")) {
        ++pos_;
        terms.push_back(Expr::scale(-1.0, join()));
      } else {
        break;
      }
    }
    return terms.size() == 1 ? terms.front() : Expr::sum(std::move(terms));
  }

  Expr join() {
    Expr e = meet();
    while (accept("\\/")) e = Expr::join(e, meet());
    return e;
  }

  Expr meet() {
    Expr e = term();
    while (accept("/\\")) e = Expr::meet(e, term());
    return e;
  }

  Expr term() {
    Guard g(*this);
    skip();
    if (pos_ >= s_.size()) fail(term_start());
    char c = s_[pos_];
    if (c == '|') {
      ++pos_;
      Expr e = sum();
      expect("|", {"'|'"});
      return Expr::abs(e);
    }
    if (c == '(') {
      ++pos_;
      Expr e = sum();
      expect(")", {"')'"});
      return e;
    }
    if (c == 'd') {
      ++pos_;
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
      if (start == pos_) fail({"generator index"});
      long long k = 0;
      auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, k);
      if (ec != std::errc() || k > INT_MAX) {
        pos_ = start;
        throw Error(ErrorCode::UnknownGenerator, "generator index out of range: d" + std::string(s_.substr(start, 20)));
      }
      if (k < 1) throw Error(ErrorCode::UnknownGenerator, "generator index must be >= 1, got d" + std::to_string(k));
      return Expr::gen(static_cast<int>(k));
    }
    if (c == '+' || c == '-' || c == '.' || (c >= '0' && c <= '9')) {
      double v = number();
      expect("*", {"'*'"});
      return Expr::scale(v, term());
    }
    fail(term_start());
  }

  double number() {
    std::size_t start = pos_;
    bool neg = false;
    if (s_[pos_] == '+' || s_[pos_] == '-') neg = s_[pos_++] == '-';
    std::size_t body = pos_, digits = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++digits;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++digits;
    }
    if (digits == 0) fail({"digit"});
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      std::size_t ed = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (ed == pos_) fail({"exponent digits"});
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + body, s_.data() + pos_, v);
    if (ec != std::errc() || ptr != s_.data() + pos_ || !std::isfinite(v)) {
      pos_ = start;
      fail({"finite number"});
    }
    return neg ? -v : v;
  }

  static std::vector<std::string> term_start() { return {"number", "'|'", "'('", "generator 'd<k>'"}; }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
};

inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline void format_into(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::Generator: out += "d" + std::to_string(e.index()); break;
    case Expr::Kind::Scale:
      out += format_number(e.scalar()) + "*";
      format_into(e.children()[0], out);
      break;
    case Expr::Kind::Abs:
      out += "|";
      format_into(e.children()[0], out);
      out += "|";
      break;
    case Expr::Kind::Sum:
    case Expr::Kind::Join:
    case Expr::Kind::Meet: {
      const char* op = e.kind() == Expr::Kind::Sum ? " + " : e.kind() == Expr::Kind::Join ? " \\/ " : " /\\ ";
      out += "(";
      for (std::size_t i = 0; i < e.children().size(); ++i) {
        if (i) out += op;
        format_into(e.children()[i], out);
      }
      out += ")";
      break;
    }
  }
}

}  // namespace detail

inline Expr parse(std::string_view text) { return detail::Parser(text).run(); }

// Canonical, fully parenthesized text. parse(format(e)) == e.
inline std::string format(const Expr& e) {
  std::string s;
  detail::format_into(e, s);
  return s;
}

// Flattened postfix form for repeated evaluation.
class CompiledExpr {
 public:
  explicit CompiledExpr(const Expr& e) : arity_(e.arity()) { emit(e); }

  int arity() const { return arity_; }

  // G applied to generator values g[0..K).
  double operator()(std::span<const double> g) const {
    stack_.clear();
    for (const auto& op : ops_) {
      switch (op.kind) {
        case Expr::Kind::Generator: stack_.push_back(g[op.index - 1]); break;
        case Expr::Kind::Scale: stack_.back() *= op.scalar; break;
        case Expr::Kind::Abs: stack_.back() = std::abs(stack_.back()); break;
        case Expr::Kind::Sum: {
          double s = 0.0;
          for (int i = 0; i < op.index; ++i) s += stack_[stack_.size() - op.index + i];
          stack_.resize(stack_.size() - op.index);
          stack_.push_back(s);
          break;
        }
        case Expr::Kind::Join:
        case Expr::Kind::Meet: {
          double b = stack_.back();
          stack_.pop_back();
          double& a = stack_.back();
          a = op.kind == Expr::Kind::Join ? std::max(a, b) : std::min(a, b);
          break;
        }
      }
    }
    return stack_.back();
  }

 private:
  struct Op {
    Expr::Kind kind;
    int index;  // generator index, or number of summands
    double scalar;
  };
  void emit(const Expr& e) {
    for (const auto& c : e.children()) emit(c);
    int idx = e.kind() == Expr::Kind::Sum ? static_cast<int>(e.children().size()) : e.index();
    ops_.push_back({e.kind(), idx, e.scalar()});
  }
  std::vector<Op> ops_;
  int arity_;
  mutable std::vector<double> stack_;
};

inline double evaluate_scalars(const Expr& f, std::span<const double> g) {
  if (static_cast<std::size_t>(f.arity()) > g.size())
    throw Error(ErrorCode::ArityMismatch, "expression uses d" + std::to_string(f.arity()) + " but only " +
                                              std::to_string(g.size()) + " generators are given");
  return CompiledExpr(f)(g);
}

// f evaluated at the functional y: generator k becomes <y, x_k>.
inline double evaluate(const Expr& f, const std::vector<std::vector<double>>& gens, std::span<const double> y) {
  if (static_cast<std::size_t>(f.arity()) > gens.size())
    throw Error(ErrorCode::ArityMismatch, "expression uses d" + std::to_string(f.arity()) + " but only " +
                                              std::to_string(gens.size()) + " generators are given");
  std::vector<double> g(gens.size());
  for (std::size_t k = 0; k < gens.size(); ++k) {
    if (gens[k].size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "generator and functional differ in dimension");
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) s += gens[k][j] * y[j];
    g[k] = s;
  }
  return CompiledExpr(f)(g);
}

// Coordinatewise image: (T^ f)_j = G(images[0][j], ..., images[K-1][j]).
inline std::vector<double> evaluate_image(const Expr& f, const std::vector<std::vector<double>>& images) {
  if (static_cast<std::size_t>(f.arity()) > images.size())
    throw Error(ErrorCode::ArityMismatch, "expression uses d" + std::to_string(f.arity()) + " but only " +
                                              std::to_string(images.size()) + " images are given");
  if (images.empty()) return {};
  const std::size_t m = images.front().size();
  for (const auto& v : images)
    if (v.size() != m) throw Error(ErrorCode::DimensionMismatch, "generator images differ in dimension");
  CompiledExpr c(f);
  std::vector<double> out(m), g(images.size());
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < images.size(); ++k) g[k] = images[k][j];
    out[j] = c(g);
  }
  return out;
}

// Random tree over d1..dK of depth at most maxDepth; used by property tests and probes.
template <class Rng>
Expr random_expr(Rng& rng, int K, int maxDepth) {
  std::uniform_int_distribution<int> gen(1, K);
  if (maxDepth <= 1) return Expr::gen(gen(rng));
  std::uniform_int_distribution<int> pick(0, 6);
  switch (pick(rng)) {
    case 0:
    case 1: return Expr::gen(gen(rng));
    case 2: {
      std::uniform_real_distribution<double> u(-3.0, 3.0);
      double c = std::round(u(rng) * 1000.0) / 1000.0;
      if (pick(rng) == 0) c = u(rng);  // occasionally a full-precision scalar
      return Expr::scale(c, random_expr(rng, K, maxDepth - 1));
    }
    case 3: {
      std::uniform_int_distribution<int> n(2, 3);
      std::vector<Expr> t;
      for (int i = n(rng); i > 0; --i) t.push_back(random_expr(rng, K, maxDepth - 1));
      return Expr::sum(std::move(t));
    }
    case 4: return Expr::abs(random_expr(rng, K, maxDepth - 1));
    case 5: return Expr::join(random_expr(rng, K, maxDepth - 1), random_expr(rng, K, maxDepth - 1));
    default: return Expr::meet(random_expr(rng, K, maxDepth - 1), random_expr(rng, K, maxDepth - 1));
  }
}

}  // namespace fbllab
