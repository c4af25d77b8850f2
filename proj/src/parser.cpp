#include "btflow/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace btflow {

std::string format_diagnostic(const Diagnostic& d, bool color)
{
  std::string out = d.span.file + ":" + std::to_string(d.span.start_line) + ":" + std::to_string(d.span.start_col) + ": ";
  const std::string sev(severity_name(d.severity));
  if (color) {
    out += (d.severity == Severity::Error ? "\x1b[1;31m" : "\x1b[1;35m") + sev + "\x1b[0m";
  } else {
    out += sev;
  }
  out += ": " + d.message;
  return out;
}

namespace {

constexpr int kMaxDepth = 200;

enum class Tok {
  Ident,
  Directive,  // @extern, @expr, @script
  Int,
  Float,
  String,
  LBrace,
  RBrace,
  LParen,
  RParen,
  Colon,
  Comma,
  Semi,
  Arrow,
  CodeOpen,
  CodeClose,
  Assign,
  EqEq,
  NotEq,
  Lt,
  Le,
  Gt,
  Ge,
  AndAnd,
  OrOr,
  Bang,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  Question,
  Eof,
};

struct Token
{
  Tok kind = Tok::Eof;
  std::string text;
  std::uint64_t ival = 0;
  bool int_overflow = false;
  double fval = 0.0;
  SourceSpan span;
};

std::string describe(const Token& t)
{
  switch (t.kind) {
    case Tok::Eof: return "end of input";
    case Tok::String: return "string literal";
    case Tok::Int:
    case Tok::Float: return "number '" + t.text + "'";
    case Tok::Directive: return "'@" + t.text + "'";
    default: return "'" + t.text + "'";
  }
}

class Lexer
{
public:
  Lexer(std::string_view src, std::string file, std::vector<Diagnostic>& diags)
      : src_(src), file_(std::move(file)), diags_(diags)
  {
  }

  std::vector<Token> run()
  {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t = next();
      const bool eof = t.kind == Tok::Eof;
      out.push_back(std::move(t));
      if (eof) break;
    }
    return out;
  }

private:
  char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }
  bool at_end() const { return pos_ >= src_.size(); }

  void advance()
  {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia()
  {
    while (!at_end()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  SourceSpan span_from(int line, int col) const { return SourceSpan{file_, line, col, line_, col_}; }

  void error(const std::string& msg, int line, int col)
  {
    diags_.push_back({Severity::Error, msg, span_from(line, col)});
  }

  static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  Token make(Tok kind, std::size_t len, int line, int col)
  {
    Token t;
    t.kind = kind;
    t.text = std::string(src_.substr(pos_, len));
    for (std::size_t i = 0; i < len; ++i) advance();
    t.span = span_from(line, col);
    return t;
  }

  Token next()
  {
    for (;;) {
      if (auto t = next_token()) return std::move(*t);
      skip_trivia();
    }
  }

  std::optional<Token> next_token()
  {
    const int line = line_;
    const int col = col_;
    if (at_end()) {
      Token t;
      t.kind = Tok::Eof;
      t.span = span_from(line, col);
      return t;
    }
    const char c = peek();
    if (ident_start(c)) {
      std::size_t len = 0;
      while (ident_char(peek(len))) ++len;
      return make(Tok::Ident, len, line, col);
    }
    if (c == '@' && ident_start(peek(1))) {
      std::size_t len = 1;
      while (ident_char(peek(len))) ++len;
      Token t = make(Tok::Directive, len, line, col);
      t.text.erase(0, 1);
      return t;
    }
    if (digit(c)) return number(line, col);
    if (c == '"') return string_lit(line, col);
    switch (c) {
      case '{': return peek(1) == '=' ? make(Tok::CodeOpen, 2, line, col) : make(Tok::LBrace, 1, line, col);
      case '}': return make(Tok::RBrace, 1, line, col);
      case '(': return make(Tok::LParen, 1, line, col);
      case ')': return make(Tok::RParen, 1, line, col);
      case ':': return make(Tok::Colon, 1, line, col);
      case ',': return make(Tok::Comma, 1, line, col);
      case ';': return make(Tok::Semi, 1, line, col);
      case '?': return make(Tok::Question, 1, line, col);
      case '+': return make(Tok::Plus, 1, line, col);
      case '*': return make(Tok::Star, 1, line, col);
      case '/': return make(Tok::Slash, 1, line, col);
      case '%': return make(Tok::Percent, 1, line, col);
      case '-': return peek(1) == '>' ? make(Tok::Arrow, 2, line, col) : make(Tok::Minus, 1, line, col);
      case '=':
        if (peek(1) == '}') return make(Tok::CodeClose, 2, line, col);
        if (peek(1) == '=') return make(Tok::EqEq, 2, line, col);
        return make(Tok::Assign, 1, line, col);
      case '!': return peek(1) == '=' ? make(Tok::NotEq, 2, line, col) : make(Tok::Bang, 1, line, col);
      case '<': return peek(1) == '=' ? make(Tok::Le, 2, line, col) : make(Tok::Lt, 1, line, col);
      case '>': return peek(1) == '=' ? make(Tok::Ge, 2, line, col) : make(Tok::Gt, 1, line, col);
      case '&':
        if (peek(1) == '&') return make(Tok::AndAnd, 2, line, col);
        break;
      case '|':
        if (peek(1) == '|') return make(Tok::OrOr, 2, line, col);
        break;
      default: break;
    }
    const auto uc = static_cast<unsigned char>(c);
    std::string shown = (uc >= 0x20 && uc < 0x7f) ? std::string(1, c) : "\\x" + hex(uc);
    advance();
    error("unexpected character '" + shown + "'", line, col);
    return std::nullopt;
  }

  static std::string hex(unsigned char c)
  {
    const char* digits = "0123456789abcdef";
    return {digits[c >> 4], digits[c & 15]};
  }

  Token number(int line, int col)
  {
    std::size_t len = 0;
    while (digit(peek(len))) ++len;
    bool is_float = false;
    if (peek(len) == '.' && digit(peek(len + 1))) {
      is_float = true;
      ++len;
      while (digit(peek(len))) ++len;
    }
    if (peek(len) == 'e' || peek(len) == 'E') {
      std::size_t k = len + 1;
      if (peek(k) == '+' || peek(k) == '-') ++k;
      if (digit(peek(k))) {
        is_float = true;
        len = k;
        while (digit(peek(len))) ++len;
      }
    }
    Token t = make(is_float ? Tok::Float : Tok::Int, len, line, col);
    if (is_float) {
      t.fval = std::strtod(t.text.c_str(), nullptr);
    } else {
      std::uint64_t v = 0;
      for (char d : t.text) {
        const auto dv = static_cast<std::uint64_t>(d - '0');
        if (v > (UINT64_MAX - dv) / 10) {
          t.int_overflow = true;
          break;
        }
        v = v * 10 + dv;
      }
      t.ival = v;
    }
    return t;
  }

  Token string_lit(int line, int col)
  {
    advance();  // opening quote
    std::string value;
    for (;;) {
      if (at_end() || peek() == '\n') {
        error("unterminated string literal", line, col);
        break;
      }
      const char c = peek();
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        const int eline = line_;
        const int ecol = col_;
        advance();
        if (at_end()) continue;
        const char e = peek();
        advance();
        switch (e) {
          case 'n': value.push_back('\n'); break;
          case 't': value.push_back('\t'); break;
          case 'r': value.push_back('\r'); break;
          case '"': value.push_back('"'); break;
          case '\\': value.push_back('\\'); break;
          case 'x': {
            int v = 0;
            int n = 0;
            while (n < 2 && std::isxdigit(static_cast<unsigned char>(peek())) != 0) {
              const char h = peek();
              v = v * 16 + (digit(h) ? h - '0' : (std::tolower(static_cast<unsigned char>(h)) - 'a' + 10));
              advance();
              ++n;
            }
            if (n == 0) error("invalid \\x escape", eline, ecol);
            value.push_back(static_cast<char>(v));
            break;
          }
          default: error(std::string("unknown escape '\\") + e + "'", eline, ecol); break;
        }
        continue;
      }
      value.push_back(c);
      advance();
    }
    Token t;
    t.kind = Tok::String;
    t.text = std::move(value);
    t.span = span_from(line, col);
    return t;
  }

  std::string_view src_;
  std::string file_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct SyntaxError
{
};

class Parser
{
public:
  Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags) : toks_(std::move(toks)), diags_(diags) {}

  std::optional<BtDef> parse_def()
  {
    try {
      BtDef def;
      const Token& kw = peek();
      def.span = kw.span;
      expect_keyword("behaviortree");
      def.name = expect(Tok::Ident, "tree name").text;
      expect(Tok::LBrace, "'{'");
      std::set<std::string> names;
      while (is_keyword("input") || is_keyword("output")) {
        PortDecl p;
        p.span = peek().span;
        p.direction = take().text == "input" ? PortDirection::Input : PortDirection::Output;
        const Token& name = expect(Tok::Ident, "port name");
        p.name = name.text;
        expect(Tok::Colon, "':'");
        p.type = parse_type();
        p.span.end_line = prev().span.end_line;
        p.span.end_col = prev().span.end_col;
        if (is_reserved_name(p.name)) {
          error("'" + p.name + "' is reserved and cannot name a port", name.span);
        } else if (!names.insert(p.name).second) {
          error("duplicate port name '" + p.name + "'", name.span);
        }
        def.ports.push_back(std::move(p));
      }
      if (check(Tok::RBrace)) error("behaviortree requires a root node", peek().span);
      else def.root = parse_node(0);
      if (!check(Tok::RBrace)) {
        error("expected '}' after the root node, found " + describe(peek()), peek().span);
        throw SyntaxError{};
      }
      take();
      if (!check(Tok::Eof)) {
        error("unexpected " + describe(peek()) + " after behaviortree", peek().span);
      }
      return def;
    } catch (const SyntaxError&) {
      return std::nullopt;
    }
  }

private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& prev() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }
  bool check(Tok k) const { return peek().kind == k; }
  bool is_keyword(std::string_view kw) const { return peek().kind == Tok::Ident && peek().text == kw; }

  const Token& take()
  {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  void error(std::string msg, const SourceSpan& span) { diags_.push_back({Severity::Error, std::move(msg), span}); }

  [[noreturn]] void fail(const std::string& what)
  {
    error("expected " + what + ", found " + describe(peek()), peek().span);
    throw SyntaxError{};
  }

  const Token& expect(Tok k, const std::string& what)
  {
    if (!check(k)) fail(what);
    return take();
  }

  void expect_keyword(std::string_view kw)
  {
    if (!is_keyword(kw)) fail("'" + std::string(kw) + "'");
    take();
  }

  ValueType parse_type()
  {
    const Token& t = peek();
    if (t.kind == Tok::Ident) {
      if (auto vt = parse_type_name(t.text)) {
        take();
        return *vt;
      }
    }
    fail("a type (bool, int, float, string)");
  }

  static bool is_node_keyword(const Token& t)
  {
    if (t.kind != Tok::Ident) return false;
    return t.text == "task" || t.text == "condition" || t.text == "sequence" || t.text == "fallback" ||
           t.text == "parallel";
  }

  /// Skip to the next plausible node start, or the '}' closing the
  /// enclosing composite.
  void synchronize(std::size_t error_pos)
  {
    int depth = 0;
    if (pos_ == error_pos && !check(Tok::RBrace) && !check(Tok::Eof)) take();
    while (!check(Tok::Eof)) {
      const Token& t = peek();
      if (t.kind == Tok::CodeOpen) {
        while (!check(Tok::CodeClose) && !check(Tok::Eof)) take();
        if (check(Tok::CodeClose)) take();
        continue;
      }
      if (depth == 0 && (is_node_keyword(t) || t.kind == Tok::RBrace)) return;
      if (t.kind == Tok::LBrace) ++depth;
      if (t.kind == Tok::RBrace) --depth;
      take();
    }
  }

  void end_span(SourceSpan& s) const
  {
    s.end_line = prev().span.end_line;
    s.end_col = prev().span.end_col;
  }

  BtNode parse_node(int depth)
  {
    if (depth > kMaxDepth) {
      error("tree nesting too deep", peek().span);
      throw SyntaxError{};
    }
    const Token& kw = peek();
    if (kw.kind != Tok::Ident) fail("a node (sequence, fallback, parallel, task, condition)");
    if (kw.text == "sequence" || kw.text == "fallback" || kw.text == "parallel") return parse_composite(depth);
    if (kw.text == "task" || kw.text == "condition") return parse_leaf();
    fail("a node (sequence, fallback, parallel, task, condition)");
  }

  BtNode parse_composite(int depth)
  {
    BtNode n;
    n.span = peek().span;
    const std::string kw = take().text;
    n.kind = kw == "sequence" ? NodeKind::Sequence : (kw == "fallback" ? NodeKind::Fallback : NodeKind::Parallel);
    bool explicit_threshold = false;
    if (n.kind == NodeKind::Parallel && check(Tok::LParen)) {
      take();
      const Token& m = expect(Tok::Int, "parallel threshold");
      if (m.int_overflow || m.ival > 1000000) {
        error("parallel threshold out of range", m.span);
        n.threshold = 0;
      } else {
        n.threshold = static_cast<int>(m.ival);
      }
      explicit_threshold = true;
      expect(Tok::RParen, "')'");
    }
    expect(Tok::LBrace, "'{'");
    while (is_keyword("channel")) {
      ChannelDecl c;
      c.span = take().span;
      const Token& name = expect(Tok::Ident, "channel name");
      c.name = name.text;
      expect(Tok::Colon, "':'");
      c.type = parse_type();
      end_span(c.span);
      n.channels.push_back(std::move(c));
    }
    bool child_error = false;
    while (!check(Tok::RBrace) && !check(Tok::Eof)) {
      const std::size_t start = pos_;
      if (is_keyword("channel")) {
        error("channel declarations must precede child nodes", peek().span);
        child_error = true;
        take();
        synchronize(pos_);
        continue;
      }
      const std::size_t diag_mark = diags_.size();
      try {
        n.children.push_back(parse_node(depth + 1));
        if (diags_.size() != diag_mark) child_error = true;
      } catch (const SyntaxError&) {
        child_error = true;
        synchronize(start);
      }
    }
    if (!check(Tok::RBrace)) {
      error("expected '}' to close " + kw + ", found " + describe(peek()), peek().span);
      throw SyntaxError{};
    }
    take();
    end_span(n.span);
    if (n.children.empty() && !child_error) {
      error(kw + " requires at least one child", n.span);
    }
    if (n.kind == NodeKind::Parallel && !explicit_threshold) {
      n.threshold = static_cast<int>(n.children.size());
    }
    return n;
  }

  std::vector<Ref> parse_ref_list()
  {
    std::vector<Ref> refs;
    expect(Tok::LParen, "'('");
    if (!check(Tok::RParen)) {
      for (;;) {
        const Token& t = expect(Tok::Ident, "a port or channel name");
        refs.push_back({t.text, t.span});
        if (!check(Tok::Comma)) break;
        take();
      }
    }
    expect(Tok::RParen, "')'");
    return refs;
  }

  void parse_iface(BtNode& n)
  {
    n.sources = parse_ref_list();
    if (check(Tok::Arrow)) {
      take();
      n.effects = parse_ref_list();
    }
  }

  Value parse_literal_value()
  {
    bool negative = false;
    if (check(Tok::Minus)) {
      take();
      negative = true;
    }
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      take();
      return Value{int_value(t, negative)};
    }
    if (t.kind == Tok::Float) {
      take();
      return Value{negative ? -t.fval : t.fval};
    }
    if (!negative && t.kind == Tok::String) {
      take();
      return Value{t.text};
    }
    if (!negative && t.kind == Tok::Ident && (t.text == "true" || t.text == "false")) {
      take();
      return Value{t.text == "true"};
    }
    fail("a literal");
  }

  std::int64_t int_value(const Token& t, bool negative)
  {
    constexpr std::uint64_t kMaxPos = static_cast<std::uint64_t>(INT64_MAX);
    if (t.int_overflow || t.ival > kMaxPos + (negative ? 1 : 0)) {
      error("integer literal out of range", t.span);
      return 0;
    }
    if (negative) return static_cast<std::int64_t>(std::uint64_t{0} - t.ival);
    return static_cast<std::int64_t>(t.ival);
  }

  BtNode parse_leaf()
  {
    BtNode n;
    n.span = peek().span;
    n.kind = take().text == "task" ? NodeKind::Task : NodeKind::Condition;
    n.label = expect(Tok::String, "a quoted label").text;
    if (check(Tok::LParen)) parse_iface(n);
    if (check(Tok::CodeOpen)) {
      n.body = parse_code();
    } else if (check(Tok::LBrace)) {
      take();
      while (is_keyword("state")) {
        StateDecl s;
        s.span = take().span;
        s.name = expect(Tok::Ident, "state name").text;
        expect(Tok::Colon, "':'");
        s.type = parse_type();
        expect(Tok::Assign, "'='");
        s.initial = parse_literal_value();
        if (auto c = coerce(s.initial, s.type)) s.initial = *c;
        end_span(s.span);
        n.states.push_back(std::move(s));
      }
      const Token& reaction = peek();
      expect_keyword("reaction");
      if (check(Tok::LParen)) {
        if (!n.sources.empty() || !n.effects.empty()) {
          error("interface declared both on the node and on its reaction", reaction.span);
        }
        parse_iface(n);
      }
      if (!check(Tok::CodeOpen)) fail("'{='");
      n.body = parse_code();
      expect(Tok::RBrace, "'}'");
    } else {
      fail("'{=' or '{'");
    }
    end_span(n.span);
    return n;
  }

  TaskBody parse_code()
  {
    const Token& open = take();
    bool closed = false;
    for (std::size_t k = pos_; k < toks_.size(); ++k) {
      if (toks_[k].kind == Tok::CodeClose) {
        closed = true;
        break;
      }
      if (toks_[k].kind == Tok::CodeOpen) break;
    }
    if (!closed) {
      error("unterminated '{=' block", open.span);
      throw SyntaxError{};
    }
    TaskBody body;
    const Token& d = peek();
    if (d.kind != Tok::Directive) fail("'@extern', '@expr' or '@script'");
    take();
    if (d.text == "extern") {
      body = ExternBody{expect(Tok::Ident, "callback name").text};
    } else if (d.text == "expr") {
      body = ExprBody{parse_expr(0)};
    } else if (d.text == "script") {
      ScriptBody sb;
      while (is_keyword("step")) sb.steps.push_back(parse_step());
      if (sb.steps.empty()) fail("'step'");
      if (is_keyword("loop")) {
        sb.tail = ScriptTail::Loop;
      } else if (is_keyword("hold")) {
        sb.tail = ScriptTail::Hold;
      } else {
        fail("'step', 'loop' or 'hold'");
      }
      take();
      body = std::move(sb);
    } else {
      error("unknown directive '@" + d.text + "'", d.span);
      throw SyntaxError{};
    }
    expect(Tok::CodeClose, "'=}'");
    return body;
  }

  ScriptStep parse_step()
  {
    ScriptStep step;
    step.span = take().span;
    expect(Tok::LBrace, "'{'");
    for (;;) {
      if (is_keyword("emit") || is_keyword("state")) {
        const bool emit = peek().text == "emit";
        Assignment a;
        a.span = take().span;
        const Token& target = peek();
        if (target.kind != Tok::Ident) fail("a name");
        a.target = take().text;
        expect(Tok::Assign, "'='");
        a.value = parse_expr(0);
        expect(Tok::Semi, "';'");
        end_span(a.span);
        (emit ? step.emits : step.state_updates).push_back(std::move(a));
        continue;
      }
      break;
    }
    expect_keyword("status");
    const Token& s = peek();
    if (s.kind == Tok::Ident && s.text == "success") {
      step.status = Status::Success;
    } else if (s.kind == Tok::Ident && s.text == "failure") {
      step.status = Status::Failure;
    } else if (s.kind == Tok::Ident && s.text == "running") {
      step.status = Status::Running;
    } else {
      fail("'success', 'failure' or 'running'");
    }
    take();
    if (check(Tok::Semi)) take();
    expect(Tok::RBrace, "'}'");
    end_span(step.span);
    return step;
  }

  // Expressions, lowest precedence first.

  Expr parse_expr(int depth)
  {
    if (depth > kMaxDepth) {
      error("expression nesting too deep", peek().span);
      throw SyntaxError{};
    }
    const SourceSpan start = peek().span;
    Expr c = parse_binary(1, depth);
    if (!check(Tok::Question)) return c;
    take();
    Expr a = parse_expr(depth + 1);
    expect(Tok::Colon, "':'");
    Expr b = parse_expr(depth + 1);
    Expr e = Expr::cond(std::move(c), std::move(a), std::move(b));
    e.span = start;
    end_span(e.span);
    return e;
  }

  static int binary_prec(Tok k)
  {
    switch (k) {
      case Tok::OrOr: return 1;
      case Tok::AndAnd: return 2;
      case Tok::EqEq:
      case Tok::NotEq: return 3;
      case Tok::Lt:
      case Tok::Le:
      case Tok::Gt:
      case Tok::Ge: return 4;
      case Tok::Plus:
      case Tok::Minus: return 5;
      case Tok::Star:
      case Tok::Slash:
      case Tok::Percent: return 6;
      default: return 0;
    }
  }

  static ExprOp binary_op(Tok k)
  {
    switch (k) {
      case Tok::OrOr: return ExprOp::Or;
      case Tok::AndAnd: return ExprOp::And;
      case Tok::EqEq: return ExprOp::Eq;
      case Tok::NotEq: return ExprOp::Ne;
      case Tok::Lt: return ExprOp::Lt;
      case Tok::Le: return ExprOp::Le;
      case Tok::Gt: return ExprOp::Gt;
      case Tok::Ge: return ExprOp::Ge;
      case Tok::Plus: return ExprOp::Add;
      case Tok::Minus: return ExprOp::Sub;
      case Tok::Star: return ExprOp::Mul;
      case Tok::Slash: return ExprOp::Div;
      default: return ExprOp::Mod;
    }
  }

  Expr parse_binary(int min_prec, int depth)
  {
    const SourceSpan start = peek().span;
    Expr lhs = parse_unary(depth + 1);
    for (;;) {
      const int prec = binary_prec(peek().kind);
      if (prec == 0 || prec < min_prec) return lhs;
      const ExprOp op = binary_op(take().kind);
      Expr rhs = parse_binary(prec + 1, depth + 1);
      lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
      lhs.span = start;
      end_span(lhs.span);
    }
  }

  Expr parse_unary(int depth)
  {
    if (depth > kMaxDepth) {
      error("expression nesting too deep", peek().span);
      throw SyntaxError{};
    }
    const SourceSpan start = peek().span;
    if (check(Tok::Bang)) {
      take();
      Expr e = Expr::unary(ExprOp::Not, parse_unary(depth + 1));
      e.span = start;
      end_span(e.span);
      return e;
    }
    if (check(Tok::Minus)) {
      take();
      if (check(Tok::Int) || check(Tok::Float)) {
        const Token& t = take();
        Expr e = Expr::lit(t.kind == Tok::Int ? Value{int_value(t, true)} : Value{-t.fval});
        e.span = start;
        end_span(e.span);
        return e;
      }
      Expr e = Expr::unary(ExprOp::Neg, parse_unary(depth + 1));
      e.span = start;
      end_span(e.span);
      return e;
    }
    return parse_primary(depth);
  }

  Expr parse_primary(int depth)
  {
    const Token& t = peek();
    Expr e;
    switch (t.kind) {
      case Tok::Int:
        take();
        e = Expr::lit(Value{int_value(t, false)});
        break;
      case Tok::Float:
        take();
        e = Expr::lit(Value{t.fval});
        break;
      case Tok::String:
        take();
        e = Expr::lit(Value{t.text});
        break;
      case Tok::LParen: {
        take();
        e = parse_expr(depth + 1);
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        if (t.text == "true" || t.text == "false") {
          take();
          e = Expr::lit(Value{t.text == "true"});
        } else if (t.text == "present" && peek(1).kind == Tok::LParen) {
          take();
          take();
          e = Expr::present(expect(Tok::Ident, "a source name").text);
          expect(Tok::RParen, "')'");
        } else {
          take();
          e = Expr::ref(t.text);
        }
        break;
      default: fail("an expression");
    }
    e.span = t.span;
    end_span(e.span);
    return e;
  }

  std::vector<Token> toks_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
};

}  // namespace

ParseResult parse(std::string_view text, std::string_view file)
{
  ParseResult result;
  Lexer lexer(text, std::string(file), result.diagnostics);
  std::vector<Token> toks = lexer.run();
  Parser parser(std::move(toks), result.diagnostics);
  std::optional<BtDef> def = parser.parse_def();
  bool errors = false;
  for (const auto& d : result.diagnostics) errors = errors || d.severity == Severity::Error;
  if (def && !errors) result.def = std::move(def);
  if (!result.def && result.diagnostics.empty()) {
    result.diagnostics.push_back({Severity::Error, "malformed behaviortree", SourceSpan{std::string(file)}});
  }
  return result;
}

// ---------------------------------------------------------------------------
// Pretty printer

namespace {

int expr_prec(const Expr& e)
{
  switch (e.op) {
    case ExprOp::Cond: return 0;
    case ExprOp::Or: return 1;
    case ExprOp::And: return 2;
    case ExprOp::Eq:
    case ExprOp::Ne: return 3;
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge: return 4;
    case ExprOp::Add:
    case ExprOp::Sub: return 5;
    case ExprOp::Mul:
    case ExprOp::Div:
    case ExprOp::Mod: return 6;
    case ExprOp::Not:
    case ExprOp::Neg: return 7;
    default: return 8;
  }
}

std::string_view binary_symbol(ExprOp op)
{
  switch (op) {
    case ExprOp::Or: return "||";
    case ExprOp::And: return "&&";
    case ExprOp::Eq: return "==";
    case ExprOp::Ne: return "!=";
    case ExprOp::Lt: return "<";
    case ExprOp::Le: return "<=";
    case ExprOp::Gt: return ">";
    case ExprOp::Ge: return ">=";
    case ExprOp::Add: return "+";
    case ExprOp::Sub: return "-";
    case ExprOp::Mul: return "*";
    case ExprOp::Div: return "/";
    default: return "%";
  }
}

std::string string_literal(const std::string& s)
{
  std::string out = "\"";
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          const char* digits = "0123456789abcdef";
          out += "\\x";
          out.push_back(digits[c >> 4]);
          out.push_back(digits[c & 15]);
        } else {
          out.push_back(ch);
        }
    }
  }
  out += "\"";
  return out;
}

std::string literal_text(const Value& v)
{
  switch (type_of(v)) {
    case ValueType::Bool: return std::get<bool>(v) ? "true" : "false";
    case ValueType::Int: return std::to_string(std::get<std::int64_t>(v));
    case ValueType::Float: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(v));
      std::string s = buf;
      if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
      return s;
    }
    case ValueType::String: return string_literal(std::get<std::string>(v));
  }
  return "";
}

std::string print_expr_prec(const Expr& e, int min_prec)
{
  std::string s;
  switch (e.op) {
    case ExprOp::Literal: s = literal_text(e.literal); break;
    case ExprOp::Ref: s = e.name; break;
    case ExprOp::Present: s = "present(" + e.name + ")"; break;
    case ExprOp::Not: s = "!" + print_expr_prec(e.args[0], 7); break;
    case ExprOp::Neg: s = "-(" + print_expr_prec(e.args[0], 0) + ")"; break;
    case ExprOp::Cond:
      s = print_expr_prec(e.args[0], 1) + " ? " + print_expr_prec(e.args[1], 0) + " : " +
          print_expr_prec(e.args[2], 0);
      break;
    default: {
      const int p = expr_prec(e);
      s = print_expr_prec(e.args[0], p) + " " + std::string(binary_symbol(e.op)) + " " +
          print_expr_prec(e.args[1], p + 1);
    }
  }
  if (expr_prec(e) < min_prec) return "(" + s + ")";
  return s;
}

std::string ref_list(const std::vector<Ref>& refs)
{
  std::string s = "(";
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (i != 0) s += ", ";
    s += refs[i].name;
  }
  return s + ")";
}

std::string iface_text(const BtNode& n)
{
  if (n.sources.empty() && n.effects.empty()) return "";
  std::string s = " " + ref_list(n.sources);
  if (!n.effects.empty()) s += " -> " + ref_list(n.effects);
  return s;
}

void print_body(std::string& out, const TaskBody& body, const std::string& indent)
{
  if (const auto* eb = std::get_if<ExternBody>(&body)) {
    out += "{= @extern " + eb->callback + " =}\n";
    return;
  }
  if (const auto* xb = std::get_if<ExprBody>(&body)) {
    out += "{= @expr " + print_expr(xb->condition) + " =}\n";
    return;
  }
  const auto& sb = std::get<ScriptBody>(body);
  out += "{=\n" + indent + "  @script\n";
  for (const auto& step : sb.steps) {
    out += indent + "  step {";
    for (const auto& a : step.emits) out += " emit " + a.target + " = " + print_expr(a.value) + ";";
    for (const auto& a : step.state_updates) out += " state " + a.target + " = " + print_expr(a.value) + ";";
    std::string st(status_name(step.status));
    for (auto& c : st) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out += " status " + st + " }\n";
  }
  out += indent + "  " + (sb.tail == ScriptTail::Loop ? "loop" : "hold") + "\n";
  out += indent + "=}\n";
}

void print_node(std::string& out, const BtNode& n, const std::string& indent)
{
  if (n.leaf()) {
    out += indent + std::string(node_kind_name(n.kind)) + " " + string_literal(n.label);
    if (n.states.empty()) {
      out += iface_text(n) + " ";
      print_body(out, n.body, indent);
      return;
    }
    out += " {\n";
    for (const auto& s : n.states) {
      out += indent + "  state " + s.name + ": " + std::string(type_name(s.type)) + " = " + literal_text(s.initial) +
             "\n";
    }
    out += indent + "  reaction" + iface_text(n) + " ";
    print_body(out, n.body, indent + "  ");
    out += indent + "}\n";
    return;
  }
  out += indent + std::string(node_kind_name(n.kind));
  if (n.kind == NodeKind::Parallel) out += "(" + std::to_string(n.threshold) + ")";
  out += " {\n";
  for (const auto& c : n.channels) {
    out += indent + "  channel " + c.name + ": " + std::string(type_name(c.type)) + "\n";
  }
  for (const auto& c : n.children) print_node(out, c, indent + "  ");
  out += indent + "}\n";
}

}  // namespace

std::string print_expr(const Expr& e) { return print_expr_prec(e, 0); }

std::string pretty_print(const BtDef& def)
{
  std::string out = "behaviortree " + def.name + " {\n";
  for (const auto& p : def.ports) {
    out += std::string("  ") + (p.direction == PortDirection::Input ? "input " : "output ") + p.name + ": " +
           std::string(type_name(p.type)) + "\n";
  }
  print_node(out, def.root, "  ");
  out += "}\n";
  return out;
}

}  // namespace btflow
