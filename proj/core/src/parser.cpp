#include "leaklab/parser.hpp"

#include <cctype>
#include <charconv>
#include <functional>
#include <unordered_set>
#include <utility>

#include "leaklab/error.hpp"

namespace leaklab {

namespace {

enum class Tok : std::uint8_t {
  Ident, Int, Str,
  LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Semi, Colon, Comma, Dot, DotDot,
  Assign,  // '=' (also equality inside expressions)
  EqEq, Ne, Lt, Le, Gt, Ge,
  Plus, Minus, Star, Bang, AndAnd, OrOr, Arrow, DArrow,
  At, AnnOpen, AnnClose,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Value value = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> k = {
      "var", "int", "bool", "label", "dynamic", "secret", "thread", "skip", "print",
      "delay", "if", "then", "else", "while", "do", "await", "true", "false", "and",
      "or", "not", "post", "forall", "exists", "in", "at", "approx", "t"};
  return k;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          advance();
        }
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        t.kind = Tok::Int;
        t.text = std::string(src_.substr(start, pos_ - start));
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
        if (ec != std::errc()) throw ParseError("integer literal out of range", t.line, t.column);
      } else if (c == '\'' || c == '"' || c == '`') {
        // 'a', "a" and the listing style `a' are all accepted.
        const char close = c == '`' ? '\'' : c;
        advance();
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != close && src_[pos_] != '\n') advance();
        if (pos_ >= src_.size() || src_[pos_] != close) {
          throw ParseError("unterminated string literal", t.line, t.column);
        }
        t.kind = Tok::Str;
        t.text = std::string(src_.substr(start, pos_ - start));
        advance();
      } else {
        t.kind = punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  bool peek(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void skip_space() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      } else if (peek("//") || src_[pos_] == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Tok punct(Token& t) {
    struct Entry {
      std::string_view text;
      Tok kind;
    };
    static constexpr Entry table[] = {
        {"<->", Tok::DArrow}, {"{|", Tok::AnnOpen}, {"|}", Tok::AnnClose}, {"..", Tok::DotDot},
        {"==", Tok::EqEq},    {"!=", Tok::Ne},      {"<=", Tok::Le},       {">=", Tok::Ge},
        {"&&", Tok::AndAnd},  {"||", Tok::OrOr},    {"->", Tok::Arrow},    {":=", Tok::Assign},   {"{", Tok::LBrace},
        {"}", Tok::RBrace},   {"(", Tok::LParen},   {")", Tok::RParen},    {"[", Tok::LBracket},
        {"]", Tok::RBracket}, {";", Tok::Semi},     {":", Tok::Colon},     {",", Tok::Comma},
        {".", Tok::Dot},      {"=", Tok::Assign},   {"<", Tok::Lt},        {">", Tok::Gt},
        {"+", Tok::Plus},     {"-", Tok::Minus},    {"*", Tok::Star},      {"!", Tok::Bang},
        {"@", Tok::At},
    };
    for (const auto& e : table) {
      if (peek(e.text)) {
        t.text = std::string(e.text);
        for (std::size_t i = 0; i < e.text.size(); ++i) advance();
        return e.kind;
      }
    }
    throw ParseError(std::string("unexpected character '") + src_[pos_] + "'", line_, col_);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

bool is_label_name(const std::string& s) {
  if (s.size() < 2 || s[0] != 'l') return false;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

StmtId label_number(const Token& t) {
  if (!is_label_name(t.text)) throw ParseError("expected a location label like l3", t.line, t.column);
  StmtId out = 0;
  auto [p, ec] = std::from_chars(t.text.data() + 1, t.text.data() + t.text.size(), out);
  if (ec != std::errc()) throw ParseError("label number out of range", t.line, t.column);
  return out;
}

/// Annotation collected during parsing, before thread-qualified locations
/// can be resolved.
struct PendingAnnotation {
  AnnotationKind kind;
  ThreadId thread;
  StmtId label;
  ExprPtr assertion;
  std::size_t line;
  std::size_t column;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, const Program* context_program)
      : toks_(std::move(toks)), ctx_(context_program) {}

  ParsedSource parse_file() {
    ProgramTree tree;
    while (peek_ident("var")) parse_decl(tree.vars);
    decls_ = &tree.vars;
    if (!peek_ident("thread")) error("expected 'thread'");
    std::unordered_set<std::string> thread_names;
    while (peek_ident("thread")) {
      const Token& at = cur();
      ThreadTree tt = parse_thread(static_cast<ThreadId>(tree.threads.size()));
      if (!thread_names.insert(tt.name).second) {
        throw ParseError("duplicate thread name '" + tt.name + "'", at.line, at.column);
      }
      tree.threads.push_back(std::move(tt));
    }
    expect(Tok::End, "end of input");

    ParsedSource out;
    try {
      out.program = label_statements(tree);
    } catch (const SemanticError& e) {
      throw ParseError(e.what(), 1, 1);
    }
    for (auto& pa : pending_) {
      RawAnnotation ra;
      ra.kind = pa.kind;
      ra.at = Location{pa.thread, pa.label};
      ra.line = pa.line;
      ra.column = pa.column;
      ra.assertion = resolve(pa.assertion, out.program, pa.thread, pa.line, pa.column);
      check_bool(*ra.assertion, out.program, pa.line, pa.column);
      out.annotations.push_back(std::move(ra));
    }
    return out;
  }

  ExprPtr parse_standalone_assertion(std::optional<ThreadId> context) {
    decls_ = &ctx_->vars;
    const Token& start = cur();
    ExprPtr e = parse_expr();
    expect(Tok::End, "end of assertion");
    std::optional<ThreadId> ctx = context;
    if (!ctx && ctx_->threads.size() == 1) ctx = 0;
    ExprPtr r = resolve(e, *ctx_, ctx ? *ctx : kUnresolvedThread, start.line, start.column);
    check_bool(*r, *ctx_, start.line, start.column);
    return r;
  }

 private:
  // -- token helpers -------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& look(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool peek(Tok k) const { return cur().kind == k; }
  bool peek_ident(std::string_view word) const { return cur().kind == Tok::Ident && cur().text == word; }

  [[noreturn]] void error(const std::string& msg) const {
    const Token& t = cur();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", found " + got, t.line, t.column);
  }

  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  Token expect(Tok k, const char* what) {
    if (!peek(k)) error(std::string("expected ") + what);
    return take();
  }

  void expect_ident(std::string_view word) {
    if (!peek_ident(word)) error("expected '" + std::string(word) + "'");
    take();
  }

  bool accept(Tok k) {
    if (!peek(k)) return false;
    take();
    return true;
  }

  bool accept_ident(std::string_view word) {
    if (!peek_ident(word)) return false;
    take();
    return true;
  }

  std::string expect_name(const char* what) {
    if (!peek(Tok::Ident) || keywords().count(cur().text)) error(std::string("expected ") + what);
    return take().text;
  }

  Value parse_signed_int() {
    bool neg = accept(Tok::Minus);
    Token t = expect(Tok::Int, "integer");
    return neg ? -t.value : t.value;
  }

  // -- declarations ----------------------------------------------------------

  void parse_decl(std::vector<VarDecl>& vars) {
    expect_ident("var");
    const Token& name_tok = cur();
    VarDecl d;
    d.name = expect_name("variable name");
    for (const auto& v : vars) {
      if (v.name == d.name) {
        throw ParseError("duplicate declaration of '" + d.name + "'", name_tok.line, name_tok.column);
      }
    }
    expect(Tok::Colon, "':'");
    if (accept_ident("bool")) {
      d.type = Type::Bool;
      d.lo = 0;
      d.hi = 1;
    } else if (accept_ident("int")) {
      d.type = Type::Int;
      expect(Tok::LBracket, "'[' with an int domain such as int[0..3]");
      d.lo = parse_signed_int();
      expect(Tok::DotDot, "'..'");
      d.hi = parse_signed_int();
      expect(Tok::RBracket, "']'");
      if (d.lo > d.hi) throw ParseError("empty domain for '" + d.name + "'", name_tok.line, name_tok.column);
    } else {
      error("expected a type (int[lo..hi] or bool)");
    }
    const bool labelled = accept_ident("label");
    if (labelled) d.label = expect_name("security label");
    if (accept_ident("dynamic")) d.dynamic = true;
    d.init = d.lo;
    if (accept(Tok::Assign)) {
      const Token& init_tok = cur();
      if (accept_ident("secret")) {
        d.secret = true;
        if (!labelled) d.label = "high";
      } else if (d.type == Type::Bool) {
        if (accept_ident("true")) {
          d.init = 1;
        } else if (accept_ident("false")) {
          d.init = 0;
        } else {
          error("expected true, false or secret");
        }
      } else {
        d.init = parse_signed_int();
        if (!d.in_domain(d.init)) {
          throw ParseError("initial value of '" + d.name + "' is outside its domain", init_tok.line,
                           init_tok.column);
        }
      }
    }
    expect(Tok::Semi, "';'");
    vars.push_back(std::move(d));
  }

  // -- threads and statements -------------------------------------------------

  ThreadTree parse_thread(ThreadId index) {
    expect_ident("thread");
    ThreadTree tt;
    tt.name = expect_name("thread name");
    thread_ = index;
    next_label_ = 0;
    expect(Tok::LBrace, "'{'");
    while (!peek(Tok::RBrace) && !peek_ident("post") && !is_exit_marker()) {
      tt.body.push_back(parse_annotated_stmt(false));
    }
    if (is_exit_marker()) {
      check_label_marker(take());
      take();  // ':'
    }
    if (peek_ident("post")) {
      take();
      const Token& at = cur();
      ExprPtr a = parse_annotation_body();
      pending_.push_back({AnnotationKind::Post, thread_, next_label_, a, at.line, at.column});
    }
    expect(Tok::RBrace, "'}'");
    return tt;
  }

  /// `lN:` right before the closing brace marks the exit label.
  bool is_exit_marker() const {
    return peek(Tok::Ident) && is_label_name(cur().text) && look(1).kind == Tok::Colon &&
           (look(2).kind == Tok::RBrace || (look(2).kind == Tok::Ident && look(2).text == "post"));
  }

  void check_label_marker(const Token& t) {
    const StmtId n = label_number(t);
    if (n != next_label_) {
      throw ParseError("label " + t.text + " does not match its position (expected l" +
                           std::to_string(next_label_) + ")",
                       t.line, t.column);
    }
  }

  ExprPtr parse_annotation_body() {
    expect(Tok::AnnOpen, "'{|'");
    ExprPtr e = parse_expr();
    expect(Tok::AnnClose, "'|}'");
    return e;
  }

  StmtTree parse_annotated_stmt(bool in_await) {
    struct Note {
      AnnotationKind kind;
      ExprPtr expr;
      std::size_t line, column;
    };
    std::vector<Note> notes;
    for (;;) {
      if (peek(Tok::AnnOpen)) {
        const Token& t = cur();
        notes.push_back({AnnotationKind::Pre, parse_annotation_body(), t.line, t.column});
      } else if (peek(Tok::At) && look(1).kind == Tok::Ident && look(1).text == "leaky") {
        const Token& t = cur();
        take();
        take();
        notes.push_back({AnnotationKind::Leaky, parse_annotation_body(), t.line, t.column});
      } else {
        break;
      }
    }
    if (peek(Tok::Ident) && is_label_name(cur().text) && look(1).kind == Tok::Colon) {
      check_label_marker(take());
      take();
    }
    const StmtId label = next_label_;
    for (auto& n : notes) {
      if (in_await) {
        throw ParseError("annotations are not allowed inside an await body", n.line, n.column);
      }
      pending_.push_back({n.kind, thread_, label, n.expr, n.line, n.column});
    }
    return parse_stmt(in_await);
  }

  std::vector<StmtTree> parse_body(bool in_await) {
    std::vector<StmtTree> out;
    if (accept(Tok::LBrace)) {
      while (!accept(Tok::RBrace)) {
        if (peek(Tok::End)) error("expected '}'");
        out.push_back(parse_annotated_stmt(in_await));
      }
    } else {
      out.push_back(parse_annotated_stmt(in_await));
    }
    return out;
  }

  StmtTree parse_stmt(bool in_await) {
    const Token start = cur();
    ++next_label_;
    if (accept_ident("skip")) {
      end_simple();
      return build::skip();
    }
    if (accept_ident("print")) {
      expect(Tok::LParen, "'('");
      ExprPtr arg;
      if (peek(Tok::Str)) {
        arg = make_str(take().text);
      } else {
        arg = parse_program_expr();
      }
      expect(Tok::RParen, "')'");
      end_simple();
      return build::print(arg);
    }
    if (accept_ident("delay")) {
      expect(Tok::LParen, "'('");
      ExprPtr arg = parse_program_expr();
      expect_type(*arg, Type::Int, start, "delay argument");
      expect(Tok::RParen, "')'");
      end_simple();
      return build::delay(arg);
    }
    if (accept_ident("if")) {
      ExprPtr g = parse_guard(start);
      expect_ident("then");
      auto then_branch = parse_body(in_await);
      std::vector<StmtTree> else_branch;
      if (accept_ident("else")) else_branch = parse_body(in_await);
      return build::if_(g, std::move(then_branch), std::move(else_branch));
    }
    if (accept_ident("while")) {
      ExprPtr g = parse_guard(start);
      expect_ident("do");
      auto body = parse_body(in_await);
      accept_ident("done");
      return build::while_(g, std::move(body));
    }
    if (accept_ident("await")) {
      if (in_await) throw ParseError("nested await is not allowed", start.line, start.column);
      ExprPtr g = parse_guard(start);
      expect_ident("then");
      auto body = parse_body(true);
      return build::await(g, std::move(body));
    }
    if (peek(Tok::Ident) && look(1).kind == Tok::Assign) {
      const Token name = take();
      take();
      const int slot = lookup_var(name);
      ExprPtr rhs = parse_program_expr();
      if (type_of(*rhs, decl_program()) != (*decls_)[slot].type) {
        throw ParseError("type error in assignment to '" + name.text + "'", name.line, name.column);
      }
      end_simple();
      return build::assign(slot, rhs);
    }
    error("expected a statement");
  }

  // `if g then x = 1 else x = 2;` needs no semicolon before `else`.
  void end_simple() {
    if (peek_ident("else")) return;
    expect(Tok::Semi, "';'");
  }

  ExprPtr parse_guard(const Token& at) {
    ExprPtr g = parse_program_expr();
    // `if h then` with an int h means h != 0.
    if (type_of(*g, decl_program()) == Type::Int) g = make_binary(BinOp::Ne, g, make_int(0));
    expect_type(*g, Type::Bool, at, "guard");
    return g;
  }

  ExprPtr parse_program_expr() {
    const Token& at = cur();
    ExprPtr e = parse_expr();
    if (is_assertion_only(*e)) {
      throw ParseError("assertion-only construct used in a program expression", at.line, at.column);
    }
    try {
      type_of(*e, decl_program());
    } catch (const SemanticError& err) {
      throw ParseError(err.what(), at.line, at.column);
    }
    return e;
  }

  void expect_type(const Expr& e, Type want, const Token& at, const char* what) {
    Type got;
    try {
      got = type_of(e, decl_program());
    } catch (const SemanticError& err) {
      throw ParseError(err.what(), at.line, at.column);
    }
    if (got != want) {
      throw ParseError(std::string(what) + " must be " + (want == Type::Int ? "int" : "bool"), at.line,
                       at.column);
    }
  }

  /// A program view over the declarations parsed so far, for type checks.
  const Program& decl_program() {
    if (ctx_) return *ctx_;
    if (decl_view_.vars.size() != decls_->size()) decl_view_.vars = *decls_;
    return decl_view_;
  }

  int lookup_var(const Token& name) {
    for (std::size_t i = 0; i < decls_->size(); ++i) {
      if ((*decls_)[i].name == name.text) return static_cast<int>(i);
    }
    throw ParseError("undeclared variable '" + name.text + "'", name.line, name.column);
  }

  // -- expressions -------------------------------------------------------------

  ExprPtr parse_expr() {
    if (peek_ident("forall") || peek_ident("exists")) {
      const Quantifier q = take().text == "forall" ? Quantifier::ForAll : Quantifier::Exists;
      std::string var = expect_name("bound variable");
      expect_ident("in");
      Value lo = parse_signed_int();
      expect(Tok::DotDot, "'..'");
      Value hi = parse_signed_int();
      expect(Tok::Colon, "':'");
      bound_.push_back(var);
      ExprPtr body = parse_expr();
      bound_.pop_back();
      return make_quant(q, var, lo, hi, body);
    }
    return parse_implies();
  }

  ExprPtr parse_implies() {
    ExprPtr lhs = parse_or();
    if (accept(Tok::Arrow)) return make_binary(BinOp::Implies, lhs, parse_implies_rhs());
    if (accept(Tok::DArrow)) return make_binary(BinOp::Iff, lhs, parse_or());
    return lhs;
  }

  ExprPtr parse_implies_rhs() {
    if (peek_ident("forall") || peek_ident("exists")) return parse_expr();
    return parse_implies();
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (accept(Tok::OrOr) || accept_ident("or")) lhs = make_binary(BinOp::Or, lhs, parse_and());
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_not();
    while (accept(Tok::AndAnd) || accept_ident("and")) lhs = make_binary(BinOp::And, lhs, parse_not());
    return lhs;
  }

  ExprPtr parse_not() {
    if (accept(Tok::Bang) || accept_ident("not")) return make_unary(UnOp::Not, parse_not());
    return parse_cmp();
  }

  ExprPtr parse_cmp() {
    ExprPtr lhs = parse_add();
    BinOp op;
    switch (cur().kind) {
      case Tok::Assign:
      case Tok::EqEq: op = BinOp::Eq; break;
      case Tok::Ne: op = BinOp::Ne; break;
      case Tok::Lt: op = BinOp::Lt; break;
      case Tok::Le: op = BinOp::Le; break;
      case Tok::Gt: op = BinOp::Gt; break;
      case Tok::Ge: op = BinOp::Ge; break;
      default: return lhs;
    }
    take();
    return make_binary(op, lhs, parse_add());
  }

  ExprPtr parse_add() {
    ExprPtr lhs = parse_mul();
    for (;;) {
      if (accept(Tok::Plus)) {
        lhs = make_binary(BinOp::Add, lhs, parse_mul());
      } else if (accept(Tok::Minus)) {
        lhs = make_binary(BinOp::Sub, lhs, parse_mul());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_mul() {
    ExprPtr lhs = parse_unary();
    while (accept(Tok::Star)) lhs = make_binary(BinOp::Mul, lhs, parse_unary());
    return lhs;
  }

  ExprPtr parse_unary() {
    if (accept(Tok::Minus)) return make_unary(UnOp::Neg, parse_unary());
    return parse_primary();
  }

  /// `l7`, `T2.l7`; thread name kept in the node until resolution.
  std::pair<std::string, StmtId> parse_location_ref() {
    Token first = expect(Tok::Ident, "location");
    if (accept(Tok::Dot)) {
      Token second = expect(Tok::Ident, "location label");
      return {first.text, label_number(second)};
    }
    return {"", label_number(first)};
  }

  ExprPtr parse_primary() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::Int:
        return make_int(take().value);
      case Tok::LParen: {
        take();
        ExprPtr e = parse_expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Str:
        throw ParseError("string literal is only allowed as a print argument", t.line, t.column);
      case Tok::Ident:
        break;
      default:
        error("expected an expression");
    }
    if (accept_ident("true")) return make_bool(true);
    if (accept_ident("false")) return make_bool(false);
    if (t.text == "t") {
      take();
      if (!accept(Tok::At)) return make_clock();
      auto [thread, label] = parse_location_ref();
      std::optional<std::uint32_t> arrival;
      if (accept(Tok::LBracket)) {
        Token idx = expect(Tok::Int, "arrival index");
        if (idx.value < 1) throw ParseError("arrival index is 1-based", idx.line, idx.column);
        arrival = static_cast<std::uint32_t>(idx.value);
        expect(Tok::RBracket, "']'");
      }
      auto e = std::make_shared<Expr>(*make_snapshot(Location{kUnresolvedThread, label}, arrival));
      e->name = thread;
      return e;
    }
    if (t.text == "at" && look(1).kind == Tok::LParen) {
      take();
      take();
      auto [thread, label] = parse_location_ref();
      expect(Tok::RParen, "')'");
      auto e = std::make_shared<Expr>(*make_at(Location{kUnresolvedThread, label}));
      e->name = thread;
      return e;
    }
    if (t.text == "approx" && look(1).kind == Tok::LParen) {
      take();
      take();
      ExprPtr a = parse_add();
      expect(Tok::Comma, "','");
      ExprPtr b = parse_add();
      std::optional<ExprPtr> theta;
      if (accept(Tok::Comma)) theta = parse_add();
      expect(Tok::RParen, "')'");
      return make_approx(a, b, theta);
    }
    if (keywords().count(t.text)) error("unexpected keyword");
    Token name = take();
    for (std::size_t i = bound_.size(); i-- > 0;) {
      if (bound_[i] == name.text) return make_bound(name.text, static_cast<int>(bound_.size() - 1 - i));
    }
    return make_var(name.text, lookup_var(name));
  }

  // -- post-pass resolution ------------------------------------------------------

  static ExprPtr resolve(const ExprPtr& e, const Program& p, ThreadId context, std::size_t line,
                         std::size_t col) {
    if (e->kind == ExprKind::Snapshot || e->kind == ExprKind::At) {
      ThreadId th = context;
      if (!e->name.empty()) {
        auto found = p.find_thread(e->name);
        if (!found) throw ParseError("unknown thread '" + e->name + "'", line, col);
        th = *found;
      } else if (th == kUnresolvedThread) {
        throw ParseError("ambiguous location l" + std::to_string(e->loc.label) +
                             "; qualify it with a thread name",
                         line, col);
      }
      if (e->loc.label > p.threads[th].exit_label()) {
        throw ParseError("unknown location " + p.threads[th].name + ".l" + std::to_string(e->loc.label),
                         line, col);
      }
      auto r = std::make_shared<Expr>(*e);
      r->loc.thread = th;
      r->name.clear();
      return r;
    }
    if (e->args.empty()) return e;
    auto r = std::make_shared<Expr>(*e);
    for (auto& a : r->args) a = resolve(a, p, context, line, col);
    return r;
  }

  static void check_bool(const Expr& e, const Program& p, std::size_t line, std::size_t col) {
    try {
      if (type_of(e, p) != Type::Bool) throw SemanticError("assertion must be boolean");
    } catch (const SemanticError& err) {
      throw ParseError(err.what(), line, col);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Program* ctx_ = nullptr;
  const std::vector<VarDecl>* decls_ = nullptr;
  Program decl_view_;
  ThreadId thread_ = 0;
  StmtId next_label_ = 0;
  std::vector<std::string> bound_;
  std::vector<PendingAnnotation> pending_;
};

}  // namespace

ParsedSource parse_source(std::string_view text) {
  Parser parser(Lexer(text).run(), nullptr);
  return parser.parse_file();
}

Program parse_program(std::string_view text) { return parse_source(text).program; }

ExprPtr parse_assertion(std::string_view text, const Program& p, std::optional<ThreadId> context) {
  Parser parser(Lexer(text).run(), &p);
  return parser.parse_standalone_assertion(context);
}

}  // namespace leaklab
