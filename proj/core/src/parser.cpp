#include <cctype>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "unitcarve/program.hpp"

namespace unitcarve {

namespace {

constexpr std::pair<std::string_view, Builtin> kBuiltins[] = {
    {"input", Builtin::Input},       {"arg", Builtin::Arg},
    {"argc", Builtin::Argc},         {"malloc", Builtin::Malloc},
    {"free", Builtin::Free},         {"strlen", Builtin::Strlen},
    {"atoi", Builtin::Atoi},         {"print_int", Builtin::PrintInt},
    {"print_str", Builtin::PrintStr}, {"assert", Builtin::Assert},
};

const std::set<std::string, std::less<>> kKeywords = {
    "int",  "double", "char",     "void",   "record", "if",   "else",
    "while", "return", "break",   "continue", "sizeof", "NULL",
};

// ---------------------------------------------------------------- lexer

struct Token {
  enum class Kind { Ident, Int, Double, Char, String, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  int64_t ival = 0;
  double dval = 0.0;
  SourceLoc loc;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          advance();
        }
        t.kind = Token::Kind::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (c == '\'') {
        advance();
        t.kind = Token::Kind::Char;
        t.ival = static_cast<unsigned char>(lex_char_body('\''));
        expect_char('\'', t.loc);
      } else if (c == '"') {
        advance();
        t.kind = Token::Kind::String;
        while (pos_ < src_.size() && src_[pos_] != '"') {
          t.text.push_back(lex_char_body('"'));
        }
        expect_char('"', t.loc);
      } else {
        static constexpr std::string_view kPuncts[] = {
            "->", "++", "--", "+=", "-=", "<=", ">=", "==", "!=", "&&", "||",
            "<<", ">>", "+",  "-",  "*",  "/",  "%",  "<",  ">",  "=",  "!",
            "&",  "|",  "^",  "~",  "(",  ")",  "{",  "}",  "[",  "]",  ";",
            ",",  ".",
        };
        bool found = false;
        for (auto p : kPuncts) {
          if (src_.substr(pos_, p.size()) == p) {
            t.kind = Token::Kind::Punct;
            t.text = std::string(p);
            for (size_t i = 0; i < p.size(); ++i) advance();
            found = true;
            break;
          }
        }
        if (!found) {
          throw ParseError(t.loc, std::string("unexpected character '") + c + "'");
        }
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

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (src_.substr(pos_, 2) == "/*") {
        SourceLoc at{line_, col_};
        advance();
        advance();
        while (pos_ < src_.size() && src_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= src_.size()) throw ParseError(at, "unterminated comment");
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    size_t start = pos_;
    bool is_double = false;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      is_double = true;
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      is_double = true;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    std::string text(src_.substr(start, pos_ - start));
    t.text = text;
    if (is_double) {
      t.kind = Token::Kind::Double;
      t.dval = std::strtod(text.c_str(), nullptr);
    } else {
      t.kind = Token::Kind::Int;
      uint64_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc()) throw ParseError(t.loc, "integer literal out of range");
      t.ival = static_cast<int64_t>(v);
    }
  }

  char lex_char_body(char quote) {
    if (pos_ >= src_.size() || src_[pos_] == '\n') {
      throw ParseError({line_, col_}, std::string("unterminated literal, expected ") + quote);
    }
    char c = src_[pos_];
    advance();
    if (c != '\\') return c;
    if (pos_ >= src_.size()) throw ParseError({line_, col_}, "bad escape");
    char e = src_[pos_];
    advance();
    switch (e) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case '0': return '\0';
      case '\\': return '\\';
      case '\'': return '\'';
      case '"': return '"';
      default:
        throw ParseError({line_, col_ - 1}, std::string("unknown escape \\") + e);
    }
  }

  void expect_char(char c, SourceLoc at) {
    if (pos_ >= src_.size() || src_[pos_] != c) {
      throw ParseError(at, std::string("unterminated literal, expected ") + c);
    }
    advance();
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------- parser

class Parser {
 public:
  Parser(std::vector<Token> toks, Program& prog) : toks_(std::move(toks)), prog_(prog) {
    for (size_t i = 0; i + 1 < toks_.size(); ++i) {
      if (is_ident(toks_[i], "record") && toks_[i + 1].kind == Token::Kind::Ident) {
        record_names_.insert(toks_[i + 1].text);
      }
    }
  }

  void parse_all() {
    while (peek().kind != Token::Kind::End) {
      if (is_ident(peek(), "record") && peek(1).kind == Token::Kind::Ident &&
          is_punct(peek(2), "{")) {
        parse_record();
      } else {
        parse_top_decl();
      }
    }
  }

 private:
  static bool is_ident(const Token& t, std::string_view s) {
    return t.kind == Token::Kind::Ident && t.text == s;
  }
  static bool is_punct(const Token& t, std::string_view s) {
    return t.kind == Token::Kind::Punct && t.text == s;
  }

  const Token& peek(size_t k = 0) const {
    size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept(std::string_view punct) {
    if (is_punct(peek(), punct)) {
      next();
      return true;
    }
    return false;
  }
  void expect(std::string_view punct) {
    if (!accept(punct)) {
      throw ParseError(peek().loc, "expected '" + std::string(punct) + "' but found " + describe(peek()));
    }
  }
  static std::string describe(const Token& t) {
    if (t.kind == Token::Kind::End) return "end of input";
    return "'" + t.text + "'";
  }
  std::string expect_ident() {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident || kKeywords.count(t.text)) {
      throw ParseError(t.loc, "expected identifier but found " + describe(t));
    }
    next();
    return t.text;
  }

  bool starts_type() const {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident) return false;
    if (t.text == "int" || t.text == "double" || t.text == "char" || t.text == "void" ||
        t.text == "record") {
      return true;
    }
    if (record_names_.count(t.text)) {
      const Token& n = peek(1);
      return is_punct(n, "*") || n.kind == Token::Kind::Ident;
    }
    return false;
  }

  TypeRef parse_base_type() {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident) throw ParseError(t.loc, "expected type but found " + describe(t));
    TypeRef base;
    if (t.text == "int") {
      base = MiniType::int_type();
    } else if (t.text == "double") {
      base = MiniType::double_type();
    } else if (t.text == "char") {
      base = MiniType::char_type();
    } else if (t.text == "void") {
      base = MiniType::void_type();
    } else if (t.text == "record") {
      next();
      const Token& n = peek();
      if (n.kind != Token::Kind::Ident || !record_names_.count(n.text)) {
        throw ParseError(n.loc, "unresolved record type " + describe(n));
      }
      base = MiniType::record_named(n.text);
    } else if (record_names_.count(t.text)) {
      base = MiniType::record_named(t.text);
    } else {
      throw ParseError(t.loc, "unresolved type name '" + t.text + "'");
    }
    next();
    while (accept("*")) base = MiniType::pointer_to(base);
    return base;
  }

  TypeRef parse_array_suffix(TypeRef t) {
    std::vector<int64_t> dims;
    while (is_punct(peek(), "[")) {
      next();
      const Token& n = peek();
      if (n.kind != Token::Kind::Int || n.ival <= 0) {
        throw ParseError(n.loc, "array length must be a positive integer");
      }
      dims.push_back(n.ival);
      next();
      expect("]");
    }
    for (auto it = dims.rbegin(); it != dims.rend(); ++it) t = MiniType::array_of(t, *it);
    return t;
  }

  void parse_record() {
    SourceLoc at = next().loc;  // record
    std::string name = expect_ident();
    if (prog_.records.find(name)) throw ParseError(at, "duplicate definition of record '" + name + "'");
    expect("{");
    RecordDef def;
    def.name = name;
    while (!accept("}")) {
      SourceLoc floc = peek().loc;
      TypeRef ft = parse_base_type();
      std::string fname = expect_ident();
      ft = parse_array_suffix(ft);
      expect(";");
      if (ft->kind == MiniType::Kind::Void) throw ParseError(floc, "field '" + fname + "' has void type");
      if (def.field(fname)) throw ParseError(floc, "duplicate field '" + fname + "'");
      def.fields.push_back({fname, ft, 0});
      field_locs_[name].push_back(floc);
    }
    accept(";");
    prog_.records.add(std::move(def));
  }

  void parse_top_decl() {
    SourceLoc at = peek().loc;
    TypeRef t = parse_base_type();
    std::string name = expect_ident();
    if (accept("(")) {
      FunctionDef fn;
      fn.name = name;
      fn.return_type = t;
      fn.loc = at;
      if (!(is_ident(peek(), "void") && is_punct(peek(1), ")")) && !is_punct(peek(), ")")) {
        do {
          SourceLoc ploc = peek().loc;
          TypeRef pt = parse_base_type();
          std::string pname = expect_ident();
          if (is_punct(peek(), "[")) throw ParseError(peek().loc, "array parameters are not supported; use a pointer");
          if (!pt->is_scalar()) throw ParseError(ploc, "parameter '" + pname + "' must have scalar type");
          fn.params.push_back({pname, pt});
        } while (accept(","));
      } else if (is_ident(peek(), "void")) {
        next();
      }
      expect(")");
      fn.body = parse_block();
      for (const auto& f : prog_.functions) {
        if (f.name == name) throw ParseError(at, "duplicate definition of function '" + name + "'");
      }
      if (builtin_named(name)) throw ParseError(at, "'" + name + "' redefines a builtin");
      prog_.functions.push_back(std::move(fn));
      return;
    }
    t = parse_array_suffix(t);
    GlobalDef g;
    g.name = name;
    g.type = t;
    g.loc = at;
    if (accept("=")) g.init = parse_global_init(t);
    expect(";");
    if (t->kind == MiniType::Kind::Void) throw ParseError(at, "global '" + name + "' has void type");
    for (const auto& other : prog_.globals) {
      if (other.name == name) throw ParseError(at, "duplicate definition of global '" + name + "'");
    }
    prog_.globals.push_back(std::move(g));
  }

  GlobalInit parse_global_init(const TypeRef& t) {
    const Token& tok = peek();
    bool neg = false;
    if (is_punct(tok, "-")) {
      neg = true;
      next();
    }
    const Token& v = peek();
    GlobalInit init;
    if (v.kind == Token::Kind::Int || v.kind == Token::Kind::Char) {
      if (!t->is_arithmetic() && !(t->is_pointer() && v.ival == 0)) {
        throw ParseError(v.loc, "initializer does not match type " + type_name(t));
      }
      int64_t x = neg ? -v.ival : v.ival;
      if (t->kind == MiniType::Kind::Double) {
        init.value = static_cast<double>(x);
      } else {
        init.value = x;
      }
    } else if (v.kind == Token::Kind::Double) {
      if (!t->is_arithmetic()) throw ParseError(v.loc, "initializer does not match type " + type_name(t));
      double x = neg ? -v.dval : v.dval;
      if (t->kind == MiniType::Kind::Double) {
        init.value = x;
      } else {
        init.value = static_cast<int64_t>(x);
      }
    } else if (v.kind == Token::Kind::String && !neg) {
      if (t->kind != MiniType::Kind::Array || t->elem->kind != MiniType::Kind::Char ||
          static_cast<int64_t>(v.text.size()) + 1 > t->length) {
        throw ParseError(v.loc, "string initializer requires a char array large enough to hold it");
      }
      init.value = v.text;
    } else if (is_ident(v, "NULL") && !neg) {
      if (!t->is_pointer()) throw ParseError(v.loc, "NULL initializer requires a pointer");
      init.value = int64_t{0};
    } else {
      throw ParseError(v.loc, "global initializer must be a literal");
    }
    next();
    return init;
  }

  StmtPtr parse_block() {
    auto blk = std::make_unique<Stmt>();
    blk->kind = Stmt::Kind::Block;
    blk->loc = peek().loc;
    expect("{");
    while (!accept("}")) {
      if (peek().kind == Token::Kind::End) throw ParseError(peek().loc, "expected '}' but found end of input");
      blk->body.push_back(parse_stmt());
    }
    return blk;
  }

  StmtPtr parse_stmt() {
    const Token& t = peek();
    if (is_punct(t, "{")) return parse_block();
    auto s = std::make_unique<Stmt>();
    s->loc = t.loc;
    if (is_ident(t, "if")) {
      next();
      s->kind = Stmt::Kind::If;
      expect("(");
      s->cond = parse_expr();
      expect(")");
      s->body.push_back(parse_stmt());
      if (is_ident(peek(), "else")) {
        next();
        s->body.push_back(parse_stmt());
      }
      return s;
    }
    if (is_ident(t, "while")) {
      next();
      s->kind = Stmt::Kind::While;
      expect("(");
      s->cond = parse_expr();
      expect(")");
      s->body.push_back(parse_stmt());
      return s;
    }
    if (is_ident(t, "return")) {
      next();
      s->kind = Stmt::Kind::Return;
      if (!is_punct(peek(), ";")) s->value = parse_expr();
      expect(";");
      return s;
    }
    if (is_ident(t, "break") || is_ident(t, "continue")) {
      s->kind = t.text == "break" ? Stmt::Kind::Break : Stmt::Kind::Continue;
      next();
      expect(";");
      return s;
    }
    if (starts_type()) {
      s->kind = Stmt::Kind::Decl;
      TypeRef dt = parse_base_type();
      s->name = expect_ident();
      s->decl_type = parse_array_suffix(dt);
      if (accept("=")) s->value = parse_expr();
      expect(";");
      return s;
    }
    ExprPtr e = parse_expr();
    if (accept("=")) {
      s->kind = Stmt::Kind::Assign;
      s->target = std::move(e);
      s->value = parse_expr();
    } else if (is_punct(peek(), "+=") || is_punct(peek(), "-=")) {
      s->kind = Stmt::Kind::CompoundAssign;
      s->op = next().text == "+=" ? BinOp::Add : BinOp::Sub;
      s->target = std::move(e);
      s->value = parse_expr();
    } else if (is_punct(peek(), "++") || is_punct(peek(), "--")) {
      s->kind = Stmt::Kind::IncDec;
      s->op = next().text == "++" ? BinOp::Add : BinOp::Sub;
      s->target = std::move(e);
    } else {
      s->kind = Stmt::Kind::ExprStmt;
      s->value = std::move(e);
    }
    expect(";");
    return s;
  }

  ExprPtr make(Expr::Kind k, SourceLoc loc) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->loc = loc;
    return e;
  }

  ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r, SourceLoc loc) {
    auto e = make(Expr::Kind::Binary, loc);
    e->bop = op;
    e->kids.push_back(std::move(l));
    e->kids.push_back(std::move(r));
    return e;
  }

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr l = parse_and();
    while (is_punct(peek(), "||")) {
      SourceLoc at = next().loc;
      l = binary(BinOp::Or, std::move(l), parse_and(), at);
    }
    return l;
  }
  ExprPtr parse_and() {
    ExprPtr l = parse_bitor();
    while (is_punct(peek(), "&&")) {
      SourceLoc at = next().loc;
      l = binary(BinOp::And, std::move(l), parse_bitor(), at);
    }
    return l;
  }
  ExprPtr parse_bitor() {
    ExprPtr l = parse_bitxor();
    while (is_punct(peek(), "|")) {
      SourceLoc at = next().loc;
      l = binary(BinOp::BitOr, std::move(l), parse_bitxor(), at);
    }
    return l;
  }
  ExprPtr parse_bitxor() {
    ExprPtr l = parse_bitand();
    while (is_punct(peek(), "^")) {
      SourceLoc at = next().loc;
      l = binary(BinOp::BitXor, std::move(l), parse_bitand(), at);
    }
    return l;
  }
  ExprPtr parse_bitand() {
    ExprPtr l = parse_equality();
    while (is_punct(peek(), "&")) {
      SourceLoc at = next().loc;
      l = binary(BinOp::BitAnd, std::move(l), parse_equality(), at);
    }
    return l;
  }
  ExprPtr parse_equality() {
    ExprPtr l = parse_relational();
    for (;;) {
      if (is_punct(peek(), "==") || is_punct(peek(), "!=")) {
        const Token& t = next();
        BinOp op = t.text == "==" ? BinOp::Eq : BinOp::Ne;
        l = binary(op, std::move(l), parse_relational(), t.loc);
      } else {
        return l;
      }
    }
  }
  ExprPtr parse_relational() {
    ExprPtr l = parse_shift();
    for (;;) {
      const Token& t = peek();
      BinOp op;
      if (is_punct(t, "<")) op = BinOp::Lt;
      else if (is_punct(t, "<=")) op = BinOp::Le;
      else if (is_punct(t, ">")) op = BinOp::Gt;
      else if (is_punct(t, ">=")) op = BinOp::Ge;
      else return l;
      SourceLoc at = next().loc;
      l = binary(op, std::move(l), parse_shift(), at);
    }
  }
  ExprPtr parse_shift() {
    ExprPtr l = parse_additive();
    for (;;) {
      if (is_punct(peek(), "<<") || is_punct(peek(), ">>")) {
        const Token& t = next();
        BinOp op = t.text == "<<" ? BinOp::Shl : BinOp::Shr;
        l = binary(op, std::move(l), parse_additive(), t.loc);
      } else {
        return l;
      }
    }
  }
  ExprPtr parse_additive() {
    ExprPtr l = parse_multiplicative();
    for (;;) {
      if (is_punct(peek(), "+") || is_punct(peek(), "-")) {
        const Token& t = next();
        BinOp op = t.text == "+" ? BinOp::Add : BinOp::Sub;
        l = binary(op, std::move(l), parse_multiplicative(), t.loc);
      } else {
        return l;
      }
    }
  }
  ExprPtr parse_multiplicative() {
    ExprPtr l = parse_unary();
    for (;;) {
      const Token& t = peek();
      BinOp op;
      if (is_punct(t, "*")) op = BinOp::Mul;
      else if (is_punct(t, "/")) op = BinOp::Div;
      else if (is_punct(t, "%")) op = BinOp::Mod;
      else return l;
      SourceLoc at = next().loc;
      l = binary(op, std::move(l), parse_unary(), at);
    }
  }

  ExprPtr parse_unary() {
    const Token& t = peek();
    UnOp op;
    if (is_punct(t, "-")) op = UnOp::Neg;
    else if (is_punct(t, "!")) op = UnOp::Not;
    else if (is_punct(t, "~")) op = UnOp::BitNot;
    else if (is_punct(t, "*")) op = UnOp::Deref;
    else if (is_punct(t, "&")) op = UnOp::AddrOf;
    else if (is_ident(t, "sizeof")) {
      SourceLoc at = next().loc;
      expect("(");
      auto e = make(Expr::Kind::SizeOf, at);
      TypeRef st = parse_base_type();
      e->operand_type = parse_array_suffix(st);
      expect(")");
      return e;
    } else {
      return parse_postfix();
    }
    SourceLoc at = next().loc;
    auto e = make(Expr::Kind::Unary, at);
    e->uop = op;
    e->kids.push_back(parse_unary());
    return e;
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    for (;;) {
      const Token& t = peek();
      if (is_punct(t, "[")) {
        SourceLoc at = next().loc;
        auto idx = make(Expr::Kind::Index, at);
        idx->kids.push_back(std::move(e));
        idx->kids.push_back(parse_expr());
        expect("]");
        e = std::move(idx);
      } else if (is_punct(t, ".") || is_punct(t, "->")) {
        bool arrow = t.text == "->";
        SourceLoc at = next().loc;
        auto f = make(arrow ? Expr::Kind::Arrow : Expr::Kind::Field, at);
        f->name = expect_ident();
        f->kids.push_back(std::move(e));
        e = std::move(f);
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::Int:
      case Token::Kind::Char: {
        auto e = make(Expr::Kind::IntLit, t.loc);
        e->ival = t.ival;
        e->type = t.kind == Token::Kind::Char ? MiniType::char_type() : MiniType::int_type();
        next();
        return e;
      }
      case Token::Kind::Double: {
        auto e = make(Expr::Kind::DoubleLit, t.loc);
        e->dval = t.dval;
        next();
        return e;
      }
      case Token::Kind::String: {
        auto e = make(Expr::Kind::StrLit, t.loc);
        e->name = t.text;
        next();
        return e;
      }
      case Token::Kind::Ident: {
        if (t.text == "NULL") {
          auto e = make(Expr::Kind::Null, t.loc);
          next();
          return e;
        }
        if (kKeywords.count(t.text)) throw ParseError(t.loc, "unexpected keyword '" + t.text + "'");
        SourceLoc at = t.loc;
        std::string name = t.text;
        next();
        if (accept("(")) {
          auto e = make(Expr::Kind::Call, at);
          e->name = name;
          if (!accept(")")) {
            do {
              e->kids.push_back(parse_expr());
            } while (accept(","));
            expect(")");
          }
          return e;
        }
        auto e = make(Expr::Kind::Local, at);
        e->name = name;
        return e;
      }
      case Token::Kind::Punct:
        if (t.text == "(") {
          next();
          ExprPtr e = parse_expr();
          expect(")");
          return e;
        }
        break;
      case Token::Kind::End:
        break;
    }
    throw ParseError(t.loc, "expected expression but found " + describe(t));
  }

 public:
  std::map<std::string, std::vector<SourceLoc>> field_locs_;

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  Program& prog_;
  std::set<std::string, std::less<>> record_names_;
};

// ---------------------------------------------------------------- checker

TypeRef decay(const TypeRef& t) {
  if (t && t->kind == MiniType::Kind::Array) return MiniType::pointer_to(t->elem);
  return t;
}

class Checker {
 public:
  explicit Checker(Program& prog) : prog_(prog) {}

  void run(const std::map<std::string, std::vector<SourceLoc>>& field_locs) {
    layout_records(field_locs);
    for (const auto& g : prog_.globals) check_type_resolves(g.type, g.loc);
    if (prog_.main_index() < 0) throw ParseError({1, 1}, "program has no function named 'main'");
    for (size_t i = 0; i < prog_.functions.size(); ++i) check_function(prog_.functions[i]);
  }

 private:
  void check_type_resolves(const TypeRef& t, SourceLoc at) {
    const MiniType* cur = t.get();
    while (cur->kind == MiniType::Kind::Pointer || cur->kind == MiniType::Kind::Array) cur = cur->elem.get();
    if (cur->kind == MiniType::Kind::Record && !prog_.records.find(cur->record)) {
      throw ParseError(at, "unresolved record type '" + cur->record + "'");
    }
  }

  // Computes packed layouts; rejects records that contain themselves by value.
  void layout_records(const std::map<std::string, std::vector<SourceLoc>>& field_locs) {
    RecordTable laid;
    std::map<std::string, int> state;  // 0 new, 1 in progress, 2 done
    std::vector<RecordDef> defs = prog_.records.all();
    std::map<std::string, RecordDef*> by_name;
    for (auto& d : defs) by_name[d.name] = &d;

    std::function<int64_t(const TypeRef&, SourceLoc)> size_of;
    std::function<void(RecordDef&)> visit = [&](RecordDef& d) {
      if (state[d.name] == 2) return;
      if (state[d.name] == 1) {
        throw ParseError(field_locs.at(d.name).empty() ? SourceLoc{1, 1} : field_locs.at(d.name).front(),
                         "record '" + d.name + "' contains itself without pointer indirection");
      }
      state[d.name] = 1;
      int64_t off = 0;
      const auto& locs = field_locs.count(d.name) ? field_locs.at(d.name) : std::vector<SourceLoc>{};
      for (size_t i = 0; i < d.fields.size(); ++i) {
        SourceLoc at = i < locs.size() ? locs[i] : SourceLoc{1, 1};
        d.fields[i].offset = off;
        off += size_of(d.fields[i].type, at);
      }
      d.size = off;
      state[d.name] = 2;
    };
    size_of = [&](const TypeRef& t, SourceLoc at) -> int64_t {
      switch (t->kind) {
        case MiniType::Kind::Char:
          return 1;
        case MiniType::Kind::Int:
        case MiniType::Kind::Double:
        case MiniType::Kind::Pointer: {
          const MiniType* cur = t.get();
          while (cur->kind == MiniType::Kind::Pointer || cur->kind == MiniType::Kind::Array) cur = cur->elem.get();
          if (cur->kind == MiniType::Kind::Record && !by_name.count(cur->record)) {
            throw ParseError(at, "unresolved record type '" + cur->record + "'");
          }
          return t->kind == MiniType::Kind::Char ? 1 : 8;
        }
        case MiniType::Kind::Array:
          return t->length * size_of(t->elem, at);
        case MiniType::Kind::Record: {
          auto it = by_name.find(t->record);
          if (it == by_name.end()) throw ParseError(at, "unresolved record type '" + t->record + "'");
          visit(*it->second);
          return it->second->size;
        }
        case MiniType::Kind::Void:
          throw ParseError(at, "void is not an object type");
      }
      return 0;
    };
    for (auto& d : defs) visit(d);
    for (auto& d : defs) {
      if (d.size == 0) {
        throw ParseError(field_locs.count(d.name) && !field_locs.at(d.name).empty() ? field_locs.at(d.name).front()
                                                                                    : SourceLoc{1, 1},
                         "record '" + d.name + "' has no fields");
      }
      laid.add(std::move(d));
    }
    prog_.records = std::move(laid);
  }

  struct Scope {
    std::map<std::string, int> names;
  };

  void check_function(FunctionDef& fn) {
    fn_ = &fn;
    fn.locals.clear();
    scopes_.clear();
    scopes_.emplace_back();
    check_type_resolves(fn.return_type, fn.loc);
    for (const auto& p : fn.params) {
      check_type_resolves(p.type, fn.loc);
      if (scopes_.back().names.count(p.name)) {
        throw ParseError(fn.loc, "duplicate parameter '" + p.name + "'");
      }
      scopes_.back().names[p.name] = static_cast<int>(fn.locals.size());
      fn.locals.push_back(p);
    }
    cond_counter_ = 0;
    loop_depth_ = 0;
    check_stmt(*fn.body);
    fn.cond_count = cond_counter_;
  }

  void check_stmt(Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Block:
        scopes_.emplace_back();
        for (auto& b : s.body) check_stmt(*b);
        scopes_.pop_back();
        return;
      case Stmt::Kind::Decl: {
        check_type_resolves(s.decl_type, s.loc);
        if (s.decl_type->kind == MiniType::Kind::Void) throw ParseError(s.loc, "variable '" + s.name + "' has void type");
        if (scopes_.back().names.count(s.name)) {
          throw ParseError(s.loc, "duplicate definition of '" + s.name + "' in the same scope");
        }
        if (s.value) {
          if (!s.decl_type->is_scalar()) throw ParseError(s.loc, "only scalar variables can be initialized");
          check_value(*s.value);
          require_convertible(*s.value, s.decl_type, s.value->loc);
        }
        s.slot = static_cast<int>(fn_->locals.size());
        fn_->locals.push_back({s.name, s.decl_type});
        scopes_.back().names[s.name] = s.slot;
        return;
      }
      case Stmt::Kind::Assign:
      case Stmt::Kind::CompoundAssign:
      case Stmt::Kind::IncDec: {
        TypeRef tt = check_lvalue(*s.target);
        if (!tt->is_scalar()) throw ParseError(s.loc, "cannot assign to a value of type " + type_name(tt));
        if (s.kind == Stmt::Kind::Assign) {
          check_value(*s.value);
          require_convertible(*s.value, tt, s.value->loc);
        } else {
          if (s.value) {
            TypeRef vt = check_value(*s.value);
            if (!(vt->is_arithmetic() && (tt->is_arithmetic() || (tt->is_pointer() && vt->is_integral())))) {
              throw ParseError(s.loc, "invalid operands to compound assignment");
            }
          } else if (!(tt->is_arithmetic() || tt->is_pointer())) {
            throw ParseError(s.loc, "invalid operand to increment");
          }
        }
        s.global_root = store_root(*s.target);
        return;
      }
      case Stmt::Kind::ExprStmt:
        check_expr(*s.value);
        return;
      case Stmt::Kind::If:
        s.cond_index = cond_counter_++;
        require_scalar(*s.cond);
        check_stmt(*s.body[0]);
        if (s.body.size() > 1) check_stmt(*s.body[1]);
        return;
      case Stmt::Kind::While:
        s.cond_index = cond_counter_++;
        require_scalar(*s.cond);
        ++loop_depth_;
        check_stmt(*s.body[0]);
        --loop_depth_;
        return;
      case Stmt::Kind::Return:
        if (fn_->return_type->kind == MiniType::Kind::Void) {
          if (s.value) throw ParseError(s.loc, "void function '" + fn_->name + "' returns a value");
        } else {
          if (!s.value) throw ParseError(s.loc, "function '" + fn_->name + "' must return a value");
          check_value(*s.value);
          require_convertible(*s.value, fn_->return_type, s.value->loc);
        }
        return;
      case Stmt::Kind::Break:
      case Stmt::Kind::Continue:
        if (loop_depth_ == 0) throw ParseError(s.loc, "break/continue outside of a loop");
        return;
    }
  }

  void require_scalar(Expr& e) {
    TypeRef t = check_value(e);
    if (!t->is_scalar()) throw ParseError(e.loc, "condition must be scalar, got " + type_name(t));
  }

  static bool is_null_constant(const Expr& e) {
    return e.kind == Expr::Kind::Null || (e.kind == Expr::Kind::IntLit && e.ival == 0);
  }

  void require_convertible(const Expr& e, const TypeRef& to, SourceLoc at) {
    TypeRef from = decay(e.type);
    if (to->is_arithmetic() && from->is_arithmetic()) return;
    if (to->is_pointer() && (from->is_pointer() || is_null_constant(e))) return;
    throw ParseError(at, "cannot convert " + type_name(from) + " to " + type_name(to));
  }

  // Checks an expression used for its value; returns the decayed type.
  TypeRef check_value(Expr& e) {
    TypeRef t = check_expr(e);
    if (t->kind == MiniType::Kind::Void) throw ParseError(e.loc, "void value used in an expression");
    if (t->kind == MiniType::Kind::Record) throw ParseError(e.loc, "record values cannot be used directly");
    return decay(t);
  }

  bool is_lvalue(const Expr& e) const {
    switch (e.kind) {
      case Expr::Kind::Local:
      case Expr::Kind::Global:
      case Expr::Kind::Index:
      case Expr::Kind::Arrow:
        return true;
      case Expr::Kind::Unary:
        return e.uop == UnOp::Deref;
      case Expr::Kind::Field:
        return is_lvalue(*e.kids[0]);
      default:
        return false;
    }
  }

  TypeRef check_lvalue(Expr& e) {
    TypeRef t = check_expr(e);
    if (!is_lvalue(e)) throw ParseError(e.loc, "expression is not assignable");
    return t;
  }

  int lookup_local(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->names.find(name);
      if (f != it->names.end()) return f->second;
    }
    return -1;
  }

  TypeRef check_expr(Expr& e) {
    e.type = compute(e);
    return e.type;
  }

  TypeRef compute(Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        return e.type ? e.type : MiniType::int_type();
      case Expr::Kind::DoubleLit:
        return MiniType::double_type();
      case Expr::Kind::StrLit: {
        e.slot = static_cast<int>(prog_.string_literals.size());
        prog_.string_literals.push_back(e.name);
        return MiniType::pointer_to(MiniType::char_type());
      }
      case Expr::Kind::Null:
        return MiniType::pointer_to(MiniType::void_type());
      case Expr::Kind::SizeOf:
        check_type_resolves(e.operand_type, e.loc);
        if (e.operand_type->kind == MiniType::Kind::Void) throw ParseError(e.loc, "sizeof(void)");
        e.ival = prog_.records.size_of(*e.operand_type);
        return MiniType::int_type();
      case Expr::Kind::Local:
      case Expr::Kind::Global: {
        int slot = lookup_local(e.name);
        if (slot >= 0) {
          e.kind = Expr::Kind::Local;
          e.slot = slot;
          return fn_->locals[slot].type;
        }
        int g = prog_.global_index(e.name);
        if (g >= 0) {
          e.kind = Expr::Kind::Global;
          e.slot = g;
          fn_->globals_used.insert(g);
          return prog_.globals[g].type;
        }
        throw ParseError(e.loc, "unresolved name '" + e.name + "'");
      }
      case Expr::Kind::Unary:
        return compute_unary(e);
      case Expr::Kind::Binary:
        return compute_binary(e);
      case Expr::Kind::Index: {
        TypeRef bt = check_value(*e.kids[0]);
        TypeRef it = check_value(*e.kids[1]);
        if (!bt->is_pointer()) throw ParseError(e.loc, "subscripted value is not an array or pointer");
        if (!it->is_integral()) throw ParseError(e.kids[1]->loc, "array index must be an integer");
        if (bt->elem->kind == MiniType::Kind::Void) throw ParseError(e.loc, "cannot index a void pointer");
        return bt->elem;
      }
      case Expr::Kind::Field: {
        TypeRef rt = check_expr(*e.kids[0]);
        if (rt->kind != MiniType::Kind::Record) throw ParseError(e.loc, "member access on non-record " + type_name(rt));
        return field_type(e, rt);
      }
      case Expr::Kind::Arrow: {
        TypeRef pt = check_value(*e.kids[0]);
        if (!pt->is_pointer() || pt->elem->kind != MiniType::Kind::Record) {
          throw ParseError(e.loc, "'->' applied to non-record pointer " + type_name(pt));
        }
        return field_type(e, pt->elem);
      }
      case Expr::Kind::Call:
      case Expr::Kind::BuiltinCall:
        return compute_call(e);
    }
    throw ParseError(e.loc, "unsupported expression");
  }

  TypeRef field_type(Expr& e, const TypeRef& rt) {
    const RecordDef& rec = prog_.records.at(rt->record);
    const FieldDef* f = rec.field(e.name);
    if (!f) throw ParseError(e.loc, "record '" + rec.name + "' has no field '" + e.name + "'");
    e.field_offset = f->offset;
    return f->type;
  }

  TypeRef compute_unary(Expr& e) {
    Expr& x = *e.kids[0];
    switch (e.uop) {
      case UnOp::Neg: {
        TypeRef t = check_value(x);
        if (!t->is_arithmetic()) throw ParseError(e.loc, "invalid operand to unary '-'");
        return t->kind == MiniType::Kind::Double ? MiniType::double_type() : MiniType::int_type();
      }
      case UnOp::Not: {
        TypeRef t = check_value(x);
        if (!t->is_scalar()) throw ParseError(e.loc, "invalid operand to '!'");
        return MiniType::int_type();
      }
      case UnOp::BitNot: {
        TypeRef t = check_value(x);
        if (!t->is_integral()) throw ParseError(e.loc, "invalid operand to '~'");
        return MiniType::int_type();
      }
      case UnOp::Deref: {
        TypeRef t = check_value(x);
        if (!t->is_pointer()) throw ParseError(e.loc, "cannot dereference non-pointer " + type_name(t));
        if (t->elem->kind == MiniType::Kind::Void) throw ParseError(e.loc, "cannot dereference a void pointer");
        return t->elem;
      }
      case UnOp::AddrOf: {
        TypeRef t = check_expr(x);
        if (!is_lvalue(x)) throw ParseError(e.loc, "cannot take the address of an rvalue");
        if (x.kind == Expr::Kind::Local) fn_->locals[x.slot].addressed = true;
        return MiniType::pointer_to(t);
      }
    }
    return MiniType::int_type();
  }

  TypeRef compute_binary(Expr& e) {
    TypeRef l = check_value(*e.kids[0]);
    TypeRef r = check_value(*e.kids[1]);
    auto arith_result = [&]() {
      return (l->kind == MiniType::Kind::Double || r->kind == MiniType::Kind::Double) ? MiniType::double_type()
                                                                                     : MiniType::int_type();
    };
    switch (e.bop) {
      case BinOp::Add:
        if (l->is_pointer() && r->is_integral()) return l;
        if (l->is_integral() && r->is_pointer()) return r;
        if (l->is_arithmetic() && r->is_arithmetic()) return arith_result();
        break;
      case BinOp::Sub:
        if (l->is_pointer() && r->is_integral()) return l;
        if (l->is_pointer() && r->is_pointer()) return MiniType::int_type();
        if (l->is_arithmetic() && r->is_arithmetic()) return arith_result();
        break;
      case BinOp::Mul:
      case BinOp::Div:
        if (l->is_arithmetic() && r->is_arithmetic()) return arith_result();
        break;
      case BinOp::Mod:
      case BinOp::BitAnd:
      case BinOp::BitOr:
      case BinOp::BitXor:
      case BinOp::Shl:
      case BinOp::Shr:
        if (l->is_integral() && r->is_integral()) return MiniType::int_type();
        break;
      case BinOp::Lt:
      case BinOp::Le:
      case BinOp::Gt:
      case BinOp::Ge:
      case BinOp::Eq:
      case BinOp::Ne:
        if (l->is_arithmetic() && r->is_arithmetic()) return MiniType::int_type();
        if (l->is_pointer() && (r->is_pointer() || is_null_constant(*e.kids[1]))) return MiniType::int_type();
        if (r->is_pointer() && is_null_constant(*e.kids[0])) return MiniType::int_type();
        break;
      case BinOp::And:
      case BinOp::Or:
        if (l->is_scalar() && r->is_scalar()) return MiniType::int_type();
        break;
    }
    throw ParseError(e.loc, "invalid operands " + type_name(l) + " and " + type_name(r) + " to binary operator");
  }

  TypeRef compute_call(Expr& e) {
    if (auto b = builtin_named(e.name)) {
      e.kind = Expr::Kind::BuiltinCall;
      e.builtin = *b;
      return check_builtin(e);
    }
    int fi = prog_.function_index(e.name);
    if (fi < 0) throw ParseError(e.loc, "unresolved function '" + e.name + "'");
    e.kind = Expr::Kind::Call;
    e.slot = fi;
    fn_->callees.insert(fi);
    const FunctionDef& callee = prog_.functions[fi];
    if (callee.params.size() != e.kids.size()) {
      throw ParseError(e.loc, "function '" + e.name + "' expects " + std::to_string(callee.params.size()) +
                                  " arguments, got " + std::to_string(e.kids.size()));
    }
    for (size_t i = 0; i < e.kids.size(); ++i) {
      check_value(*e.kids[i]);
      require_convertible(*e.kids[i], callee.params[i].type, e.kids[i]->loc);
    }
    return callee.return_type;
  }

  TypeRef check_builtin(Expr& e) {
    auto arity = [&](size_t n) {
      if (e.kids.size() != n) {
        throw ParseError(e.loc, "builtin '" + e.name + "' expects " + std::to_string(n) + " arguments");
      }
    };
    auto want_int = [&](size_t i) {
      TypeRef t = check_value(*e.kids[i]);
      if (!t->is_integral()) throw ParseError(e.kids[i]->loc, "builtin '" + e.name + "' expects an integer");
    };
    auto want_ptr = [&](size_t i) {
      TypeRef t = check_value(*e.kids[i]);
      if (!t->is_pointer() && !is_null_constant(*e.kids[i])) {
        throw ParseError(e.kids[i]->loc, "builtin '" + e.name + "' expects a pointer");
      }
    };
    TypeRef char_ptr = MiniType::pointer_to(MiniType::char_type());
    switch (e.builtin) {
      case Builtin::Input:
        arity(0);
        return char_ptr;
      case Builtin::Arg:
        arity(1);
        want_int(0);
        return char_ptr;
      case Builtin::Argc:
        arity(0);
        return MiniType::int_type();
      case Builtin::Malloc:
        arity(1);
        want_int(0);
        return MiniType::pointer_to(MiniType::void_type());
      case Builtin::Free:
        arity(1);
        want_ptr(0);
        return MiniType::void_type();
      case Builtin::Strlen:
      case Builtin::Atoi:
        arity(1);
        want_ptr(0);
        return MiniType::int_type();
      case Builtin::PrintInt: {
        arity(1);
        TypeRef t = check_value(*e.kids[0]);
        if (!t->is_arithmetic()) throw ParseError(e.kids[0]->loc, "print_int expects a number");
        return MiniType::void_type();
      }
      case Builtin::PrintStr:
        arity(1);
        want_ptr(0);
        return MiniType::void_type();
      case Builtin::Assert: {
        arity(1);
        TypeRef t = check_value(*e.kids[0]);
        if (!t->is_scalar()) throw ParseError(e.kids[0]->loc, "assert expects a scalar");
        return MiniType::void_type();
      }
    }
    return MiniType::void_type();
  }

  // Global attribution of a store: walk back through field/index/deref and
  // pointer loads until a non-address expression is reached.
  int store_root(const Expr& lv) const {
    switch (lv.kind) {
      case Expr::Kind::Global:
        return lv.slot;
      case Expr::Kind::Local:
        return -1;
      case Expr::Kind::Field:
        return store_root(*lv.kids[0]);
      case Expr::Kind::Index: {
        const Expr& base = *lv.kids[0];
        if (base.type && base.type->kind == MiniType::Kind::Array) return store_root(base);
        return address_root(base);
      }
      case Expr::Kind::Arrow:
        return address_root(*lv.kids[0]);
      case Expr::Kind::Unary:
        if (lv.uop == UnOp::Deref) return address_root(*lv.kids[0]);
        return -1;
      default:
        return -1;
    }
  }

  int address_root(const Expr& v) const {
    switch (v.kind) {
      case Expr::Kind::Global:
      case Expr::Kind::Local:
      case Expr::Kind::Field:
      case Expr::Kind::Index:
      case Expr::Kind::Arrow:
        return store_root(v);
      case Expr::Kind::Unary:
        if (v.uop == UnOp::Deref) return store_root(v);
        if (v.uop == UnOp::AddrOf) return store_root(*v.kids[0]);
        return -1;
      case Expr::Kind::Binary:
        if (v.bop == BinOp::Add || v.bop == BinOp::Sub) {
          if (decay(v.kids[0]->type)->is_pointer()) return address_root(*v.kids[0]);
          if (decay(v.kids[1]->type)->is_pointer()) return address_root(*v.kids[1]);
        }
        return -1;
      default:
        return -1;
    }
  }

  Program& prog_;
  FunctionDef* fn_ = nullptr;
  std::vector<Scope> scopes_;
  int cond_counter_ = 0;
  int loop_depth_ = 0;
};

}  // namespace

std::optional<Builtin> builtin_named(std::string_view name) {
  for (auto [n, b] : kBuiltins) {
    if (n == name) return b;
  }
  return std::nullopt;
}

std::string_view builtin_name(Builtin b) {
  for (auto [n, v] : kBuiltins) {
    if (v == b) return n;
  }
  return "?";
}

ParseError::ParseError(SourceLoc loc, const std::string& message)
    : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " + message),
      loc_(loc),
      detail_(message) {}

int Program::function_index(std::string_view name) const {
  for (size_t i = 0; i < functions.size(); ++i) {
    if (functions[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Program::global_index(std::string_view name) const {
  for (size_t i = 0; i < globals.size(); ++i) {
    if (globals[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const FunctionDef& Program::function(std::string_view name) const {
  int i = function_index(name);
  if (i < 0) throw std::out_of_range("no function named '" + std::string(name) + "'");
  return functions[i];
}

int64_t Program::total_branch_arms() const {
  int64_t n = 0;
  for (const auto& f : functions) n += 2 * f.cond_count;
  return n;
}

Program parse_program(std::string_view source) {
  Program prog;
  Lexer lexer(source);
  Parser parser(lexer.run(), prog);
  parser.parse_all();
  Checker checker(prog);
  checker.run(parser.field_locs_);
  return prog;
}

}  // namespace unitcarve
