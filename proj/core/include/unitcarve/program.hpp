#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unitcarve/types.hpp"

namespace unitcarve {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

enum class BinOp {
  Add, Sub, Mul, Div, Mod,
  Lt, Le, Gt, Ge, Eq, Ne,
  And, Or,
  BitAnd, BitOr, BitXor, Shl, Shr,
};

enum class UnOp { Neg, Not, BitNot, Deref, AddrOf };

enum class Builtin {
  Input, Arg, Argc, Malloc, Free, Strlen, Atoi, PrintInt, PrintStr, Assert,
};

std::optional<Builtin> builtin_named(std::string_view name);
std::string_view builtin_name(Builtin b);

struct Expr {
  enum class Kind {
    IntLit, DoubleLit, StrLit, Null,
    Local, Global,
    Unary, Binary,
    Index, Field, Arrow,
    Call, BuiltinCall,
    SizeOf,
  };

  Kind kind = Kind::IntLit;
  SourceLoc loc;
  TypeRef type;  // static type; arrays keep their array type here

  int64_t ival = 0;
  double dval = 0.0;
  std::string name;     // identifiers, field names, callee
  int slot = -1;        // local slot / global index / function index / literal index
  UnOp uop = UnOp::Neg;
  BinOp bop = BinOp::Add;
  Builtin builtin = Builtin::Input;
  int64_t field_offset = 0;
  TypeRef operand_type;  // sizeof
  std::vector<std::unique_ptr<Expr>> kids;
};

using ExprPtr = std::unique_ptr<Expr>;

struct Stmt {
  enum class Kind {
    Block, Decl, Assign, CompoundAssign, IncDec, ExprStmt,
    If, While, Return, Break, Continue,
  };

  Kind kind = Kind::Block;
  SourceLoc loc;
  std::vector<std::unique_ptr<Stmt>> body;  // Block; If: then[, else]; While: body
  ExprPtr target;                           // lvalue of Assign/CompoundAssign/IncDec
  ExprPtr value;                            // rhs, initializer, return value, expression
  ExprPtr cond;                             // If/While
  BinOp op = BinOp::Add;                    // CompoundAssign/IncDec (Add or Sub)
  int slot = -1;                            // Decl: local slot
  TypeRef decl_type;                        // Decl
  std::string name;                         // Decl
  int cond_index = -1;                      // If/While: per-function conditional index
  int global_root = -1;                     // stores attributed to this global, or -1
};

using StmtPtr = std::unique_ptr<Stmt>;

struct LocalSlot {
  std::string name;
  TypeRef type;
  bool addressed = false;  // `&x` appears somewhere; needs real storage
};

struct FunctionDef {
  std::string name;
  TypeRef return_type;
  std::vector<LocalSlot> params;
  std::vector<LocalSlot> locals;  // params first, then every declaration in order
  StmtPtr body;
  SourceLoc loc;
  int cond_count = 0;
  std::set<int> callees;       // direct calls (function indices)
  std::set<int> globals_used;  // loads or stores (global indices)
};

// Literal initializer of a global. Strings initialize char arrays in place.
struct GlobalInit {
  std::variant<std::monostate, int64_t, double, std::string> value;
};

struct GlobalDef {
  std::string name;
  TypeRef type;
  GlobalInit init;
  SourceLoc loc;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceLoc loc, const std::string& message);
  SourceLoc loc() const { return loc_; }
  const std::string& detail() const { return detail_; }

 private:
  SourceLoc loc_;
  std::string detail_;
};

class Program {
 public:
  RecordTable records;
  std::vector<GlobalDef> globals;
  std::vector<FunctionDef> functions;
  std::vector<std::string> string_literals;

  int function_index(std::string_view name) const;
  int global_index(std::string_view name) const;
  const FunctionDef& function(std::string_view name) const;
  int main_index() const { return function_index("main"); }

  // Number of conditional arms in the whole program (2 per if/while).
  int64_t total_branch_arms() const;
};

// Parses and validates MiniC source. Throws ParseError (with line/column) on
// syntax errors, unresolved names, duplicate definitions and type errors.
Program parse_program(std::string_view source);

}  // namespace unitcarve
