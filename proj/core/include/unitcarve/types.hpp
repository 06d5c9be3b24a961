#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace unitcarve {

struct MiniType;
using TypeRef = std::shared_ptr<const MiniType>;

// Structural type of a MiniC value. Records are referenced by name; their
// layout lives in a RecordTable so that types stay self-contained when they
// are read back from trace files.
struct MiniType {
  enum class Kind { Int, Double, Char, Void, Pointer, Array, Record };

  Kind kind = Kind::Int;
  TypeRef elem;         // Pointer, Array
  int64_t length = 0;   // Array
  std::string record;   // Record

  static TypeRef int_type();
  static TypeRef double_type();
  static TypeRef char_type();
  static TypeRef void_type();
  static TypeRef pointer_to(TypeRef elem);
  static TypeRef array_of(TypeRef elem, int64_t length);
  static TypeRef record_named(std::string name);

  bool is_scalar() const {
    return kind == Kind::Int || kind == Kind::Double || kind == Kind::Char ||
           kind == Kind::Pointer;
  }
  bool is_arithmetic() const {
    return kind == Kind::Int || kind == Kind::Double || kind == Kind::Char;
  }
  bool is_integral() const { return kind == Kind::Int || kind == Kind::Char; }
  bool is_pointer() const { return kind == Kind::Pointer; }
  bool is_aggregate() const {
    return kind == Kind::Array || kind == Kind::Record;
  }
};

bool operator==(const MiniType& a, const MiniType& b);
bool same_type(const TypeRef& a, const TypeRef& b);

// Postfix spelling: base name followed by `*` and `[N]` suffixes applied left
// to right, e.g. "char*", "Num*[4]", "int[3]*".
std::string type_name(const MiniType& t);
inline std::string type_name(const TypeRef& t) { return t ? type_name(*t) : "?"; }
TypeRef parse_type_name(std::string_view text);

struct FieldDef {
  std::string name;
  TypeRef type;
  int64_t offset = 0;
};

struct RecordDef {
  std::string name;
  std::vector<FieldDef> fields;
  int64_t size = 0;

  const FieldDef* field(std::string_view name) const;
};

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Record layouts by name. Fields are packed without padding.
class RecordTable {
 public:
  void add(RecordDef def);
  const RecordDef* find(std::string_view name) const;
  const RecordDef& at(std::string_view name) const;
  const std::vector<RecordDef>& all() const { return records_; }

  int64_t size_of(const MiniType& t) const;
  int64_t size_of(const TypeRef& t) const { return size_of(*t); }

  // Type of the scalar (or innermost aggregate) slot located at `offset`
  // inside an object of type `t`, with the access path suffix (".f", "[2]").
  struct Slot {
    TypeRef type;
    std::string path;
  };
  std::optional<Slot> scalar_at(const TypeRef& t, int64_t offset) const;

 private:
  std::vector<RecordDef> records_;
  std::map<std::string, size_t, std::less<>> index_;
};

}  // namespace unitcarve
