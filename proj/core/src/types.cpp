#include "unitcarve/types.hpp"

#include <cctype>
#include <charconv>

namespace unitcarve {

TypeRef MiniType::int_type() {
  static const TypeRef t = std::make_shared<MiniType>(MiniType{Kind::Int});
  return t;
}
TypeRef MiniType::double_type() {
  static const TypeRef t = std::make_shared<MiniType>(MiniType{Kind::Double});
  return t;
}
TypeRef MiniType::char_type() {
  static const TypeRef t = std::make_shared<MiniType>(MiniType{Kind::Char});
  return t;
}
TypeRef MiniType::void_type() {
  static const TypeRef t = std::make_shared<MiniType>(MiniType{Kind::Void});
  return t;
}
TypeRef MiniType::pointer_to(TypeRef elem) {
  return std::make_shared<MiniType>(MiniType{Kind::Pointer, std::move(elem)});
}
TypeRef MiniType::array_of(TypeRef elem, int64_t length) {
  return std::make_shared<MiniType>(
      MiniType{Kind::Array, std::move(elem), length});
}
TypeRef MiniType::record_named(std::string name) {
  return std::make_shared<MiniType>(
      MiniType{Kind::Record, nullptr, 0, std::move(name)});
}

bool operator==(const MiniType& a, const MiniType& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case MiniType::Kind::Pointer:
      return same_type(a.elem, b.elem);
    case MiniType::Kind::Array:
      return a.length == b.length && same_type(a.elem, b.elem);
    case MiniType::Kind::Record:
      return a.record == b.record;
    default:
      return true;
  }
}

bool same_type(const TypeRef& a, const TypeRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

std::string type_name(const MiniType& t) {
  switch (t.kind) {
    case MiniType::Kind::Int:
      return "int";
    case MiniType::Kind::Double:
      return "double";
    case MiniType::Kind::Char:
      return "char";
    case MiniType::Kind::Void:
      return "void";
    case MiniType::Kind::Record:
      return t.record;
    case MiniType::Kind::Pointer:
      return type_name(t.elem) + "*";
    case MiniType::Kind::Array:
      return type_name(t.elem) + "[" + std::to_string(t.length) + "]";
  }
  return "?";
}

TypeRef parse_type_name(std::string_view text) {
  size_t i = 0;
  while (i < text.size() &&
         (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
    ++i;
  }
  if (i == 0) throw TypeError("malformed type name '" + std::string(text) + "'");
  std::string base(text.substr(0, i));
  TypeRef t;
  if (base == "int") {
    t = MiniType::int_type();
  } else if (base == "double") {
    t = MiniType::double_type();
  } else if (base == "char") {
    t = MiniType::char_type();
  } else if (base == "void") {
    t = MiniType::void_type();
  } else {
    t = MiniType::record_named(base);
  }
  while (i < text.size()) {
    if (text[i] == '*') {
      t = MiniType::pointer_to(t);
      ++i;
    } else if (text[i] == '[') {
      size_t close = text.find(']', i);
      if (close == std::string_view::npos) {
        throw TypeError("malformed type name '" + std::string(text) + "'");
      }
      int64_t n = 0;
      auto [ptr, ec] = std::from_chars(text.data() + i + 1, text.data() + close, n);
      if (ec != std::errc() || ptr != text.data() + close || n <= 0) {
        throw TypeError("bad array length in '" + std::string(text) + "'");
      }
      t = MiniType::array_of(t, n);
      i = close + 1;
    } else {
      throw TypeError("malformed type name '" + std::string(text) + "'");
    }
  }
  return t;
}

const FieldDef* RecordDef::field(std::string_view name) const {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

void RecordTable::add(RecordDef def) {
  index_.emplace(def.name, records_.size());
  records_.push_back(std::move(def));
}

const RecordDef* RecordTable::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &records_[it->second];
}

const RecordDef& RecordTable::at(std::string_view name) const {
  const RecordDef* r = find(name);
  if (!r) throw TypeError("unknown record '" + std::string(name) + "'");
  return *r;
}

int64_t RecordTable::size_of(const MiniType& t) const {
  switch (t.kind) {
    case MiniType::Kind::Int:
    case MiniType::Kind::Double:
    case MiniType::Kind::Pointer:
      return 8;
    case MiniType::Kind::Char:
      return 1;
    case MiniType::Kind::Void:
      return 1;
    case MiniType::Kind::Array:
      return t.length * size_of(*t.elem);
    case MiniType::Kind::Record:
      return at(t.record).size;
  }
  return 0;
}

std::optional<RecordTable::Slot> RecordTable::scalar_at(const TypeRef& t,
                                                       int64_t offset) const {
  if (!t || offset < 0) return std::nullopt;
  switch (t->kind) {
    case MiniType::Kind::Array: {
      int64_t esz = size_of(*t->elem);
      if (esz <= 0 || offset >= esz * t->length) return std::nullopt;
      int64_t idx = offset / esz;
      auto inner = scalar_at(t->elem, offset - idx * esz);
      if (!inner) return std::nullopt;
      inner->path = "[" + std::to_string(idx) + "]" + inner->path;
      return inner;
    }
    case MiniType::Kind::Record: {
      const RecordDef* rec = find(t->record);
      if (!rec) return std::nullopt;
      for (const auto& f : rec->fields) {
        int64_t fsz = size_of(*f.type);
        if (offset >= f.offset && offset < f.offset + fsz) {
          auto inner = scalar_at(f.type, offset - f.offset);
          if (!inner) return std::nullopt;
          inner->path = "." + f.name + inner->path;
          return inner;
        }
      }
      return std::nullopt;
    }
    case MiniType::Kind::Void:
      return std::nullopt;
    default:
      if (offset != 0) return std::nullopt;
      return Slot{t, ""};
  }
}

}  // namespace unitcarve
