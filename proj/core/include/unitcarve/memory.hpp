#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unitcarve/segment_map.hpp"
#include "unitcarve/types.hpp"
#include "unitcarve/value.hpp"

namespace unitcarve {

enum class TrapKind { NullDeref, OutOfBounds, UseAfterFree, DivByZero, AssertFail, StackOverflow };

std::string_view trap_name(TrapKind k);
std::optional<TrapKind> trap_from_name(std::string_view name);

// Raised inside the interpreter; converted into a RunResult outcome at the
// top of an execution.
struct Trap {
  TrapKind kind;
  std::string detail;
};

// Simulated address space. Each segment is a byte run plus a side table of
// pointer slots (offset -> Pointer), so pointer provenance is exact. Bytes
// under a pointer slot read as zero; overwriting any byte of a slot drops it.
class Memory {
 public:
  struct SegmentData {
    std::vector<uint8_t> bytes;
    std::map<int64_t, Pointer> pointers;
    TypeRef hint;        // declared element type, when known
    std::string global;  // owning global for Origin::Global
  };

  explicit Memory(const RecordTable& records) : records_(&records) {}

  const RecordTable& records() const { return *records_; }
  const SegmentMap& map() const { return map_; }

  SegmentId allocate(int64_t length, Origin origin, TypeRef hint = {}, std::string global = {});
  // free(): only live heap segments, only at offset 0.
  void free_heap(Pointer p);
  void kill(SegmentId id);
  void resize(SegmentId id, int64_t length);

  Value load(Pointer p, const MiniType& t) const;
  void store(Pointer p, const MiniType& t, const Value& v);
  uint8_t load_byte(Pointer p) const;
  // Bytes from p up to (excluding) the first zero byte; traps if the
  // segment ends first.
  std::string load_cstring(Pointer p) const;

  const SegmentData& data(SegmentId id) const { return segments_[id - 1]; }
  SegmentData& mutable_data(SegmentId id) { return segments_[id - 1]; }

  // Unchecked-by-type raw writes used by heap reconstruction.
  void write_bytes(SegmentId id, int64_t offset, std::span<const uint8_t> bytes);
  void write_pointer(SegmentId id, int64_t offset, Pointer target);

  void check(Pointer p, int64_t size) const;

 private:
  void drop_slots(SegmentData& seg, int64_t offset, int64_t size);

  const RecordTable* records_;
  SegmentMap map_;
  std::vector<SegmentData> segments_;
};

}  // namespace unitcarve
