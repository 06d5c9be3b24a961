#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "unitcarve/value.hpp"

namespace unitcarve {

enum class Origin { Stack, Heap, Global, Static, Input };

std::string_view origin_name(Origin o);
Origin origin_from_name(std::string_view name);

struct SegmentInfo {
  int64_t length = 0;
  Origin origin = Origin::Heap;
  bool live = true;
};

// Allocation table: every segment ever created, by id. Ids are handed out
// sequentially from 1 and never reused, so dead entries stay queryable.
class SegmentMap {
 public:
  SegmentId add(int64_t length, Origin origin);
  void kill(SegmentId id);
  const SegmentInfo* find(SegmentId id) const;
  size_t size() const { return entries_.size(); }  // number of ids issued
  void resize_entry(SegmentId id, int64_t length);

 private:
  std::vector<SegmentInfo> entries_;
};

class SegmentLookupError : public std::runtime_error {
 public:
  enum class Kind { Null, Unknown, Dead, OutOfRange };
  SegmentLookupError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct SegmentLookup {
  SegmentId base = 0;
  int64_t remaining = 0;
};

// Resolves a derived pointer to its segment and the bytes left until the end
// of that segment. A pointer one past the end is legal and has remaining 0.
SegmentLookup segment_lookup(const SegmentMap& map, Pointer ptr);

}  // namespace unitcarve
