#include "unitcarve/segment_map.hpp"

#include <string>

namespace unitcarve {

std::string_view origin_name(Origin o) {
  switch (o) {
    case Origin::Stack:
      return "stack";
    case Origin::Heap:
      return "heap";
    case Origin::Global:
      return "global";
    case Origin::Static:
      return "static";
    case Origin::Input:
      return "input";
  }
  return "heap";
}

Origin origin_from_name(std::string_view name) {
  if (name == "stack") return Origin::Stack;
  if (name == "heap") return Origin::Heap;
  if (name == "global") return Origin::Global;
  if (name == "static") return Origin::Static;
  if (name == "input") return Origin::Input;
  throw std::invalid_argument("unknown segment origin '" + std::string(name) + "'");
}

SegmentId SegmentMap::add(int64_t length, Origin origin) {
  entries_.push_back({length, origin, true});
  return static_cast<SegmentId>(entries_.size());
}

void SegmentMap::kill(SegmentId id) {
  if (id == 0 || id > entries_.size()) return;
  entries_[id - 1].live = false;
}

const SegmentInfo* SegmentMap::find(SegmentId id) const {
  if (id == 0 || id > entries_.size()) return nullptr;
  return &entries_[id - 1];
}

void SegmentMap::resize_entry(SegmentId id, int64_t length) {
  if (id == 0 || id > entries_.size()) return;
  entries_[id - 1].length = length;
}

SegmentLookup segment_lookup(const SegmentMap& map, Pointer ptr) {
  if (ptr.is_null()) throw SegmentLookupError(SegmentLookupError::Kind::Null, "lookup of null pointer");
  const SegmentInfo* info = map.find(ptr.segment);
  if (!info) {
    throw SegmentLookupError(SegmentLookupError::Kind::Unknown,
                             "pointer into unknown segment " + std::to_string(ptr.segment));
  }
  if (!info->live) {
    throw SegmentLookupError(SegmentLookupError::Kind::Dead,
                             "pointer into freed segment " + std::to_string(ptr.segment));
  }
  if (ptr.offset < 0 || ptr.offset > info->length) {
    throw SegmentLookupError(SegmentLookupError::Kind::OutOfRange,
                             "offset " + std::to_string(ptr.offset) + " outside segment " +
                                 std::to_string(ptr.segment) + " of length " + std::to_string(info->length));
  }
  return {ptr.segment, info->length - ptr.offset};
}

}  // namespace unitcarve
