#include "doctest.h"
#include "unitcarve/rng.hpp"
#include "unitcarve/segment_map.hpp"

using namespace unitcarve;

TEST_CASE("segment lookup resolves base and remaining length") {
  SegmentMap map;
  SegmentId a = map.add(10, Origin::Heap);
  SegmentId b = map.add(3, Origin::Stack);
  CHECK(a == 1);
  CHECK(b == 2);

  auto at = segment_lookup(map, {a, 0});
  CHECK(at.base == a);
  CHECK(at.remaining == 10);
  CHECK(segment_lookup(map, {a, 7}).remaining == 3);
  // one past the end is a legal pointer with nothing left
  CHECK(segment_lookup(map, {a, 10}).remaining == 0);
  CHECK(segment_lookup(map, {b, 2}).remaining == 1);
}

TEST_CASE("segment lookup errors") {
  SegmentMap map;
  SegmentId a = map.add(4, Origin::Heap);
  auto kind_of = [&](Pointer p) {
    try {
      segment_lookup(map, p);
    } catch (const SegmentLookupError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  CHECK(kind_of({0, 0}) == static_cast<int>(SegmentLookupError::Kind::Null));
  CHECK(kind_of({9, 0}) == static_cast<int>(SegmentLookupError::Kind::Unknown));
  CHECK(kind_of({a, 5}) == static_cast<int>(SegmentLookupError::Kind::OutOfRange));
  CHECK(kind_of({a, -1}) == static_cast<int>(SegmentLookupError::Kind::OutOfRange));
  map.kill(a);
  CHECK(kind_of({a, 0}) == static_cast<int>(SegmentLookupError::Kind::Dead));
  // dead entries stay queryable
  REQUIRE(map.find(a) != nullptr);
  CHECK_FALSE(map.find(a)->live);
}

TEST_CASE("ids are never reused") {
  SegmentMap map;
  SegmentId a = map.add(1, Origin::Heap);
  map.kill(a);
  SegmentId b = map.add(1, Origin::Heap);
  CHECK(b != a);
  CHECK(map.size() == 2);
}

TEST_CASE("remaining(ptr + d) == remaining(ptr) - d, 1000 random cases") {
  Rng rng(20240601);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    SegmentMap map;
    int segs = static_cast<int>(rng.between(1, 20));
    for (int s = 0; s < segs; ++s) map.add(rng.between(0, 500), static_cast<Origin>(rng.below(5)));
    auto id = static_cast<SegmentId>(rng.between(1, segs));
    int64_t len = map.find(id)->length;
    int64_t off = rng.between(0, len);
    int64_t d = rng.between(0, len - off);
    auto base = segment_lookup(map, {id, off});
    auto moved = segment_lookup(map, {id, off + d});
    if (base.base != id || moved.base != id) ++failures;
    if (moved.remaining != base.remaining - d) ++failures;
    if (base.remaining != len - off) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("offset 10 of a 10-byte segment has remaining 0") {
  SegmentMap map;
  map.add(3, Origin::Heap);
  SegmentId ten = map.add(10, Origin::Heap);
  CHECK(segment_lookup(map, {ten, 10}).remaining == 0);
}
