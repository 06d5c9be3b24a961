#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace unitcarve {

enum class Arm { Then, Else };

std::string_view arm_name(Arm a);
Arm arm_from_name(std::string_view s);

// One arm of one conditional (`if`/`while`, numbered per function in source order).
struct BranchId {
  std::string function;
  int cond = 0;
  Arm arm = Arm::Then;

  auto operator<=>(const BranchId&) const = default;
  bool operator==(const BranchId&) const = default;
};

std::string to_string(const BranchId& b);

using BranchSet = std::set<BranchId>;

// Execution counts per branch arm. Arms never taken have no entry.
class CoverageMap {
 public:
  void hit(const BranchId& id, uint64_t n = 1);
  // Pointwise sum.
  void merge(const CoverageMap& other);

  uint64_t count(const BranchId& id) const;
  bool covers(const BranchId& id) const { return count(id) > 0; }
  size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }

  BranchSet branches() const;
  BranchSet branches_of(std::string_view function) const;
  // Arms hit here that `baseline` has never seen.
  BranchSet new_relative_to(const CoverageMap& baseline) const;

  const std::map<BranchId, uint64_t>& counts() const { return counts_; }

  friend bool operator==(const CoverageMap&, const CoverageMap&) = default;

 private:
  std::map<BranchId, uint64_t> counts_;
};

}  // namespace unitcarve
