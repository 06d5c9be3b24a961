#include "unitcarve/coverage.hpp"

#include <stdexcept>

namespace unitcarve {

std::string_view arm_name(Arm a) { return a == Arm::Then ? "then" : "else"; }

Arm arm_from_name(std::string_view s) {
  if (s == "then") return Arm::Then;
  if (s == "else") return Arm::Else;
  throw std::invalid_argument("unknown branch arm '" + std::string(s) + "'");
}

std::string to_string(const BranchId& b) {
  return b.function + "#" + std::to_string(b.cond) + ":" + std::string(arm_name(b.arm));
}

void CoverageMap::hit(const BranchId& id, uint64_t n) {
  if (n == 0) return;
  counts_[id] += n;
}

void CoverageMap::merge(const CoverageMap& other) {
  for (const auto& [id, n] : other.counts_) counts_[id] += n;
}

uint64_t CoverageMap::count(const BranchId& id) const {
  auto it = counts_.find(id);
  return it == counts_.end() ? 0 : it->second;
}

BranchSet CoverageMap::branches() const {
  BranchSet out;
  for (const auto& [id, n] : counts_) out.insert(id);
  return out;
}

BranchSet CoverageMap::branches_of(std::string_view function) const {
  BranchSet out;
  for (const auto& [id, n] : counts_) {
    if (id.function == function) out.insert(id);
  }
  return out;
}

BranchSet CoverageMap::new_relative_to(const CoverageMap& baseline) const {
  BranchSet out;
  for (const auto& [id, n] : counts_) {
    if (!baseline.covers(id)) out.insert(id);
  }
  return out;
}

}  // namespace unitcarve
