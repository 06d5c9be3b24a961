#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unitcarve/memory.hpp"
#include "unitcarve/system_input.hpp"

namespace unitcarve {

struct PlantedDefect {
  std::string location;
  std::string trigger;
  SystemInput example;  // an input that reaches the defect
  TrapKind trap = TrapKind::OutOfBounds;
};

struct SeedInput {
  std::string name;  // file name under seeds/
  SystemInput input;
};

// A bundled MiniC program with its seed inputs and planted defects.
struct ExampleSubject {
  std::string name;
  std::string source;
  std::vector<SeedInput> seeds;  // sorted by file name
  std::vector<PlantedDefect> defects;
  std::string defects_doc;
};

// calc, fields, revlines (sorted by name).
std::vector<ExampleSubject> list_examples();
std::optional<ExampleSubject> find_example(std::string_view name);

// Rows of the `| location | trigger | example input | trap |` table; the
// example is a backquoted C-escaped string fed to stdin.
std::vector<PlantedDefect> parse_defects(std::string_view markdown);

}  // namespace unitcarve
