#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace unitcarve {

// One external input source. Content is raw bytes held in a std::string.
struct InputSource {
  std::string name;
  std::string content;

  friend bool operator==(const InputSource&, const InputSource&) = default;
};

// Complete external input of a run: "arg0", "arg1", ... and "stdin".
struct SystemInput {
  std::vector<InputSource> sources;

  static SystemInput from_stdin(std::string text, std::vector<std::string> args = {});

  const InputSource* find(std::string_view name) const;
  InputSource* find(std::string_view name);
  // Adds or replaces a source. Throws std::invalid_argument on an empty name.
  void set(std::string name, std::string content);

  // Arguments in index order (arg0, arg1, ... until the first gap).
  std::vector<std::string> args() const;
  std::string stdin_text() const;

  // Stable content hash used as the trace input reference.
  std::string ref() const;

  friend bool operator==(const SystemInput&, const SystemInput&) = default;
};

}  // namespace unitcarve
