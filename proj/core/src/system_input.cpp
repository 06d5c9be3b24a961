#include "unitcarve/system_input.hpp"

#include <cstdio>
#include <stdexcept>

namespace unitcarve {

SystemInput SystemInput::from_stdin(std::string text, std::vector<std::string> args) {
  SystemInput in;
  for (size_t i = 0; i < args.size(); ++i) in.set("arg" + std::to_string(i), std::move(args[i]));
  in.set("stdin", std::move(text));
  return in;
}

const InputSource* SystemInput::find(std::string_view name) const {
  for (const auto& s : sources) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

InputSource* SystemInput::find(std::string_view name) {
  for (auto& s : sources) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

void SystemInput::set(std::string name, std::string content) {
  if (name.empty()) throw std::invalid_argument("input source name is empty");
  if (InputSource* s = find(name)) {
    s->content = std::move(content);
    return;
  }
  sources.push_back({std::move(name), std::move(content)});
}

std::vector<std::string> SystemInput::args() const {
  std::vector<std::string> out;
  for (;;) {
    const InputSource* s = find("arg" + std::to_string(out.size()));
    if (!s) return out;
    out.push_back(s->content);
  }
}

std::string SystemInput::stdin_text() const {
  const InputSource* s = find("stdin");
  return s ? s->content : std::string();
}

std::string SystemInput::ref() const {
  // FNV-1a over length-prefixed names and contents.
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::string_view bytes) {
    uint64_t n = bytes.size();
    for (int i = 0; i < 8; ++i) {
      h ^= (n >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : sources) {
    mix(s.name);
    mix(s.content);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace unitcarve
