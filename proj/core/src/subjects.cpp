#include "unitcarve/subjects.hpp"

#include <map>
#include <stdexcept>

namespace unitcarve {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_subject_files();
}

namespace {

std::string unescape(std::string_view s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    char e = s[++i];
    switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case '0': out += '\0'; break;
      default: out += e; break;
    }
  }
  return out;
}

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(' ');
  size_t e = s.find_last_not_of(' ');
  return b == std::string_view::npos ? std::string() : std::string(s.substr(b, e - b + 1));
}

std::string strip_backquotes(const std::string& s) {
  if (s.size() >= 2 && s.front() == '`' && s.back() == '`') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::vector<PlantedDefect> parse_defects(std::string_view md) {
  std::vector<PlantedDefect> out;
  size_t pos = 0;
  while (pos < md.size()) {
    size_t nl = md.find('\n', pos);
    std::string_view line = md.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? md.size() : nl + 1;
    if (line.empty() || line.front() != '|' || line.starts_with("|---") || line.starts_with("| location")) continue;
    std::vector<std::string> cells;
    size_t at = 1;
    while (at < line.size()) {
      size_t bar = line.find(" | ", at);
      if (bar == std::string_view::npos) {
        cells.push_back(trim(line.substr(at, line.size() - at - 1)));
        break;
      }
      cells.push_back(trim(line.substr(at, bar - at)));
      at = bar + 2;
    }
    if (cells.size() != 4) throw std::runtime_error("defect row needs 4 cells: " + std::string(line));
    PlantedDefect d;
    d.location = cells[0];
    d.trigger = cells[1];
    d.example = SystemInput::from_stdin(unescape(strip_backquotes(cells[2])));
    auto kind = trap_from_name(cells[3]);
    if (!kind) throw std::runtime_error("unknown trap kind '" + cells[3] + "'");
    d.trap = *kind;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<ExampleSubject> list_examples() {
  std::map<std::string, ExampleSubject> by_name;
  for (const auto& [path, content] : detail::embedded_subject_files()) {
    size_t slash = path.find('/');
    if (slash == std::string_view::npos) continue;
    std::string name(path.substr(0, slash));
    std::string_view rest = path.substr(slash + 1);
    ExampleSubject& s = by_name[name];
    s.name = name;
    if (rest == "prog.mc") {
      s.source = std::string(content);
    } else if (rest == "defects.md") {
      s.defects_doc = std::string(content);
      s.defects = parse_defects(content);
    } else if (rest.starts_with("seeds/")) {
      s.seeds.push_back({std::string(rest.substr(6)), SystemInput::from_stdin(std::string(content))});
    }
  }
  std::vector<ExampleSubject> out;
  for (auto& [name, s] : by_name) {
    if (!s.source.empty()) out.push_back(std::move(s));
  }
  return out;
}

std::optional<ExampleSubject> find_example(std::string_view name) {
  for (auto& s : list_examples()) {
    if (s.name == name) return std::move(s);
  }
  return std::nullopt;
}

}  // namespace unitcarve
