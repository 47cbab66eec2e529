#include "feasible/config_file.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "feasible/error.hpp"
#include "text_util.hpp"

namespace feasible {

using detail::trim;

namespace {

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

bool valid_key(std::string_view key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  for (char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  return true;
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile file;
  int line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    const std::string stripped = strip_comment(raw);
    const auto line = trim(stripped);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("expected 'key = value', got '" + std::string(line) + "'", line_no);
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError("invalid key '" + std::string(key) + "'", line_no);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    else if (!value.empty() && (value.front() == '"' || value.back() == '"'))
      throw ConfigError("unterminated string for '" + std::string(key) + "'", line_no);
    if (value.empty()) throw ConfigError("missing value for '" + std::string(key) + "'", line_no);
    const std::string k(key);
    if (auto it = file.entries_.find(k); it != file.entries_.end())
      throw ConfigError("duplicate key '" + k + "' (first set on line " +
                            std::to_string(it->second.line) + ")",
                        line_no);
    file.entries_[k] = Entry{std::string(value), line_no};
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

int KeyValueFile::line(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  used_.insert(key);
  return it->second.value;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  return get_string(key).value_or(fallback);
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  auto value = get_string(key);
  if (!value) return fallback;
  auto parsed = detail::parse_double(*value);
  if (!parsed) throw ConfigError("'" + key + "' expects a number, got '" + *value + "'", line(key));
  return *parsed;
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  auto value = get_string(key);
  if (!value) return fallback;
  auto parsed = detail::parse_int(*value);
  if (!parsed)
    throw ConfigError("'" + key + "' expects an integer, got '" + *value + "'", line(key));
  return *parsed;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  auto value = get_string(key);
  if (!value) return fallback;
  if (*value == "true" || *value == "yes" || *value == "1") return true;
  if (*value == "false" || *value == "no" || *value == "0") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + *value + "'", line(key));
}

namespace {

std::vector<std::string_view> list_items(std::string_view value) {
  value = trim(value);
  if (value.size() >= 2 && value.front() == '[' && value.back() == ']')
    value = trim(value.substr(1, value.size() - 2));
  std::vector<std::string_view> items;
  if (value.empty()) return items;
  for (auto part : detail::split(value, ',')) items.push_back(trim(part));
  return items;
}

}  // namespace

std::vector<double> KeyValueFile::get_double_list(const std::string& key,
                                                  std::vector<double> fallback) const {
  auto value = get_string(key);
  if (!value) return fallback;
  std::vector<double> out;
  for (auto item : list_items(*value)) {
    auto parsed = detail::parse_double(item);
    if (!parsed)
      throw ConfigError("'" + key + "' expects a list of numbers, bad item '" +
                            std::string(item) + "'",
                        line(key));
    out.push_back(*parsed);
  }
  return out;
}

std::vector<long long> KeyValueFile::get_int_list(const std::string& key,
                                                  std::vector<long long> fallback) const {
  auto value = get_string(key);
  if (!value) return fallback;
  std::vector<long long> out;
  for (auto item : list_items(*value)) {
    auto parsed = detail::parse_int(item);
    if (!parsed)
      throw ConfigError("'" + key + "' expects a list of integers, bad item '" +
                            std::string(item) + "'",
                        line(key));
    out.push_back(*parsed);
  }
  return out;
}

void KeyValueFile::reject_unused() const {
  const Entry* first = nullptr;
  std::string first_key;
  for (const auto& [key, entry] : entries_) {
    if (used_.count(key)) continue;
    if (!first || entry.line < first->line) {
      first = &entry;
      first_key = key;
    }
  }
  if (first) throw ConfigError("unknown key '" + first_key + "'", first->line);
}

}  // namespace feasible
