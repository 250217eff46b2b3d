#pragma once

/* Experiment configuration.
 *
 * Flat key = value text files drive every CLI command, with command-line
 * `--set key=value` overrides applied afterwards (later wins).  Values are
 * stored verbatim as trimmed strings, so a config serializes back to a file
 * that parses to an identical config (lossless round-trip); typed access is
 * strict — a malformed number or missing required key raises config_error,
 * which the CLI maps to its dedicated exit code.
 *
 * Typed getters mark keys as consumed.  After a command has read everything
 * it understands, `require_all_consumed` rejects leftovers, so a misspelled
 * key fails loudly instead of silently running with defaults.
 */

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ringgas/common.hpp"

namespace ringgas {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view text, std::string_view key) {
  const std::string_view t = trim(text);
  double value = 0.0;
  const std::from_chars_result r =
      std::from_chars(t.data(), t.data() + t.size(), value);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw config_error(cat("config key '", key, "': '", std::string(t),
                           "' is not a number"));
  return value;
}

inline std::int64_t parse_int(std::string_view text, std::string_view key) {
  const std::string_view t = trim(text);
  std::int64_t value = 0;
  const std::from_chars_result r =
      std::from_chars(t.data(), t.data() + t.size(), value);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw config_error(cat("config key '", key, "': '", std::string(t),
                           "' is not an integer"));
  return value;
}

}  // namespace detail

class Config {
 public:
  /* Insert or overwrite; insertion order of first appearance is preserved
   * so serialization is deterministic. */
  void set(std::string key, std::string value) {
    const auto it = index_.find(key);
    if (it != index_.end()) {
      entries_[it->second].value = std::move(value);
      return;
    }
    index_.emplace(key, entries_.size());
    entries_.push_back({std::move(key), std::move(value), false});
  }

  bool has(std::string_view key) const {
    return index_.find(std::string(key)) != index_.end();
  }

  std::string get_string(std::string_view key) const {
    const Entry* e = find(key);
    if (e == nullptr)
      throw config_error(cat("missing required config key '", key, "'"));
    return e->value;
  }
  std::string get_string(std::string_view key, std::string_view fallback) const {
    const Entry* e = find(key);
    return e != nullptr ? e->value : std::string(fallback);
  }

  double get_double(std::string_view key) const {
    return detail::parse_double(get_string(key), key);
  }
  double get_double(std::string_view key, double fallback) const {
    const Entry* e = find(key);
    return e != nullptr ? detail::parse_double(e->value, key) : fallback;
  }

  std::int64_t get_int(std::string_view key) const {
    return detail::parse_int(get_string(key), key);
  }
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const {
    const Entry* e = find(key);
    return e != nullptr ? detail::parse_int(e->value, key) : fallback;
  }

  bool get_bool(std::string_view key, bool fallback) const {
    const Entry* e = find(key);
    if (e == nullptr) return fallback;
    const std::string_view v = detail::trim(e->value);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error(cat("config key '", key, "': '", std::string(v),
                           "' is not a boolean (true/false/1/0)"));
  }

  /* Comma-separated lists, e.g. `sizes = 100, 1000, 10000`. */
  std::vector<double> get_double_list(std::string_view key) const {
    std::vector<double> out;
    for (const std::string& item : split_list(get_string(key), key))
      out.push_back(detail::parse_double(item, key));
    return out;
  }
  std::vector<std::int64_t> get_int_list(std::string_view key) const {
    std::vector<std::int64_t> out;
    for (const std::string& item : split_list(get_string(key), key))
      out.push_back(detail::parse_int(item, key));
    return out;
  }

  /* Keys present but never read by any getter, in insertion order. */
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const Entry& e : entries_)
      if (!e.touched) out.push_back(e.key);
    return out;
  }

  void require_all_consumed() const {
    const std::vector<std::string> leftover = unused_keys();
    if (leftover.empty()) return;
    std::ostringstream os;
    os << "unknown config key(s):";
    for (const std::string& k : leftover) os << " '" << k << "'";
    throw config_error(os.str());
  }

  /* Serialized form parses back to an identical config. */
  std::string serialize() const {
    std::ostringstream os;
    for (const Entry& e : entries_) os << e.key << " = " << e.value << "\n";
    return os.str();
  }

  std::vector<std::pair<std::string, std::string>> items() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.emplace_back(e.key, e.value);
    return out;
  }

 private:
  struct Entry {
    std::string key;
    std::string value;
    mutable bool touched;
  };

  const Entry* find(std::string_view key) const {
    const auto it = index_.find(std::string(key));
    if (it == index_.end()) return nullptr;
    entries_[it->second].touched = true;
    return &entries_[it->second];
  }

  static std::vector<std::string> split_list(std::string_view text,
                                             std::string_view key) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t comma = text.find(',', start);
      const std::string_view piece = text.substr(
          start, comma == std::string_view::npos ? comma : comma - start);
      const std::string_view item = detail::trim(piece);
      if (item.empty())
        throw config_error(cat("config key '", key, "': empty list element"));
      out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/* Parse `key = value` lines; '#' starts a comment line, blank lines are
 * skipped, a duplicate key's later value wins.  Lines without '=' or with an
 * empty key are config errors. */
inline Config parse_config_text(std::string_view text) {
  Config config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string_view raw = text.substr(
        pos, eol == std::string_view::npos ? eol : eol - pos);
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (!line.empty() && line.front() != '#') {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos)
        throw config_error(
            cat("config line ", line_no, ": expected key = value, got '",
                std::string(line), "'"));
      const std::string_view key = detail::trim(line.substr(0, eq));
      const std::string_view value = detail::trim(line.substr(eq + 1));
      if (key.empty())
        throw config_error(cat("config line ", line_no, ": empty key"));
      config.set(std::string(key), std::string(value));
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return config;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.good())
    throw config_error(cat("cannot read config file ", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

/* One `--set key=value` override; later calls win over file values. */
inline void apply_override(Config& config, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw config_error(cat("override '", std::string(assignment),
                           "' is not of the form key=value"));
  const std::string_view key = detail::trim(assignment.substr(0, eq));
  const std::string_view value = detail::trim(assignment.substr(eq + 1));
  if (key.empty())
    throw config_error(cat("override '", std::string(assignment),
                           "': empty key"));
  config.set(std::string(key), std::string(value));
}

}  // namespace ringgas
