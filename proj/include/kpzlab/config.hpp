#pragma once

// Sectioned key-value experiment configuration with a canonical text form
// and a stable 64-bit hash of that form.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kpzlab {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  static ExperimentConfig parse(const std::string& text) {
    std::istringstream is(text);
    ExperimentConfig c;
    try {
      boost::property_tree::ini_parser::read_ini(is, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw std::invalid_argument(std::string("config: ") + e.message());
    }
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  template <class T>
  T get(const std::string& key, const T& fallback) const {
    return tree_.get<T>(key, fallback);
  }

  template <class T>
  T require(const std::string& key) const {
    auto v = tree_.get_optional<T>(key);
    if (!v) throw std::invalid_argument("config: missing or malformed key " + key);
    return *v;
  }

  template <class T>
  void set(const std::string& key, const T& value) {
    tree_.put(key, value);
  }

  /// "[section]" blocks and "key = value" lines, both sorted, whitespace
  /// trimmed. Top-level keys come first under no header.
  std::string canonical() const {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::map<std::string, std::string> top;
    for (const auto& [name, node] : tree_) {
      if (node.empty()) {
        top[trim(name)] = trim(node.data());
      } else {
        auto& sec = sections[trim(name)];
        for (const auto& [k, v] : node) sec[trim(k)] = trim(v.data());
      }
    }
    std::ostringstream os;
    for (const auto& [k, v] : top) os << k << " = " << v << '\n';
    for (const auto& [s, kv] : sections) {
      os << '[' << s << "]\n";
      for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
    }
    return os.str();
  }

  std::string hash() const { return hex64(fnv1a64(canonical())); }

  const boost::property_tree::ptree& tree() const noexcept { return tree_; }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    std::string out;
    bool space = false;
    for (auto i = a; i <= b; ++i) {
      const char c = s[i];
      if (c == ' ' || c == '\t') {
        space = true;
        continue;
      }
      if (space && !out.empty()) out += ' ';
      space = false;
      out += c;
    }
    return out;
  }

  boost::property_tree::ptree tree_;
};

}  // namespace kpzlab
