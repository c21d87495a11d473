#ifndef PIML_CONFIG_HPP_
#define PIML_CONFIG_HPP_

#include <map>
#include <string>
#include <vector>

namespace piml {

// Flat experiment configuration.
//
// Grammar (one entry per line):
//   line    := blank | comment | entry
//   comment := '#' anything
//   entry   := key '=' value [comment]
//   key     := segment ('.' segment)*     segment := [a-z0-9_]+
//   value   := scalar | '[' [scalar (',' scalar)*] ']'
//   scalar  := any text without ',', '[', ']', '#' (surrounding blanks trimmed)
// Keys must be known to the schema; a key may appear once per file.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;  // 0 for defaults and command-line overrides
  };

  // Throws ConfigError "<source>:<line>: ..." on grammar or schema errors.
  static Config parse(const std::string& text, const std::string& source = "<string>");
  static Config load(const std::string& path);

  // Override (e.g. sweep point, --seed); the key must be known.
  void set(const std::string& key, const std::string& value);
  bool explicitly_set(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
  // True when the value is one of the listed words rather than a number.
  bool is_word(const std::string& key) const;

  // Every schema key with its effective value, sorted, one "key = value" per line.
  std::string resolved() const;
  const std::string& source() const { return source_; }

 private:
  const Entry& raw(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, Entry> entries_;
  std::string source_ = "<string>";
};

// Schema: key -> default value.
const std::map<std::string, std::string>& config_schema();

}  // namespace piml

#endif  // PIML_CONFIG_HPP_
