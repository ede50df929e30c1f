#ifndef DMCA_UTIL_INI_HPP
#define DMCA_UTIL_INI_HPP

#include <map>
#include <string>
#include <vector>

namespace dmca {

// Flat [section] / key = value file. Lines starting with '#' or ';' are
// comments; values keep everything after '=' with outer whitespace trimmed.
class IniFile {
 public:
  static IniFile parse_file(const std::string& path);
  static IniFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;
  std::vector<std::string> get_str_list(const std::string& section, const std::string& key,
                                        const std::vector<std::string>& fallback) const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  // Raw text as loaded, used for config fingerprinting.
  const std::string& text() const { return text_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string text_;
};

}  // namespace dmca

#endif
