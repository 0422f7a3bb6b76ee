#pragma once

#include <map>
#include <string>
#include <vector>

namespace dvc {

// key = value text files ('#' comments, blank lines ignored).
class KvConfig {
public:
    static KvConfig parse(const std::string& text);
    static KvConfig parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get_str(const std::string& key) const;
    std::string get_str(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    std::string to_string() const;

private:
    std::map<std::string, std::string> values_;
};

std::vector<std::string> split(const std::string& s, char sep);

}  // namespace dvc
