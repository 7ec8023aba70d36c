#ifndef HSK_CONFIG_HPP
#define HSK_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hsk {

// Flat key-value config with [section] headers. Keys are addressed as
// "section.key". Parse failures carry file and line for error messages.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text,
                                   const std::string& name = "<string>");

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const;
    std::string get_required(const std::string& key) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    double get_f64(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<uint64_t> get_u64_list(const std::string& key,
                                       const std::vector<uint64_t>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }
    const std::string& name() const { return name_; }

private:
    std::string locate(const std::string& key) const; // "file:line: key" prefix

    std::string name_;
    std::map<std::string, std::string> values_;
    std::map<std::string, uint32_t> lines_;
};

} // namespace hsk

#endif
