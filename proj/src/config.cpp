#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace hsk {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& name) {
    ConfigFile cfg;
    cfg.name_ = name;
    std::istringstream in(text);
    std::string line;
    std::string section;
    uint32_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        std::string where = name + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError(where + ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(where + ": empty section name");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(where + ": empty key");
        if (section.empty())
            throw ConfigError(where + ": key '" + key + "' appears before any [section]");
        std::string full = section + "." + key;
        if (cfg.values_.count(full))
            throw ConfigError(where + ": duplicate key '" + full + "' (first set on line " +
                              std::to_string(cfg.lines_.at(full)) + ")");
        cfg.values_[full] = value;
        cfg.lines_[full] = lineno;
    }
    return cfg;
}

std::string ConfigFile::locate(const std::string& key) const {
    auto it = lines_.find(key);
    if (it == lines_.end())
        return name_ + ": " + key;
    return name_ + ":" + std::to_string(it->second) + ": " + key;
}

std::string ConfigFile::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string ConfigFile::get_required(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError(name_ + ": missing required key '" + key + "'");
    return it->second;
}

uint64_t ConfigFile::get_u64(const std::string& key, uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    const std::string& v = it->second;
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(v.c_str(), &end, 0);
    if (v.empty() || end != v.c_str() + v.size() || v.front() == '-')
        throw ConfigError(locate(key) + ": expected an unsigned integer, got '" + v + "'");
    return parsed;
}

double ConfigFile::get_f64(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    const std::string& v = it->second;
    char* end = nullptr;
    double parsed = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
        throw ConfigError(locate(key) + ": expected a number, got '" + v + "'");
    return parsed;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "yes" || v == "on" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "off" || v == "0")
        return false;
    throw ConfigError(locate(key) + ": expected a boolean, got '" + v + "'");
}

std::vector<uint64_t> ConfigFile::get_u64_list(const std::string& key,
                                               const std::vector<uint64_t>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    std::vector<uint64_t> out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigError(locate(key) + ": empty element in list");
        char* end = nullptr;
        unsigned long long parsed = std::strtoull(item.c_str(), &end, 0);
        if (end != item.c_str() + item.size() || item.front() == '-')
            throw ConfigError(locate(key) + ": expected an unsigned integer, got '" +
                              item + "'");
        out.push_back(parsed);
    }
    if (out.empty())
        throw ConfigError(locate(key) + ": empty list");
    return out;
}

} // namespace hsk
