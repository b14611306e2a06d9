#include "retex/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "retex/errors.hpp"

namespace retex {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text, const std::string& origin) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + " line " + std::to_string(line_no) +
                                  ": unterminated section header");
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty())
                throw ConfigError(origin + " line " + std::to_string(line_no) + ": empty section name");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + " line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + " line " + std::to_string(line_no) + ": empty key");
        map.set(current, key, value);
    }
    return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

std::string ConfigMap::serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const Section& s : sections_) {
        if (!first) out << "\n";
        first = false;
        if (!s.name.empty()) out << "[" << s.name << "]\n";
        for (const auto& [k, v] : s.entries) out << k << " = " << v << "\n";
    }
    return out.str();
}

const std::string* ConfigMap::find(const std::string& section, const std::string& key) const {
    for (const Section& s : sections_) {
        if (s.name != section) continue;
        for (const auto& [k, v] : s.entries)
            if (k == key) return &v;
    }
    return nullptr;
}

bool ConfigMap::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string ConfigMap::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

std::string ConfigMap::require(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) throw ConfigError("config: missing [" + section + "] " + key);
    return *v;
}

double ConfigMap::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    char* end = nullptr;
    double d = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0')
        throw ConfigError("config: [" + section + "] " + key + " is not a number: " + *v);
    return d;
}

int ConfigMap::get_int(const std::string& section, const std::string& key, int fallback) const {
    double d = get_double(section, key, static_cast<double>(fallback));
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
        throw ConfigError("config: [" + section + "] " + key + " is not an integer");
    return i;
}

uint64_t ConfigMap::get_u64(const std::string& section, const std::string& key,
                            uint64_t fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    char* end = nullptr;
    unsigned long long u = std::strtoull(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0')
        throw ConfigError("config: [" + section + "] " + key + " is not an unsigned integer: " + *v);
    return static_cast<uint64_t>(u);
}

void ConfigMap::set(const std::string& section, const std::string& key, const std::string& value) {
    for (Section& s : sections_) {
        if (s.name != section) continue;
        for (auto& [k, v] : s.entries) {
            if (k == key) {
                v = value;
                return;
            }
        }
        s.entries.emplace_back(key, value);
        return;
    }
    sections_.push_back({section, {{key, value}}});
}

}  // namespace retex
