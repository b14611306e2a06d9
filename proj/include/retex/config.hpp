#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace retex {

// Flat key-value configuration with [section] headers. Order-preserving so
// a parse/serialize round trip is lossless; '#' and ';' start comments.
class ConfigMap {
public:
    static ConfigMap parse(const std::string& text, const std::string& origin = "<config>");
    static ConfigMap parse_file(const std::string& path);
    std::string serialize() const;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::string require(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    uint64_t get_u64(const std::string& section, const std::string& key, uint64_t fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

private:
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    const std::string* find(const std::string& section, const std::string& key) const;
    std::vector<Section> sections_;
};

}  // namespace retex
