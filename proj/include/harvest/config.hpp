#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace harvest {

/// `key = value` text, one pair per line, '#' comments, later keys win.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view content);
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
    bool contains(std::string_view key) const { return values_.find(key) != values_.end(); }
    std::optional<std::string> get(std::string_view key) const;

    std::string get_string(std::string_view key, std::string fallback) const;
    double get_double(std::string_view key, double fallback) const;
    std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;

    const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

private:
    std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace harvest
