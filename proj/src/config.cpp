#include "harvest/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "harvest/error.hpp"
#include "harvest/text.hpp"

namespace harvest {

KeyValueConfig KeyValueConfig::parse(std::string_view content) {
    KeyValueConfig cfg;
    std::istringstream in{std::string(content)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = text::trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        auto key = text::trim(body.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.set(std::string(key), std::string(text::trim(body.substr(eq + 1))));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(std::string_view key, std::string fallback) const {
    return get(key).value_or(std::move(fallback));
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        double d = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + std::string(key) + "': not a number: '" + *v + "'");
    }
}

std::int64_t KeyValueConfig::get_int(std::string_view key, std::int64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size())
        throw ConfigError("config key '" + std::string(key) + "': not an integer: '" + *v + "'");
    return out;
}

bool KeyValueConfig::get_bool(std::string_view key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto s = text::to_lower(*v);
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw ConfigError("config key '" + std::string(key) + "': not a boolean: '" + *v + "'");
}

}  // namespace harvest
