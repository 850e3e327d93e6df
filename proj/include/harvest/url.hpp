#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace harvest {

/// Absolute URL split into its parts. `port` is empty when not given.
struct Url {
    std::string scheme;  // lowercase
    std::string host;    // lowercase; empty for file:
    std::string port;
    std::string path;    // "/" when absent for hierarchical schemes
    std::optional<std::string> query;
    std::optional<std::string> fragment;

    /// Numeric port, resolving defaults for http/https; 0 when unknown.
    int port_number() const;
    /// "scheme://host[:port]"; "file://" for file URLs.
    std::string origin() const;
    /// Path plus "?query" when present.
    std::string target() const;
    std::string str() const;
    bool operator==(const Url&) const = default;
};

/// Parses an absolute URL; nullopt for relative references or malformed input.
std::optional<Url> parse_url(std::string_view s);

/// Resolves `ref` against `base` per RFC 3986 section 5.2, fragment kept.
std::optional<Url> resolve_url(const Url& base, std::string_view ref);

/// Fragment stripped, default port dropped, dot segments removed.
Url normalize_url(Url u);

/// Parse, normalize, print; nullopt when not absolute.
std::optional<std::string> normalize_url(std::string_view s);

/// Removes "." and ".." segments.
std::string remove_dot_segments(std::string_view path);

}  // namespace harvest
