#include "harvest/url.hpp"

#include <cctype>

#include "harvest/text.hpp"

namespace harvest {
namespace {

bool scheme_char(char c, bool first) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) return true;
    return !first && (std::isdigit(u) || c == '+' || c == '-' || c == '.');
}

struct Reference {
    std::optional<std::string> scheme;
    std::optional<std::string> authority;
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;
};

Reference split_reference(std::string_view s) {
    Reference r;
    if (auto hash = s.find('#'); hash != std::string_view::npos) {
        r.fragment = std::string(s.substr(hash + 1));
        s = s.substr(0, hash);
    }
    if (auto q = s.find('?'); q != std::string_view::npos) {
        r.query = std::string(s.substr(q + 1));
        s = s.substr(0, q);
    }
    std::size_t i = 0;
    while (i < s.size() && scheme_char(s[i], i == 0)) ++i;
    if (i > 0 && i < s.size() && s[i] == ':') {
        r.scheme = text::to_lower(s.substr(0, i));
        s = s.substr(i + 1);
    }
    if (s.substr(0, 2) == "//") {
        s = s.substr(2);
        const auto slash = s.find('/');
        r.authority = std::string(s.substr(0, slash));
        s = slash == std::string_view::npos ? std::string_view{} : s.substr(slash);
    }
    r.path = std::string(s);
    return r;
}

bool split_authority(std::string_view auth, Url& u) {
    if (auto at = auth.rfind('@'); at != std::string_view::npos) auth = auth.substr(at + 1);
    std::string_view host = auth;
    std::string_view port;
    if (!auth.empty() && auth.front() == '[') {
        const auto close = auth.find(']');
        if (close == std::string_view::npos) return false;
        host = auth.substr(0, close + 1);
        auto rest = auth.substr(close + 1);
        if (!rest.empty()) {
            if (rest.front() != ':') return false;
            port = rest.substr(1);
        }
    } else if (auto colon = auth.rfind(':'); colon != std::string_view::npos) {
        host = auth.substr(0, colon);
        port = auth.substr(colon + 1);
    }
    for (char c : port)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    if (port.size() > 5) return false;
    u.host = text::to_lower(host);
    u.port = std::string(port);
    return true;
}

std::string merge_paths(const Url& base, std::string_view ref_path) {
    if (!base.host.empty() && base.path.empty()) return "/" + std::string(ref_path);
    const auto slash = base.path.rfind('/');
    if (slash == std::string::npos) return std::string(ref_path);
    return base.path.substr(0, slash + 1) + std::string(ref_path);
}

bool hierarchical(const std::string& scheme) {
    return scheme == "http" || scheme == "https" || scheme == "file";
}

}  // namespace

int Url::port_number() const {
    if (!port.empty()) return std::stoi(port);
    if (scheme == "http") return 80;
    if (scheme == "https") return 443;
    return 0;
}

std::string Url::origin() const {
    if (scheme == "file") return "file://" + host;
    return scheme + "://" + host + (port.empty() ? "" : ":" + port);
}

std::string Url::target() const { return path + (query ? "?" + *query : ""); }

std::string Url::str() const {
    std::string out = scheme + ":";
    if (hierarchical(scheme) || !host.empty()) out += "//" + host + (port.empty() ? "" : ":" + port);
    out += target();
    if (fragment) out += "#" + *fragment;
    return out;
}

std::optional<Url> parse_url(std::string_view s) {
    s = text::trim(s);
    auto r = split_reference(s);
    if (!r.scheme) return std::nullopt;
    Url u;
    u.scheme = *r.scheme;
    if (r.authority) {
        if (!split_authority(*r.authority, u)) return std::nullopt;
    } else if (u.scheme == "http" || u.scheme == "https") {
        return std::nullopt;
    }
    if ((u.scheme == "http" || u.scheme == "https") && u.host.empty()) return std::nullopt;
    u.path = remove_dot_segments(r.path);
    if (u.path.empty() && hierarchical(u.scheme)) u.path = "/";
    u.query = r.query;
    u.fragment = r.fragment;
    return u;
}

std::optional<Url> resolve_url(const Url& base, std::string_view ref) {
    ref = text::trim(ref);
    auto r = split_reference(ref);
    Url t;
    if (r.scheme) return parse_url(ref);
    t.scheme = base.scheme;
    if (r.authority) {
        if (!split_authority(*r.authority, t)) return std::nullopt;
        t.path = remove_dot_segments(r.path);
        t.query = r.query;
    } else {
        t.host = base.host;
        t.port = base.port;
        if (r.path.empty()) {
            t.path = base.path;
            t.query = r.query ? r.query : base.query;
        } else {
            t.path = remove_dot_segments(r.path.front() == '/' ? r.path : merge_paths(base, r.path));
            t.query = r.query;
        }
    }
    if (t.path.empty() && hierarchical(t.scheme)) t.path = "/";
    t.fragment = r.fragment;
    return t;
}

Url normalize_url(Url u) {
    u.fragment.reset();
    if ((u.scheme == "http" && u.port == "80") || (u.scheme == "https" && u.port == "443")) u.port.clear();
    while (u.port.size() > 1 && u.port.front() == '0') u.port.erase(0, 1);
    u.path = remove_dot_segments(u.path);
    if (u.path.empty() && hierarchical(u.scheme)) u.path = "/";
    return u;
}

std::optional<std::string> normalize_url(std::string_view s) {
    auto u = parse_url(s);
    if (!u) return std::nullopt;
    return normalize_url(*u).str();
}

std::string remove_dot_segments(std::string_view in) {
    std::string out;
    while (!in.empty()) {
        if (in.substr(0, 3) == "../") {
            in.remove_prefix(3);
        } else if (in.substr(0, 2) == "./") {
            in.remove_prefix(2);
        } else if (in.substr(0, 3) == "/./") {
            in.remove_prefix(2);
        } else if (in == "/.") {
            in = "/";
        } else if (in.substr(0, 4) == "/../" || in == "/..") {
            in = in.size() == 3 ? std::string_view("/") : in.substr(3);
            const auto slash = out.rfind('/');
            out.erase(slash == std::string::npos ? 0 : slash);
        } else if (in == "." || in == "..") {
            in = {};
        } else {
            const auto next = in.find('/', in.front() == '/' ? 1 : 0);
            out.append(in.substr(0, next));
            in = next == std::string_view::npos ? std::string_view{} : in.substr(next);
        }
    }
    return out;
}

}  // namespace harvest
