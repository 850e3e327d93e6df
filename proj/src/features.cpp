#include <algorithm>
#include <cctype>
#include <cmath>

#include "harvest/classify.hpp"
#include "harvest/error.hpp"
#include "harvest/hash.hpp"

namespace harvest::classify {

namespace {

constexpr std::string_view kCounter = "counter";
constexpr std::size_t kMinCounterRest = 4;

bool ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Byte length of a separator sequence starting at s[i], or 0. Covers ASCII
// punctuation and whitespace plus common UTF-8 dashes, quotes and spaces.
std::size_t separator_at(std::string_view s, std::size_t i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) return ascii_alnum(c) ? 0 : 1;
    if (c == 0xC2 && i + 1 < s.size()) {
        const auto d = static_cast<unsigned char>(s[i + 1]);
        if (d == 0xA0 || d == 0xAB || d == 0xBB || d == 0xB7) return 2;
    }
    if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80) {
        const auto d = static_cast<unsigned char>(s[i + 2]);
        if (d >= 0x80 && d <= 0xAF && d != 0x98 && d != 0x99) return 3;
    }
    return 0;
}

// Length of an apostrophe at s[i] ("'" or U+2019/U+2018), or 0.
std::size_t apostrophe_at(std::string_view s, std::size_t i) {
    if (s[i] == '\'') return 1;
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(s[i + 2]) == 0x99 || static_cast<unsigned char>(s[i + 2]) == 0x98))
        return 3;
    return 0;
}

void emit(std::vector<std::string>& out, std::string& word) {
    if (word.empty()) return;
    if (word.size() >= kCounter.size() + kMinCounterRest && word.starts_with(kCounter)) {
        out.emplace_back(kCounter);
        out.push_back(word.substr(kCounter.size()));
    } else {
        out.push_back(word);
    }
    word.clear();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string word;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::size_t a = apostrophe_at(text, i)) {
            const bool inside = !word.empty() && i + a < text.size() && separator_at(text, i + a) == 0 &&
                                apostrophe_at(text, i + a) == 0;
            if (inside) word.push_back('\'');
            else emit(out, word);
            i += a;
            continue;
        }
        if (std::size_t n = separator_at(text, i)) {
            emit(out, word);
            i += n;
            continue;
        }
        const auto c = static_cast<unsigned char>(text[i]);
        word.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
        ++i;
    }
    emit(out, word);
    return out;
}

double FeatureVector::norm() const {
    double s = 0.0;
    for (const auto& [_, v] : entries) s += v * v;
    return std::sqrt(s);
}

FeatureVector featurize(std::span<const std::string> tokens, const FeatureConfig& cfg) {
    if (cfg.dim == 0 || (cfg.dim & (cfg.dim - 1)) != 0 || cfg.dim > (std::size_t{1} << 32))
        throw ArgumentError("feature dimension must be a power of two up to 2^32");
    const std::uint64_t mask = cfg.dim - 1;
    std::vector<std::uint32_t> idx;
    idx.reserve(tokens.size() * 2);
    std::string key;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        key = "u:";
        key += tokens[i];
        idx.push_back(static_cast<std::uint32_t>(hash64(key, cfg.seed) & mask));
        if (i + 1 < tokens.size()) {
            key = "b:";
            key += tokens[i];
            key += ' ';
            key += tokens[i + 1];
            idx.push_back(static_cast<std::uint32_t>(hash64(key, cfg.seed) & mask));
        }
    }
    std::sort(idx.begin(), idx.end());
    FeatureVector fv;
    fv.dim = cfg.dim;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && idx[j] == idx[i]) ++j;
        fv.entries.emplace_back(idx[i], static_cast<double>(j - i));
        i = j;
    }
    const double n = fv.norm();
    if (n > 0)
        for (auto& e : fv.entries) e.second /= n;
    return fv;
}

FeatureVector featurize_article(const ArticleRecord& article, const FeatureConfig& cfg) {
    std::string text = article.title;
    for (const auto& p : article.body) {
        text.push_back('\n');
        text += p;
    }
    const auto tokens = tokenize(text);
    return featurize(tokens, cfg);
}

}  // namespace harvest::classify
