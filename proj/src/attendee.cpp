#include "harvest/attendee.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "harvest/error.hpp"
#include "harvest/text.hpp"

namespace harvest {

namespace {

// Lowercase, dashes and most punctuation become spaces, digits keep their
// grouping commas and decimal points.
std::vector<std::string> phrase_tokens(std::string_view s) {
    std::string norm;
    norm.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        bool digit_sep = (c == ',' || c == '.') && i > 0 && i + 1 < s.size() &&
                         std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
                         std::isdigit(static_cast<unsigned char>(s[i + 1]));
        if (std::isalnum(static_cast<unsigned char>(c)) || digit_sep) {
            norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            norm.push_back(' ');
        }
    }
    return text::split_whitespace(norm);
}

std::optional<double> numeric_value(const std::string& token) {
    std::string digits;
    bool dot = false;
    for (char c : token) {
        if (c == ',') continue;
        if (c == '.') {
            if (dot) return std::nullopt;
            dot = true;
        } else if (!std::isdigit(static_cast<unsigned char>(c))) {
            return std::nullopt;
        }
        digits.push_back(c);
    }
    if (digits.empty() || digits == ".") return std::nullopt;
    return std::stod(digits);
}

std::optional<std::uint64_t> exact_integer(const std::string& token) {
    std::string digits;
    for (char c : token) {
        if (c == ',') continue;
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        digits.push_back(c);
    }
    if (digits.empty()) return std::nullopt;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || p != digits.data() + digits.size()) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> multiplier(const std::string& word) {
    if (word == "hundred") return 100;
    if (word == "thousand") return 1000;
    if (word == "million") return 1000000;
    return std::nullopt;
}

}  // namespace

AttendeeLexicon AttendeeLexicon::defaults() {
    AttendeeLexicon lex;
    lex.add("a dozen", 10);
    lex.add("dozens", 20);
    lex.add("hundreds", 100);
    lex.add("a couple hundred", 200);
    lex.add("thousands", 1000);
    lex.add("tens of thousands", 10000);
    return lex;
}

AttendeeLexicon AttendeeLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read attendee lexicon " + path.string());
    AttendeeLexicon lex;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = text::trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto tab = body.find('\t');
        if (tab == std::string_view::npos)
            throw ConfigError("lexicon line " + std::to_string(lineno) + ": expected phrase<TAB>count");
        auto count = exact_integer(std::string(text::trim(body.substr(tab + 1))));
        if (!count) throw ConfigError("lexicon line " + std::to_string(lineno) + ": bad count");
        lex.add(body.substr(0, tab), *count);
    }
    return lex;
}

void AttendeeLexicon::add(std::string_view phrase, std::uint64_t count) {
    auto tokens = phrase_tokens(phrase);
    if (tokens.empty()) throw ConfigError("empty attendee phrase");
    entries_.emplace_back(text::join(tokens, " "), count);
}

std::optional<std::uint64_t> AttendeeLexicon::parse(std::string_view phrase) const {
    auto tokens = phrase_tokens(phrase);

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto value = numeric_value(tokens[i]);
        if (!value) continue;
        if (i + 1 < tokens.size()) {
            if (auto m = multiplier(tokens[i + 1])) {
                double scaled = *value * static_cast<double>(*m);
                if (scaled >= static_cast<double>(std::numeric_limits<std::uint64_t>::max()))
                    return std::nullopt;
                return static_cast<std::uint64_t>(std::floor(scaled));
            }
        }
        if (auto exact = exact_integer(tokens[i])) return exact;
        return static_cast<std::uint64_t>(std::floor(*value));
    }

    // Longest lexicon phrase on word boundaries; earlier entry wins a tie.
    std::optional<std::uint64_t> best;
    std::size_t best_len = 0;
    for (const auto& [entry, count] : entries_) {
        auto words = text::split_whitespace(entry);
        if (words.size() > tokens.size() || words.size() <= best_len) continue;
        for (std::size_t i = 0; i + words.size() <= tokens.size(); ++i) {
            bool match = true;
            for (std::size_t j = 0; j < words.size() && match; ++j) match = tokens[i + j] == words[j];
            if (match) {
                best = count;
                best_len = words.size();
                break;
            }
        }
    }
    return best;
}

std::optional<std::uint64_t> parse_attendee_phrase(std::string_view phrase) {
    static const AttendeeLexicon kDefaults = AttendeeLexicon::defaults();
    return kDefaults.parse(phrase);
}

}  // namespace harvest
