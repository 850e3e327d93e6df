#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace harvest {

/// Maps crowd-size phrases to the most specific conservative count.
///
/// A numeric literal anywhere in the phrase wins ("about 350 people" -> 350,
/// "1,200" -> 1200, "2.5 thousand" -> 2500); for ranges the first (low)
/// bound is taken. Otherwise the longest lexicon phrase occurring on word
/// boundaries decides ("tens of thousands" beats "thousands").
class AttendeeLexicon {
public:
    /// The built-in table (mirrors data/attendee_lexicon.tsv).
    static AttendeeLexicon defaults();
    /// `phrase<TAB>count` lines, '#' comments. Throws IoError / ConfigError.
    static AttendeeLexicon load(const std::filesystem::path& path);

    void add(std::string_view phrase, std::uint64_t count);
    std::optional<std::uint64_t> parse(std::string_view phrase) const;

    const std::vector<std::pair<std::string, std::uint64_t>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, std::uint64_t>> entries_;  // normalized phrase
};

std::optional<std::uint64_t> parse_attendee_phrase(std::string_view phrase);

}  // namespace harvest
