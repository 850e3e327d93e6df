#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace harvest::testing {

using Tokens = std::vector<std::string>;

inline Tokens random_tokens(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
    std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);
    Tokens out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(pick(rng)));
    return out;
}

/// Each token is independently kept, replaced, dropped or followed by an
/// insertion; `rate` is the total edit probability per token.
inline Tokens mutate(std::mt19937_64& rng, const Tokens& src, double rate, std::size_t vocab) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);
    Tokens out;
    for (const auto& t : src) {
        const double r = u(rng);
        if (r < rate / 3) {
            out.push_back("w" + std::to_string(pick(rng)));
        } else if (r < 2 * rate / 3) {
            continue;
        } else if (r < rate) {
            out.push_back(t);
            out.push_back("w" + std::to_string(pick(rng)));
        } else {
            out.push_back(t);
        }
    }
    return out;
}

/// Quadratic dynamic-programming LCS length.
inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// Jaccard of two hash sets by direct set arithmetic.
inline double set_jaccard(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    if (a.empty() && b.empty()) return 1.0;
    std::vector<std::uint64_t> inter;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    return static_cast<double>(inter.size()) / static_cast<double>(a.size() + b.size() - inter.size());
}

}  // namespace harvest::testing
