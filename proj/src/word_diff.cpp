#include <algorithm>
#include <unordered_map>

#include "harvest/error.hpp"
#include "harvest/similarity.hpp"
#include "harvest/text.hpp"

namespace harvest::similarity {

namespace {

// Marks matched positions of a[0..n) and b[0..m) along a minimal edit path.
// Myers' bisection: forward and reverse searches meet on the middle snake,
// then both halves are solved independently.
class Matcher {
public:
    Matcher(const std::vector<int>& a, const std::vector<int>& b)
        : a_(a), b_(b), in_a_(a.size(), 0), in_b_(b.size(), 0) {}

    void run() { solve(0, static_cast<long>(a_.size()), 0, static_cast<long>(b_.size())); }

    const std::vector<char>& matched_a() const { return in_a_; }
    const std::vector<char>& matched_b() const { return in_b_; }

private:
    void solve(long a0, long a1, long b0, long b1) {
        while (a0 < a1 && b0 < b1 && a_[a0] == b_[b0]) {
            in_a_[a0++] = 1;
            in_b_[b0++] = 1;
        }
        while (a0 < a1 && b0 < b1 && a_[a1 - 1] == b_[b1 - 1]) {
            in_a_[--a1] = 1;
            in_b_[--b1] = 1;
        }
        if (a0 == a1 || b0 == b1) return;
        long x, y;
        if (!bisect(a0, a1, b0, b1, x, y)) return;  // nothing in common
        solve(a0, a0 + x, b0, b0 + y);
        solve(a0 + x, a1, b0 + y, b1);
    }

    bool bisect(long a0, long a1, long b0, long b1, long& split_x, long& split_y) {
        const long n = a1 - a0, m = b1 - b0;
        const long max_d = (n + m + 1) / 2;
        const long offset = max_d;
        const long len = 2 * max_d + 2;
        v1_.assign(static_cast<std::size_t>(len), -1);
        v2_.assign(static_cast<std::size_t>(len), -1);
        v1_[offset + 1] = 0;
        v2_[offset + 1] = 0;
        const long delta = n - m;
        const bool front = (delta % 2) != 0;
        long k1start = 0, k1end = 0, k2start = 0, k2end = 0;
        auto A = [&](long i) { return a_[a0 + i]; };
        auto B = [&](long j) { return b_[b0 + j]; };

        for (long d = 0; d < max_d; ++d) {
            for (long k1 = -d + k1start; k1 <= d - k1end; k1 += 2) {
                const long k1o = offset + k1;
                long x1 = (k1 == -d || (k1 != d && v1_[k1o - 1] < v1_[k1o + 1])) ? v1_[k1o + 1]
                                                                                 : v1_[k1o - 1] + 1;
                long y1 = x1 - k1;
                while (x1 < n && y1 < m && A(x1) == B(y1)) {
                    ++x1;
                    ++y1;
                }
                v1_[k1o] = x1;
                if (x1 > n) {
                    k1end += 2;
                } else if (y1 > m) {
                    k1start += 2;
                } else if (front) {
                    const long k2o = offset + delta - k1;
                    if (k2o >= 0 && k2o < len && v2_[k2o] != -1 && x1 >= n - v2_[k2o]) {
                        split_x = x1;
                        split_y = y1;
                        return true;
                    }
                }
            }
            for (long k2 = -d + k2start; k2 <= d - k2end; k2 += 2) {
                const long k2o = offset + k2;
                long x2 = (k2 == -d || (k2 != d && v2_[k2o - 1] < v2_[k2o + 1])) ? v2_[k2o + 1]
                                                                                 : v2_[k2o - 1] + 1;
                long y2 = x2 - k2;
                while (x2 < n && y2 < m && A(n - x2 - 1) == B(m - y2 - 1)) {
                    ++x2;
                    ++y2;
                }
                v2_[k2o] = x2;
                if (x2 > n) {
                    k2end += 2;
                } else if (y2 > m) {
                    k2start += 2;
                } else if (!front) {
                    const long k1o = offset + delta - k2;
                    if (k1o >= 0 && k1o < len && v1_[k1o] != -1) {
                        const long x1 = v1_[k1o];
                        const long y1 = offset + x1 - k1o;
                        if (x1 >= n - x2) {
                            split_x = x1;
                            split_y = y1;
                            return true;
                        }
                    }
                }
            }
        }
        return false;
    }

    const std::vector<int>& a_;
    const std::vector<int>& b_;
    std::vector<char> in_a_, in_b_;
    std::vector<long> v1_, v2_;
};

void push(std::vector<DiffChunk>& ops, EditKind kind, const std::string& token) {
    if (ops.empty() || ops.back().kind != kind) ops.push_back({kind, {}});
    ops.back().tokens.push_back(token);
}

}  // namespace

std::string_view to_string(EditKind kind) {
    switch (kind) {
        case EditKind::equal: return "equal";
        case EditKind::insert: return "insert";
        case EditKind::remove: return "delete";
    }
    return "equal";
}

WordDiff word_diff(std::span<const std::string> a, std::span<const std::string> b) {
    std::unordered_map<std::string_view, int> ids;
    auto intern = [&](std::span<const std::string> seq) {
        std::vector<int> out;
        out.reserve(seq.size());
        for (const auto& t : seq) out.push_back(ids.emplace(t, static_cast<int>(ids.size())).first->second);
        return out;
    };
    const auto ia = intern(a);
    const auto ib = intern(b);
    Matcher matcher(ia, ib);
    matcher.run();
    const auto& ma = matcher.matched_a();
    const auto& mb = matcher.matched_b();

    WordDiff diff;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        while (i < a.size() && !ma[i]) {
            push(diff.ops, EditKind::remove, a[i++]);
            ++diff.deleted;
        }
        while (j < b.size() && !mb[j]) {
            push(diff.ops, EditKind::insert, b[j++]);
            ++diff.inserted;
        }
        while (i < a.size() && j < b.size() && ma[i] && mb[j]) {
            push(diff.ops, EditKind::equal, a[i]);
            ++i;
            ++j;
        }
    }
    const std::size_t longest = std::max(a.size(), b.size());
    diff.change_ratio =
        longest == 0 ? 0.0 : static_cast<double>(diff.inserted + diff.deleted) / static_cast<double>(longest);
    return diff;
}

std::vector<std::string> apply_diff(std::span<const std::string> a, const WordDiff& diff) {
    std::vector<std::string> out;
    std::size_t i = 0;
    for (const auto& chunk : diff.ops) {
        if (chunk.kind == EditKind::insert) {
            out.insert(out.end(), chunk.tokens.begin(), chunk.tokens.end());
            continue;
        }
        for (const auto& t : chunk.tokens) {
            if (i >= a.size() || a[i] != t)
                throw ArgumentError("diff does not match the source sequence at token " + std::to_string(i));
            if (chunk.kind == EditKind::equal) out.push_back(t);
            ++i;
        }
    }
    if (i != a.size()) throw ArgumentError("diff leaves source tokens unconsumed");
    return out;
}

std::vector<std::string> body_tokens(const ArticleRecord& article) {
    std::vector<std::string> out;
    for (const auto& para : article.body) {
        auto words = text::split_whitespace(para);
        out.insert(out.end(), std::make_move_iterator(words.begin()), std::make_move_iterator(words.end()));
    }
    return out;
}

}  // namespace harvest::similarity
