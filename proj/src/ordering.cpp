#include "harvest/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "harvest/error.hpp"

namespace harvest::ordering {

DistanceMatrix::DistanceMatrix(std::vector<ArticleId> ids, std::vector<double> d)
    : ids_(std::move(ids)), d_(std::move(d)) {
    const std::size_t n = ids_.size();
    if (d_.size() != n * n) throw ArgumentError("distance matrix must be n x n");
    for (std::size_t i = 0; i < n; ++i) {
        if (d_[i * n + i] != 0.0) throw ArgumentError("distance matrix diagonal must be zero");
        for (std::size_t j = 0; j < n; ++j) {
            const double v = d_[i * n + j];
            if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("distances must lie in [0, 1]");
            if (v != d_[j * n + i]) throw ArgumentError("distance matrix must be symmetric");
        }
    }
}

DistanceMatrix distance_matrix(std::span<const ArticleId> ids,
                               std::span<const similarity::DocumentSignature> signatures) {
    if (ids.empty()) throw ArgumentError("distance matrix needs at least one article");
    if (ids.size() != signatures.size()) throw ArgumentError("one signature per article id is required");
    const std::size_t n = ids.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 1.0 - similarity::jaccard_estimate(signatures[i], signatures[j]);
            d[i * n + j] = d[j * n + i] = v;
        }
    return DistanceMatrix({ids.begin(), ids.end()}, std::move(d));
}

DistanceMatrix build_distance_matrix(std::span<const ArticleRecord> articles,
                                     const similarity::SignatureParams& params) {
    std::vector<ArticleId> ids;
    std::vector<similarity::DocumentSignature> sigs;
    for (const auto& a : articles) {
        ids.push_back(a.id);
        sigs.push_back(similarity::article_signature(a, params));
    }
    return distance_matrix(ids, sigs);
}

std::vector<ArticleId> ReviewPath::ids(const DistanceMatrix& m) const {
    std::vector<ArticleId> out;
    out.reserve(order.size());
    for (auto i : order) out.push_back(m.ids()[i]);
    return out;
}

double path_length(const DistanceMatrix& m, std::span<const std::size_t> order) {
    double total = 0.0;
    for (std::size_t i = 1; i < order.size(); ++i) total += m(order[i - 1], order[i]);
    return total;
}

std::size_t two_opt(const DistanceMatrix& m, std::vector<std::size_t>& p, double eps) {
    const std::size_t n = p.size();
    std::size_t moves = 0;
    bool improved = n > 2;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i + 1 < n && !improved; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;  // full reversal, same length
                double delta = 0.0;
                if (i > 0) delta += m(p[i - 1], p[j]) - m(p[i - 1], p[i]);
                if (j + 1 < n) delta += m(p[i], p[j + 1]) - m(p[j], p[j + 1]);
                if (delta < -eps) {
                    std::reverse(p.begin() + static_cast<std::ptrdiff_t>(i),
                                 p.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                    ++moves;
                    improved = true;
                    break;
                }
            }
        }
    }
    return moves;
}

std::size_t or_opt(const DistanceMatrix& m, std::vector<std::size_t>& p, double eps) {
    const std::size_t n = p.size();
    if (n < 3) return 0;
    std::size_t moves = 0;
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t len = 1; len <= 3 && !improved; ++len) {
            for (std::size_t i = 0; i + len <= n && !improved; ++i) {
                const std::size_t j = i + len - 1;  // segment p[i..j]
                double removed = 0.0;
                if (i > 0) removed += m(p[i - 1], p[i]);
                if (j + 1 < n) removed += m(p[j], p[j + 1]);
                if (i > 0 && j + 1 < n) removed -= m(p[i - 1], p[j + 1]);
                std::vector<std::size_t> rest;
                rest.reserve(n - len);
                rest.insert(rest.end(), p.begin(), p.begin() + static_cast<std::ptrdiff_t>(i));
                rest.insert(rest.end(), p.begin() + static_cast<std::ptrdiff_t>(j) + 1, p.end());
                const std::size_t first = p[i], last = p[j];
                // Insert between rest[k-1] and rest[k], k in [0, rest.size()].
                for (std::size_t k = 0; !improved && k <= rest.size(); ++k) {
                    for (int rev = 0; rev < 2 && !improved; ++rev) {
                        if (rev && len == 1) break;
                        if (k == i && !rev) continue;  // original position
                        const std::size_t head = rev ? last : first, tail = rev ? first : last;
                        double added = 0.0;
                        if (k > 0) added += m(rest[k - 1], head);
                        if (k < rest.size()) added += m(tail, rest[k]);
                        if (k > 0 && k < rest.size()) added -= m(rest[k - 1], rest[k]);
                        if (added - removed < -eps) {
                            std::vector<std::size_t> seg(p.begin() + static_cast<std::ptrdiff_t>(i),
                                                         p.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                            if (rev) std::reverse(seg.begin(), seg.end());
                            rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(k), seg.begin(), seg.end());
                            p = std::move(rest);
                            ++moves;
                            improved = true;
                        }
                    }
                }
            }
        }
    }
    return moves;
}

ReviewPath order_queue(const DistanceMatrix& m) {
    const std::size_t n = m.size();
    ReviewPath path;
    if (n == 0) return path;
    const auto& ids = m.ids();
    auto better = [&](double v, std::size_t i, double best, std::size_t best_i) {
        return v < best || (v == best && ids[i] < ids[best_i]);
    };

    std::size_t start = 0;
    double start_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += m(i, j);
        if (i == 0 || better(s, i, start_sum, start)) {
            start = i;
            start_sum = s;
        }
    }

    std::vector<char> used(n, 0);
    path.order.push_back(start);
    used[start] = 1;
    for (std::size_t step = 1; step < n; ++step) {
        const std::size_t cur = path.order.back();
        std::size_t next = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            if (next == n || better(m(cur, j), j, best, next)) {
                next = j;
                best = m(cur, j);
            }
        }
        used[next] = 1;
        path.order.push_back(next);
    }

    do two_opt(m, path.order);
    while (or_opt(m, path.order) > 0);
    path.total_length = path_length(m, path.order);
    path.groups = {path.order};
    return path;
}

ReviewPath segment_groups(ReviewPath path, const DistanceMatrix& m, double cut) {
    path.groups.clear();
    for (std::size_t i = 0; i < path.order.size(); ++i) {
        if (i == 0 || m(path.order[i - 1], path.order[i]) > cut) path.groups.emplace_back();
        path.groups.back().push_back(path.order[i]);
    }
    return path;
}

}  // namespace harvest::ordering
