#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "harvest/ids.hpp"
#include "harvest/records.hpp"
#include "harvest/similarity.hpp"

namespace harvest::ordering {

/// Symmetric pairwise distances with zero diagonal, indexed in `ids` order.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    /// Throws ArgumentError unless `d` is n*n, symmetric, zero on the
    /// diagonal and within [0, 1].
    DistanceMatrix(std::vector<ArticleId> ids, std::vector<double> d);

    std::size_t size() const { return ids_.size(); }
    const std::vector<ArticleId>& ids() const { return ids_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * ids_.size() + j]; }

private:
    std::vector<ArticleId> ids_;
    std::vector<double> d_;
};

/// d = 1 - jaccard_estimate. Throws ComparisonError on mismatched signature
/// parameters and ArgumentError on empty input or a length mismatch.
DistanceMatrix distance_matrix(std::span<const ArticleId> ids,
                               std::span<const similarity::DocumentSignature> signatures);
DistanceMatrix build_distance_matrix(std::span<const ArticleRecord> articles,
                                     const similarity::SignatureParams& params = {});

struct ReviewPath {
    std::vector<std::size_t> order;               // matrix indices in visiting order
    double total_length = 0.0;
    std::vector<std::vector<std::size_t>> groups;  // contiguous runs of `order`

    std::vector<ArticleId> ids(const DistanceMatrix& m) const;
};

double path_length(const DistanceMatrix& m, std::span<const std::size_t> order);

/// Nearest-neighbour construction from the vertex with the smallest summed
/// distance, then 2-opt and Or-opt passes on the open path until neither
/// improves, so the result is 2-opt locally optimal. Ties go to the smaller
/// article id. The result has a single group.
ReviewPath order_queue(const DistanceMatrix& m);

/// Improves `order` in place until no segment reversal shortens it by more
/// than `eps`; returns the number of moves applied.
std::size_t two_opt(const DistanceMatrix& m, std::vector<std::size_t>& order, double eps = 1e-12);

/// Relocates segments of one to three vertices (optionally reversed) while
/// that shortens the path by more than `eps`; returns the number of moves.
std::size_t or_opt(const DistanceMatrix& m, std::vector<std::size_t>& order, double eps = 1e-12);

/// Cuts every consecutive edge whose distance exceeds `cut`.
ReviewPath segment_groups(ReviewPath path, const DistanceMatrix& m, double cut = 0.5);

}  // namespace harvest::ordering
