#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "harvest/ids.hpp"
#include "harvest/records.hpp"

namespace harvest::similarity {

// ---------------------------------------------------------------------------
// Shingles and MinHash

struct SignatureParams {
    std::size_t width = 5;  // tokens per shingle
    std::size_t k = 256;    // MinHash length
    std::uint64_t seed = 0x51a7e5eedULL;

    bool operator==(const SignatureParams&) const = default;
};

/// Sorted, deduplicated hashes of every contiguous `w`-token window (tokens
/// joined by single spaces). A nonempty sequence shorter than `w` yields one
/// hash of the whole sequence; no tokens yield the empty set.
std::vector<std::uint64_t> shingle(std::span<const std::string> tokens, std::size_t w,
                                   std::uint64_t seed = SignatureParams{}.seed);

struct DocumentSignature {
    std::vector<std::uint64_t> shingle_hashes;  // sorted; empty when loaded from cache
    std::vector<std::uint64_t> minhash;         // k per-seed minima
    SignatureParams params;

    /// The shingle set was empty (every minimum is the sentinel).
    bool empty_set() const;
};

std::uint64_t minhash_seed(std::uint64_t base_seed, std::size_t i);

DocumentSignature make_signature(std::span<const std::string> tokens, const SignatureParams& p = {});
DocumentSignature make_signature_from_hashes(std::vector<std::uint64_t> shingle_hashes,
                                             const SignatureParams& p = {});
/// Signature over the lowercased word tokens of the article body.
DocumentSignature article_signature(const ArticleRecord& article, const SignatureParams& p = {});

/// |A n B| / |A u B|; 1 when both are empty. Throws ComparisonError when
/// width or seed differ.
double jaccard_exact(const DocumentSignature& a, const DocumentSignature& b);
/// Fraction of agreeing MinHash positions. Throws ComparisonError when
/// (w, k, seed) differ. Empty-vs-nonempty is 0, empty-vs-empty is 1.
double jaccard_estimate(const DocumentSignature& a, const DocumentSignature& b);

// ---------------------------------------------------------------------------
// Nilsimsa

struct NilsimsaDigest {
    /// Byte order matches the reference hex form.
    std::array<std::uint8_t, 32> bytes{};

    std::string hex() const;
    /// Throws ArgumentError unless given 64 hex digits.
    static NilsimsaDigest from_hex(std::string_view hex);
    bool operator==(const NilsimsaDigest&) const = default;
};

NilsimsaDigest nilsimsa_digest(std::span<const std::uint8_t> data);
NilsimsaDigest nilsimsa_digest(std::string_view data);

/// Agreeing bits minus 128, in [-128, 128].
int nilsimsa_compare(const NilsimsaDigest& a, const NilsimsaDigest& b);

struct ParagraphMatch {
    std::size_t a_index = 0;
    std::size_t b_index = 0;
    int score = 0;
};

/// For each paragraph of `a`, the best-scoring paragraph of `b` when it
/// reaches `threshold`. Paragraphs shorter than `min_bytes` are ignored.
/// Review hints only; never used for association.
std::vector<ParagraphMatch> similar_paragraphs(std::span<const std::string> a,
                                               std::span<const std::string> b, int threshold = 54,
                                               std::size_t min_bytes = 25);

// ---------------------------------------------------------------------------
// Word diff

enum class EditKind { equal, insert, remove };
std::string_view to_string(EditKind kind);  // "equal" / "insert" / "delete"

struct DiffChunk {
    EditKind kind = EditKind::equal;
    std::vector<std::string> tokens;

    bool operator==(const DiffChunk&) const = default;
};

struct WordDiff {
    std::vector<DiffChunk> ops;
    std::size_t inserted = 0;
    std::size_t deleted = 0;
    /// (inserted + deleted) / max(|a|, |b|); 0 when both are empty.
    double change_ratio = 0.0;
};

/// Minimal (LCS) edit script. Equal runs are maximal; inside each changed
/// stretch the deletion precedes the insertion.
WordDiff word_diff(std::span<const std::string> a, std::span<const std::string> b);

/// Replays `diff` over `a`. Throws ArgumentError when the equal/delete
/// chunks do not match `a`.
std::vector<std::string> apply_diff(std::span<const std::string> a, const WordDiff& diff);

/// Whitespace tokens of the joined body paragraphs, case and punctuation kept.
std::vector<std::string> body_tokens(const ArticleRecord& article);

// ---------------------------------------------------------------------------
// Auto-association

struct AssociationPolicy {
    double jaccard_min = 0.8;
    double change_ratio_max = 0.1;
};

struct DuplicateVerdict {
    double jaccard = 0.0;
    double change_ratio = 0.0;
    bool associate = false;
};

bool should_associate(double jaccard, double change_ratio, const AssociationPolicy& policy = {});

/// Compares a fresh article with a reviewed one. When `associate` is set the
/// caller copies the reviewed article's event links, tenses unchanged.
/// Throws ArgumentError if `reviewed` is not reviewed.
DuplicateVerdict propose_auto_association(const ArticleRecord& fresh, const ArticleRecord& reviewed,
                                          const SignatureParams& params = {},
                                          const AssociationPolicy& policy = {});

// ---------------------------------------------------------------------------
// Signature cache: "HSIG", version byte, then little-endian records of
// (article id i64, w u32, k u32, seed u64, k x u64 minhash).

inline constexpr std::uint8_t kSignatureCacheVersion = 1;

void write_signature_cache(const std::filesystem::path& path,
                           std::span<const std::pair<ArticleId, DocumentSignature>> entries);
std::vector<std::pair<ArticleId, DocumentSignature>> read_signature_cache(
    const std::filesystem::path& path);

}  // namespace harvest::similarity
