#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "harvest/error.hpp"
#include "harvest/hash.hpp"
#include "harvest/similarity.hpp"
#include "harvest/text.hpp"
#include "support/fixtures.hpp"
#include "support/random_docs.hpp"

namespace harvest::similarity {
namespace {

using harvest::testing::data_dir;
using harvest::testing::Tokens;

std::string unhex(const std::string& hex) {
    std::string out;
    for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
        out.push_back(static_cast<char>(std::stoi(hex.substr(i, 2), nullptr, 16)));
    return out;
}

std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, '\t')) cols.push_back(col);
        rows.push_back(cols);
    }
    return rows;
}

ArticleRecord article_from(const std::string& body, ReviewStatus status = ReviewStatus::unreviewed) {
    ArticleRecord a;
    a.url = "https://example.org/x";
    a.status = status;
    std::stringstream ss(body);
    std::string line;
    while (std::getline(ss, line))
        if (!text::trim(line).empty()) a.body.push_back(line);
    return a;
}

// -- shingles -------------------------------------------------------------

TEST(Shingle, ContiguousWindows) {
    const Tokens t{"a", "b", "c", "d"};
    auto s = shingle(t, 3);
    std::vector<std::uint64_t> want{hash64("a b c", SignatureParams{}.seed), hash64("b c d", SignatureParams{}.seed)};
    std::sort(want.begin(), want.end());
    EXPECT_EQ(s, want);
}

TEST(Shingle, ShortInputHashesWholeSequence) {
    const Tokens t{"a", "b"};
    auto s = shingle(t, 3);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], hash64("a b", SignatureParams{}.seed));
}

TEST(Shingle, RepeatsDeduplicate) {
    const Tokens t{"a", "b", "a", "b", "a"};
    EXPECT_EQ(shingle(t, 2).size(), 2u);
}

TEST(Shingle, ZeroWidthRejected) {
    const Tokens t{"a"};
    EXPECT_THROW(shingle(t, 0), ArgumentError);
    EXPECT_TRUE(shingle(Tokens{}, 5).empty());
}

// -- Jaccard --------------------------------------------------------------

TEST(Jaccard, ExactSetArithmetic) {
    auto a = make_signature_from_hashes({1, 2, 3});
    auto b = make_signature_from_hashes({2, 3, 4});
    auto c = make_signature_from_hashes({7, 8});
    EXPECT_DOUBLE_EQ(jaccard_exact(a, b), 0.5);
    EXPECT_DOUBLE_EQ(jaccard_exact(a, a), 1.0);
    EXPECT_DOUBLE_EQ(jaccard_exact(a, c), 0.0);
    EXPECT_DOUBLE_EQ(jaccard_exact(b, a), jaccard_exact(a, b));
}

TEST(Jaccard, EmptySetRules) {
    auto e = make_signature_from_hashes({});
    auto f = make_signature_from_hashes({});
    auto a = make_signature_from_hashes({1, 2});
    EXPECT_TRUE(e.empty_set());
    EXPECT_FALSE(a.empty_set());
    EXPECT_DOUBLE_EQ(jaccard_exact(e, f), 1.0);
    EXPECT_DOUBLE_EQ(jaccard_estimate(e, f), 1.0);
    EXPECT_DOUBLE_EQ(jaccard_exact(e, a), 0.0);
    EXPECT_DOUBLE_EQ(jaccard_estimate(e, a), 0.0);
    EXPECT_DOUBLE_EQ(jaccard_estimate(a, e), 0.0);
}

TEST(Jaccard, ParameterMismatchThrows) {
    auto a = make_signature_from_hashes({1, 2}, {5, 256, 1});
    EXPECT_THROW(jaccard_exact(a, make_signature_from_hashes({1, 2}, {4, 256, 1})), ComparisonError);
    EXPECT_THROW(jaccard_exact(a, make_signature_from_hashes({1, 2}, {5, 256, 2})), ComparisonError);
    EXPECT_NO_THROW(jaccard_exact(a, make_signature_from_hashes({1, 2}, {5, 128, 1})));
    EXPECT_THROW(jaccard_estimate(a, make_signature_from_hashes({1, 2}, {5, 128, 1})), ComparisonError);
}

TEST(MinHash, SignatureIsPerSeedMinimum) {
    std::vector<std::uint64_t> hashes{11, 22, 33, 44};
    auto sig = make_signature_from_hashes(hashes, {5, 16, 9});
    ASSERT_EQ(sig.minhash.size(), 16u);
    for (std::size_t i = 0; i < 16; ++i) {
        std::uint64_t m = UINT64_MAX;
        for (auto x : hashes) m = std::min(m, mix64(x ^ minhash_seed(9, i)));
        EXPECT_EQ(sig.minhash[i], m);
    }
}

TEST(MinHash, IdenticalDocumentsEstimateOne) {
    std::mt19937_64 rng(3);
    auto t = harvest::testing::random_tokens(rng, 300, 50);
    EXPECT_DOUBLE_EQ(jaccard_estimate(make_signature(t), make_signature(t)), 1.0);
}

TEST(MinHash, EstimateUnbiasedWithBoundedSpread) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> rate(0.0, 0.6);
    const std::size_t trials = 300;
    double sum_err = 0, sum_sq = 0;
    std::size_t within = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        auto a = harvest::testing::random_tokens(rng, 200, 400);
        auto b = harvest::testing::mutate(rng, a, rate(rng), 400);
        auto sa = make_signature(a), sb = make_signature(b);
        const double exact = harvest::testing::set_jaccard(sa.shingle_hashes, sb.shingle_hashes);
        EXPECT_DOUBLE_EQ(jaccard_exact(sa, sb), exact);
        const double err = jaccard_estimate(sa, sb) - exact;
        sum_err += err;
        sum_sq += err * err;
        within += std::abs(err) <= 0.1;
    }
    EXPECT_LT(std::abs(sum_err / trials), 0.01);
    EXPECT_LE(std::sqrt(sum_sq / trials), 0.5 / std::sqrt(256.0));
    EXPECT_GE(within, trials * 99 / 100);
}

// -- Nilsimsa -------------------------------------------------------------

TEST(Nilsimsa, MatchesReferenceVectors) {
    auto rows = read_tsv(data_dir() / "nilsimsa_vectors.tsv");
    ASSERT_GE(rows.size(), 50u);
    for (const auto& r : rows) {
        ASSERT_EQ(r.size(), 2u);
        EXPECT_EQ(nilsimsa_digest(unhex(r[0])).hex(), r[1]) << "input " << r[0];
    }
}

TEST(Nilsimsa, KnownShortDigests) {
    EXPECT_EQ(nilsimsa_digest("").hex(), std::string(64, '0'));
    EXPECT_EQ(nilsimsa_digest("ab").hex(), std::string(64, '0'));
    EXPECT_EQ(nilsimsa_digest("abcd").hex(), "0440000000000000000000000000000000100000000000000008000000000000");
}

TEST(Nilsimsa, OneCharacterEditScoresHigh) {
    auto rows = read_tsv(data_dir() / "nilsimsa_edit_pair.tsv");
    ASSERT_EQ(rows.size(), 1u);
    const auto& r = rows[0];
    ASSERT_GE(r[0].size(), 500u);
    auto a = nilsimsa_digest(r[0]);
    auto b = nilsimsa_digest(r[1]);
    EXPECT_EQ(a.hex(), r[2]);
    EXPECT_EQ(b.hex(), r[3]);
    EXPECT_EQ(nilsimsa_compare(a, b), std::stoi(r[4]));
    EXPECT_GE(nilsimsa_compare(a, b), 90);
}

TEST(Nilsimsa, CompareBounds) {
    auto a = nilsimsa_digest("The quick brown fox jumps over the lazy dog");
    NilsimsaDigest inv;
    for (std::size_t i = 0; i < 32; ++i) inv.bytes[i] = static_cast<std::uint8_t>(~a.bytes[i]);
    EXPECT_EQ(nilsimsa_compare(a, a), 128);
    EXPECT_EQ(nilsimsa_compare(a, inv), -128);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        NilsimsaDigest x, y;
        for (std::size_t i = 0; i < 32; ++i) {
            x.bytes[i] = static_cast<std::uint8_t>(rng());
            y.bytes[i] = static_cast<std::uint8_t>(rng());
        }
        EXPECT_EQ(nilsimsa_compare(x, y), nilsimsa_compare(y, x));
        EXPECT_EQ(nilsimsa_compare(x, x), 128);
    }
}

TEST(Nilsimsa, HexRoundTrip) {
    auto a = nilsimsa_digest("protesters marched downtown");
    EXPECT_EQ(NilsimsaDigest::from_hex(a.hex()), a);
    EXPECT_THROW(NilsimsaDigest::from_hex("abc"), ArgumentError);
    EXPECT_THROW(NilsimsaDigest::from_hex(std::string(64, 'g')), ArgumentError);
}

TEST(Nilsimsa, SimilarParagraphsFindsEditedCopy) {
    auto rows = read_tsv(data_dir() / "nilsimsa_edit_pair.tsv");
    const std::vector<std::string> a{"short", rows[0][0], "An unrelated paragraph about the weather and sporting results this week."};
    const std::vector<std::string> b{"Another unrelated block on city budgets, zoning and road repairs downtown.", rows[0][1]};
    auto m = similar_paragraphs(a, b);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].a_index, 1u);
    EXPECT_EQ(m[0].b_index, 1u);
    EXPECT_GE(m[0].score, 90);
}

// -- word diff ------------------------------------------------------------

TEST(WordDiff, SingleSubstitution) {
    const Tokens a{"the", "cat", "sat"}, b{"the", "dog", "sat"};
    auto d = word_diff(a, b);
    const std::vector<DiffChunk> want{{EditKind::equal, {"the"}},
                                      {EditKind::remove, {"cat"}},
                                      {EditKind::insert, {"dog"}},
                                      {EditKind::equal, {"sat"}}};
    EXPECT_EQ(d.ops, want);
    EXPECT_DOUBLE_EQ(d.change_ratio, 2.0 / 3.0);
}

TEST(WordDiff, IdenticalAndEmpty) {
    const Tokens x{"a", "b", "c"};
    auto same = word_diff(x, x);
    ASSERT_EQ(same.ops.size(), 1u);
    EXPECT_EQ(same.ops[0].kind, EditKind::equal);
    EXPECT_DOUBLE_EQ(same.change_ratio, 0.0);

    auto ins = word_diff(Tokens{}, Tokens{"a"});
    ASSERT_EQ(ins.ops.size(), 1u);
    EXPECT_EQ(ins.ops[0].kind, EditKind::insert);
    EXPECT_DOUBLE_EQ(ins.change_ratio, 1.0);

    auto none = word_diff(Tokens{}, Tokens{});
    EXPECT_TRUE(none.ops.empty());
    EXPECT_DOUBLE_EQ(none.change_ratio, 0.0);
}

TEST(WordDiff, DisjointSequencesRatioTwo) {
    auto d = word_diff(Tokens{"a", "b"}, Tokens{"c", "d"});
    EXPECT_DOUBLE_EQ(d.change_ratio, 2.0);
    ASSERT_EQ(d.ops.size(), 2u);
    EXPECT_EQ(d.ops[0].kind, EditKind::remove);
    EXPECT_EQ(d.ops[1].kind, EditKind::insert);
}

TEST(WordDiff, MinimalInvertibleAndCanonical) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> len(0, 40), vocab(1, 8);
    std::uniform_real_distribution<double> rate(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const std::size_t v = vocab(rng);
        auto a = harvest::testing::random_tokens(rng, len(rng), v);
        auto b = t % 2 ? harvest::testing::random_tokens(rng, len(rng), v)
                       : harvest::testing::mutate(rng, a, rate(rng), v);
        auto d = word_diff(a, b);
        ASSERT_EQ(apply_diff(a, d), b);
        const std::size_t lcs = harvest::testing::lcs_length(a, b);
        ASSERT_EQ(d.inserted + d.deleted, a.size() + b.size() - 2 * lcs);
        for (std::size_t i = 0; i < d.ops.size(); ++i) {
            ASSERT_FALSE(d.ops[i].tokens.empty());
            if (i > 0) {
                ASSERT_NE(d.ops[i].kind, d.ops[i - 1].kind);
                ASSERT_FALSE(d.ops[i - 1].kind == EditKind::insert && d.ops[i].kind == EditKind::remove);
            }
        }
    }
}

TEST(WordDiff, LongDocumentsStayFast) {
    std::mt19937_64 rng(4);
    auto a = harvest::testing::random_tokens(rng, 6000, 2000);
    auto b = harvest::testing::random_tokens(rng, 6000, 2000);
    auto d = word_diff(a, b);
    EXPECT_EQ(apply_diff(a, d), b);
}

TEST(WordDiff, ApplyRejectsMismatchedSource) {
    auto d = word_diff(Tokens{"a", "b"}, Tokens{"a", "c"});
    EXPECT_THROW(apply_diff(Tokens{"x", "b"}, d), ArgumentError);
    EXPECT_THROW(apply_diff(Tokens{"a", "b", "z"}, d), ArgumentError);
    EXPECT_EQ(to_string(EditKind::remove), "delete");
}

// -- association ----------------------------------------------------------

TEST(Association, SyndicatedCopyAssociates) {
    const auto wire = harvest::testing::read_file(data_dir() / "syndicated" / "wire.txt");
    auto reviewed = article_from(wire, ReviewStatus::reviewed);
    auto fresh = article_from(wire);
    auto v = propose_auto_association(fresh, reviewed);
    EXPECT_DOUBLE_EQ(v.jaccard, 1.0);
    EXPECT_DOUBLE_EQ(v.change_ratio, 0.0);
    EXPECT_TRUE(v.associate);
}

TEST(Association, AppendedLocalSectionBlocksAssociation) {
    auto reviewed = article_from(harvest::testing::read_file(data_dir() / "syndicated" / "wire.txt"),
                                 ReviewStatus::reviewed);
    auto fresh = article_from(harvest::testing::read_file(data_dir() / "syndicated" / "local.txt"));
    auto v = propose_auto_association(fresh, reviewed);
    const double exact = jaccard_exact(article_signature(fresh), article_signature(reviewed));
    EXPECT_GT(exact, 0.8);
    EXPECT_NEAR(v.jaccard, exact, 0.1);
    EXPECT_GT(v.change_ratio, 0.1);
    EXPECT_EQ(v.associate, v.jaccard >= 0.8 && v.change_ratio <= 0.1);
    EXPECT_FALSE(v.associate);
}

TEST(Association, RequiresReviewedTarget) {
    auto a = article_from("some words here");
    EXPECT_THROW(propose_auto_association(a, a), ArgumentError);
}

TEST(Association, ThresholdsAndMonotonicity) {
    EXPECT_FALSE(should_associate(0.5, 0.0));
    EXPECT_TRUE(should_associate(0.8, 0.1));
    EXPECT_FALSE(should_associate(0.79, 0.0));
    EXPECT_FALSE(should_associate(1.0, 0.11));
    for (double j = 0; j <= 1.0; j += 0.05)
        for (double r = 0; r <= 0.5; r += 0.02)
            if (should_associate(j, r)) {
                EXPECT_TRUE(should_associate(std::min(1.0, j + 0.05), r));
                EXPECT_TRUE(should_associate(j, std::max(0.0, r - 0.02)));
            }
    EXPECT_TRUE(should_associate(0.6, 0.3, {0.5, 0.5}));
}

// -- signature cache ------------------------------------------------------

TEST(SignatureCache, RoundTrip) {
    harvest::testing::TempDir dir;
    std::mt19937_64 rng(8);
    std::vector<std::pair<ArticleId, DocumentSignature>> entries;
    entries.emplace_back(ArticleId{3}, make_signature(harvest::testing::random_tokens(rng, 50, 30)));
    entries.emplace_back(ArticleId{9}, make_signature(harvest::testing::random_tokens(rng, 50, 30), {4, 64, 7}));
    entries.emplace_back(ArticleId{12}, make_signature_from_hashes({}));
    write_signature_cache(dir / "sig.bin", entries);
    auto back = read_signature_cache(dir / "sig.bin");
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back[i].first, entries[i].first);
        EXPECT_EQ(back[i].second.params, entries[i].second.params);
        EXPECT_EQ(back[i].second.minhash, entries[i].second.minhash);
        EXPECT_TRUE(back[i].second.shingle_hashes.empty());
        EXPECT_DOUBLE_EQ(jaccard_estimate(back[i].second, entries[i].second), 1.0);
    }
    EXPECT_TRUE(back[2].second.empty_set());
}

TEST(SignatureCache, RejectsBadHeaderAndTruncation) {
    harvest::testing::TempDir dir;
    harvest::testing::write_file(dir / "bad.bin", "NOPE\x01");
    EXPECT_THROW(read_signature_cache(dir / "bad.bin"), IoError);
    harvest::testing::write_file(dir / "ver.bin", std::string("HSIG\x07", 5));
    EXPECT_THROW(read_signature_cache(dir / "ver.bin"), IoError);
    std::vector<std::pair<ArticleId, DocumentSignature>> one{{ArticleId{1}, make_signature_from_hashes({5})}};
    write_signature_cache(dir / "ok.bin", one);
    auto bytes = harvest::testing::read_file(dir / "ok.bin");
    harvest::testing::write_file(dir / "cut.bin", bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(read_signature_cache(dir / "cut.bin"), IoError);
    EXPECT_THROW(read_signature_cache(dir / "missing.bin"), IoError);
}

}  // namespace
}  // namespace harvest::similarity
