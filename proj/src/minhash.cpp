#include <algorithm>
#include <limits>

#include "harvest/error.hpp"
#include "harvest/hash.hpp"
#include "harvest/similarity.hpp"
#include "harvest/text.hpp"

namespace harvest::similarity {

namespace {

constexpr std::uint64_t kEmptyMin = std::numeric_limits<std::uint64_t>::max();

void require_same_shingling(const DocumentSignature& a, const DocumentSignature& b) {
    if (a.params.width != b.params.width || a.params.seed != b.params.seed)
        throw ComparisonError("signatures use different shingle width or seed");
}

}  // namespace

std::vector<std::uint64_t> shingle(std::span<const std::string> tokens, std::size_t w,
                                   std::uint64_t seed) {
    if (w == 0) throw ArgumentError("shingle width must be at least 1");
    std::vector<std::uint64_t> out;
    if (tokens.empty()) return out;
    std::string window;
    const std::size_t span = std::min(w, tokens.size());
    for (std::size_t i = 0; i + span <= tokens.size(); ++i) {
        window.clear();
        for (std::size_t j = 0; j < span; ++j) {
            if (j) window.push_back(' ');
            window += tokens[i + j];
        }
        out.push_back(hash64(window, seed));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool DocumentSignature::empty_set() const {
    return std::all_of(minhash.begin(), minhash.end(), [](std::uint64_t v) { return v == kEmptyMin; });
}

std::uint64_t minhash_seed(std::uint64_t base_seed, std::size_t i) {
    std::uint64_t state = base_seed ^ (0xa0761d6478bd642fULL * (i + 1));
    return splitmix64(state);
}

DocumentSignature make_signature_from_hashes(std::vector<std::uint64_t> hashes,
                                             const SignatureParams& p) {
    if (p.k == 0) throw ArgumentError("signature length k must be at least 1");
    std::sort(hashes.begin(), hashes.end());
    hashes.erase(std::unique(hashes.begin(), hashes.end()), hashes.end());
    DocumentSignature sig;
    sig.params = p;
    sig.minhash.assign(p.k, kEmptyMin);
    for (std::size_t i = 0; i < p.k; ++i) {
        const std::uint64_t s = minhash_seed(p.seed, i);
        std::uint64_t best = kEmptyMin;
        for (std::uint64_t x : hashes) best = std::min(best, mix64(x ^ s));
        sig.minhash[i] = best;
    }
    sig.shingle_hashes = std::move(hashes);
    return sig;
}

DocumentSignature make_signature(std::span<const std::string> tokens, const SignatureParams& p) {
    return make_signature_from_hashes(shingle(tokens, p.width, p.seed), p);
}

DocumentSignature article_signature(const ArticleRecord& article, const SignatureParams& p) {
    std::vector<std::string> tokens;
    for (const auto& para : article.body) {
        auto words = text::word_tokens(para);
        tokens.insert(tokens.end(), std::make_move_iterator(words.begin()),
                      std::make_move_iterator(words.end()));
    }
    return make_signature(tokens, p);
}

double jaccard_exact(const DocumentSignature& a, const DocumentSignature& b) {
    require_same_shingling(a, b);
    const auto& x = a.shingle_hashes;
    const auto& y = b.shingle_hashes;
    if (x.empty() && y.empty()) return 1.0;
    std::size_t inter = 0, i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i] == y[j]) {
            ++inter;
            ++i;
            ++j;
        } else if (x[i] < y[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return static_cast<double>(inter) / static_cast<double>(x.size() + y.size() - inter);
}

double jaccard_estimate(const DocumentSignature& a, const DocumentSignature& b) {
    require_same_shingling(a, b);
    if (a.params.k != b.params.k || a.minhash.size() != b.minhash.size())
        throw ComparisonError("signatures use different MinHash length k");
    const bool ea = a.empty_set(), eb = b.empty_set();
    if (ea || eb) return ea && eb ? 1.0 : 0.0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.minhash.size(); ++i) same += a.minhash[i] == b.minhash[i];
    return static_cast<double>(same) / static_cast<double>(a.minhash.size());
}

}  // namespace harvest::similarity
