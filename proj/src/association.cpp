#include <cstring>
#include <fstream>

#include "harvest/error.hpp"
#include "harvest/similarity.hpp"

namespace harvest::similarity {

bool should_associate(double jaccard, double change_ratio, const AssociationPolicy& policy) {
    return jaccard >= policy.jaccard_min && change_ratio <= policy.change_ratio_max;
}

DuplicateVerdict propose_auto_association(const ArticleRecord& fresh, const ArticleRecord& reviewed,
                                          const SignatureParams& params,
                                          const AssociationPolicy& policy) {
    if (reviewed.status != ReviewStatus::reviewed)
        throw ArgumentError("auto-association target " + reviewed.id.str() + " is not reviewed");
    DuplicateVerdict v;
    v.jaccard = jaccard_estimate(article_signature(fresh, params), article_signature(reviewed, params));
    const auto a = body_tokens(reviewed);
    const auto b = body_tokens(fresh);
    v.change_ratio = word_diff(a, b).change_ratio;
    v.associate = should_associate(v.jaccard, v.change_ratio, policy);
    return v;
}

namespace {

constexpr char kMagic[4] = {'H', 'S', 'I', 'G'};

template <class T>
void put(std::ostream& out, T value) {
    unsigned char buf[sizeof(T)];
    auto u = static_cast<std::make_unsigned_t<T>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
bool get(std::istream& in, T& value) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
    value = static_cast<T>(u);
    return true;
}

}  // namespace

void write_signature_cache(const std::filesystem::path& path,
                           std::span<const std::pair<ArticleId, DocumentSignature>> entries) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open signature cache for writing: " + path.string());
    out.write(kMagic, 4);
    put<std::uint8_t>(out, kSignatureCacheVersion);
    for (const auto& [id, sig] : entries) {
        if (sig.minhash.size() != sig.params.k)
            throw ArgumentError("signature for article " + id.str() + " has wrong MinHash length");
        put<std::int64_t>(out, id.value);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(sig.params.width));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(sig.params.k));
        put<std::uint64_t>(out, sig.params.seed);
        for (auto v : sig.minhash) put<std::uint64_t>(out, v);
    }
    if (!out) throw IoError("failed writing signature cache: " + path.string());
}

std::vector<std::pair<ArticleId, DocumentSignature>> read_signature_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open signature cache: " + path.string());
    char magic[4];
    std::uint8_t version = 0;
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("not a signature cache: " + path.string());
    if (!get(in, version) || version != kSignatureCacheVersion)
        throw IoError("unsupported signature cache version " + std::to_string(version));
    std::vector<std::pair<ArticleId, DocumentSignature>> out;
    while (in.peek() != std::char_traits<char>::eof()) {
        std::int64_t id;
        std::uint32_t w, k;
        DocumentSignature sig;
        if (!get(in, id) || !get(in, w) || !get(in, k) || !get(in, sig.params.seed))
            throw IoError("truncated signature cache record");
        sig.params.width = w;
        sig.params.k = k;
        sig.minhash.resize(k);
        for (auto& v : sig.minhash)
            if (!get(in, v)) throw IoError("truncated signature cache record");
        out.emplace_back(ArticleId{id}, std::move(sig));
    }
    return out;
}

}  // namespace harvest::similarity
