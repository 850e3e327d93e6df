#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "harvest/event_store.hpp"

namespace harvest::testing {

inline std::filesystem::path data_dir() { return HARVEST_TEST_DATA_DIR; }

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("harvest-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Seeded categories plus the gun-control position pair and a few details.
inline void add_test_tags(Store& store) {
    store.add_tag({"For greater gun control", TagKind::position, std::nullopt});
    store.add_tag({"Against greater gun control", TagKind::position, "For greater gun control"});
    store.add_tag({"For racial justice", TagKind::position, std::nullopt});
    store.add_tag({"National Walkout Day", TagKind::detail, std::nullopt});
    store.add_tag({"Police", TagKind::detail, std::nullopt});
}

inline ArticleId add_reviewed_article(Store& store, const std::string& url) {
    ArticleRecord a;
    a.url = url;
    a.source_id = "test";
    a.title = "Title for " + url;
    a.body = {"Body paragraph for " + url};
    a.status = ReviewStatus::reviewed;
    return store.add_article(a);
}

inline ProtestEvent gun_event(Date date, std::string locality, std::string region) {
    ProtestEvent e;
    e.date = date;
    e.location.locality = std::move(locality);
    e.location.region = std::move(region);
    e.tags = {"Guns", "For greater gun control"};
    return e;
}

}  // namespace harvest::testing
