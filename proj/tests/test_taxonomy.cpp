#include <gtest/gtest.h>

#include "harvest/error.hpp"
#include "harvest/taxonomy.hpp"

namespace harvest {
namespace {

TEST(Taxonomy, SeededWithTwelveCategories) {
    auto t = Taxonomy::seeded();
    EXPECT_EQ(t.names_of(TagKind::category).size(), 12u);
    EXPECT_TRUE(t.contains("Civil Rights"));
    EXPECT_TRUE(t.contains("Collective Bargaining"));
    EXPECT_TRUE(t.names_of(TagKind::position).empty());
}

TEST(Taxonomy, RejectsDuplicateAndEmptyNames) {
    auto t = Taxonomy::seeded();
    EXPECT_THROW(t.add({"Guns", TagKind::category, std::nullopt}), ValidationError);
    EXPECT_THROW(t.add({"", TagKind::detail, std::nullopt}), ValidationError);
    EXPECT_THROW(t.add({"  ", TagKind::detail, std::nullopt}), ValidationError);
}

TEST(Taxonomy, OppositionIsSymmetric) {
    auto t = Taxonomy::seeded();
    t.add({"For greater gun control", TagKind::position, std::nullopt});
    t.add({"Against greater gun control", TagKind::position, "For greater gun control"});
    EXPECT_EQ(t.opposite_of("For greater gun control"), "Against greater gun control");
    EXPECT_EQ(t.opposite_of("Against greater gun control"), "For greater gun control");
}

TEST(Taxonomy, OnlyPositionsMayOppose) {
    auto t = Taxonomy::seeded();
    t.add({"Police", TagKind::detail, std::nullopt});
    EXPECT_THROW(t.add({"For police", TagKind::position, "Police"}), ValidationError);
    EXPECT_FALSE(t.contains("For police"));
}

TEST(Taxonomy, EventTagRules) {
    auto t = Taxonomy::seeded();
    t.add({"For greater gun control", TagKind::position, std::nullopt});
    t.add({"Against greater gun control", TagKind::position, "For greater gun control"});
    t.add({"Police", TagKind::detail, std::nullopt});
    EXPECT_NO_THROW(t.validate_event_tags({"Guns", "For greater gun control"}));
    EXPECT_THROW(t.validate_event_tags({"Police"}), ValidationError);
    EXPECT_THROW(t.validate_event_tags({"Guns"}), ValidationError);
    EXPECT_THROW(t.validate_event_tags({"For greater gun control"}), ValidationError);
    EXPECT_THROW(t.validate_event_tags({"Guns", "Unknown"}), ValidationError);
    EXPECT_THROW(t.validate_event_tags(
                     {"Guns", "For greater gun control", "Against greater gun control"}),
                 ValidationError);
}

TEST(Taxonomy, ParsesTsvWithOpposites) {
    auto t = Taxonomy::parse_tsv(
        "# kind\tname\topposite\n"
        "position\tFor stricter immigration\tAgainst stricter immigration\n"
        "position\tAgainst stricter immigration\n"
        "detail\tFamilies Belong\n");
    EXPECT_EQ(t.opposite_of("Against stricter immigration"), "For stricter immigration");
    EXPECT_EQ(t.find("Families Belong")->kind, TagKind::detail);
    EXPECT_THROW(Taxonomy::parse_tsv("bogus\tX\n"), ConfigError);
}

TEST(Taxonomy, InfersKindsForImportedNames) {
    EXPECT_EQ(infer_tag_kind("Guns"), TagKind::category);
    EXPECT_EQ(infer_tag_kind("For racial justice"), TagKind::position);
    EXPECT_EQ(infer_tag_kind("Against white supremacy"), TagKind::position);
    EXPECT_EQ(infer_tag_kind("Women's March"), TagKind::detail);
    EXPECT_EQ(mirrored_position("For greater gun control"), "Against greater gun control");
    EXPECT_FALSE(mirrored_position("Police"));
}

}  // namespace
}  // namespace harvest
