#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace harvest {

template <class Tag>
struct Id {
    std::int64_t value = 0;

    constexpr Id() = default;
    constexpr explicit Id(std::int64_t v) : value(v) {}
    auto operator<=>(const Id&) const = default;
    std::string str() const { return std::to_string(value); }
};

using ArticleId = Id<struct ArticleIdTag>;
using EventId = Id<struct EventIdTag>;
using RunId = Id<struct RunIdTag>;

}  // namespace harvest

template <class Tag>
struct std::hash<harvest::Id<Tag>> {
    std::size_t operator()(const harvest::Id<Tag>& id) const noexcept {
        return std::hash<std::int64_t>{}(id.value);
    }
};
