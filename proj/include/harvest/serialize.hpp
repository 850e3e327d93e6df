#pragma once

#include "json.hpp"

#include "harvest/event_store.hpp"
#include "harvest/records.hpp"

namespace harvest {

using Json = nlohmann::ordered_json;

Json to_json(const Suggestions& s);
Suggestions suggestions_from_json(const Json& j);

Json to_json(const ProtestEvent& e);
Json to_json(const ArticleEventLink& l);
Json to_json(const DatasetStats& s);
Json to_json(const Taxonomy& t);
Json to_json(const ImportReport& r);

}  // namespace harvest
