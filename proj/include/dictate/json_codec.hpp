#pragma once

#include <json.hpp>

#include "dictate/doc.hpp"

namespace dictate {

// {"content": "...", "selection": [anchor, focus]}
void to_json(nlohmann::json& j, const DocumentState& d);
void from_json(const nlohmann::json& j, DocumentState& d);

// [{"retain":n} | {"delete":n} | {"insert":"..."}]
nlohmann::json edit_script_to_json(const EditScript& script);
EditScript edit_script_from_json(const nlohmann::json& j);

}  // namespace dictate
