#include "dictate/json_codec.hpp"

#include "dictate/errors.hpp"
#include "dictate/text.hpp"

namespace dictate {

void to_json(nlohmann::json& j, const DocumentState& d) {
  j = nlohmann::json{{"content", d.content_utf8()}, {"selection", {d.selection.anchor, d.selection.focus}}};
}

void from_json(const nlohmann::json& j, DocumentState& d) {
  if (!j.is_object()) throw SchemaError("state", "expected object");
  if (!j.contains("content") || !j["content"].is_string()) throw SchemaError("state.content", "expected string");
  d.content = text::from_utf8(j["content"].get<std::string>());
  if (j.contains("selection")) {
    const auto& sel = j["selection"];
    if (!sel.is_array() || sel.size() != 2 || !sel[0].is_number_unsigned() || !sel[1].is_number_unsigned()) {
      throw SchemaError("state.selection", "expected [anchor, focus] of non-negative integers");
    }
    d.selection = {sel[0].get<std::size_t>(), sel[1].get<std::size_t>()};
  } else {
    d.selection = {d.content.size(), d.content.size()};
  }
  d.validate();
}

nlohmann::json edit_script_to_json(const EditScript& script) {
  auto out = nlohmann::json::array();
  for (const auto& op : script) {
    if (auto* r = std::get_if<Retain>(&op)) {
      out.push_back({{"retain", r->count}});
    } else if (auto* d = std::get_if<Delete>(&op)) {
      out.push_back({{"delete", d->count}});
    } else {
      out.push_back({{"insert", text::to_utf8(std::get<Insert>(op).text)}});
    }
  }
  return out;
}

EditScript edit_script_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw SchemaError("script", "expected array");
  EditScript out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& op = j[i];
    auto path = "script[" + std::to_string(i) + "]";
    if (!op.is_object() || op.size() != 1) throw SchemaError(path, "expected single-key object");
    if (op.contains("retain")) {
      out.emplace_back(Retain{op["retain"].get<std::size_t>()});
    } else if (op.contains("delete")) {
      out.emplace_back(Delete{op["delete"].get<std::size_t>()});
    } else if (op.contains("insert") && op["insert"].is_string()) {
      out.emplace_back(Insert{text::from_utf8(op["insert"].get<std::string>())});
    } else {
      throw SchemaError(path, "unknown edit op");
    }
  }
  return out;
}

}  // namespace dictate
