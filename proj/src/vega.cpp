#include "datavideo/vega.hpp"

namespace datavideo::vega {

std::string mark_type(const Json& view) {
    if (!view.is_object() || !view.contains("mark")) return {};
    const Json& mark = view["mark"];
    if (mark.is_string()) return mark.get<std::string>();
    if (mark.is_object() && mark.contains("type") && mark["type"].is_string()) return mark["type"].get<std::string>();
    return {};
}

namespace {

void visit_views(const Json& view, const std::string& path,
                 const std::function<void(const Json&, const std::string&)>& visit) {
    if (!view.is_object()) return;
    if (view.contains("mark")) visit(view, path);
    if (view.contains("layer") && view["layer"].is_array()) {
        const Json& layer = view["layer"];
        for (std::size_t i = 0; i < layer.size(); ++i) {
            visit_views(layer[i], path + "/layer/" + std::to_string(i), visit);
        }
    }
}

void collect_field(const Json& def, std::vector<std::string>& out) {
    if (def.is_object() && def.contains("field") && def["field"].is_string()) {
        out.push_back(def["field"].get<std::string>());
    }
}

}  // namespace

void for_each_unit_view(const Json& spec, const std::function<void(const Json&, const std::string&)>& visit) {
    visit_views(spec, "", visit);
}

std::vector<std::string> encoding_fields(const Json& encoding) {
    std::vector<std::string> out;
    if (!encoding.is_object()) return out;
    for (const auto& [channel, def] : encoding.items()) {
        if (def.is_array()) {
            for (const auto& item : def) collect_field(item, out);
        } else {
            collect_field(def, out);
        }
    }
    return out;
}

Json bind_table_data(const Json& spec, const DataTable& table) {
    Json out = spec;
    if (!out.is_object()) return out;
    out["data"] = Json{{"values", table.rows_as_json()}};
    return out;
}

std::string title_text(const Json& spec) {
    if (!spec.is_object() || !spec.contains("title")) return {};
    const Json* title = &spec["title"];
    if (title->is_object()) {
        if (!title->contains("text")) return {};
        title = &(*title)["text"];
    }
    if (title->is_string()) return title->get<std::string>();
    if (title->is_array()) {
        std::string joined;
        for (const auto& line : *title) {
            if (!line.is_string()) continue;
            if (!joined.empty()) joined += ' ';
            joined += line.get<std::string>();
        }
        return joined;
    }
    return {};
}

}  // namespace datavideo::vega
