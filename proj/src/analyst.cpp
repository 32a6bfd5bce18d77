#include "datavideo/analyst.hpp"

#include <set>
#include <sstream>

#include "contract_util.hpp"
#include "datavideo/ingest.hpp"
#include "datavideo/vega.hpp"

namespace datavideo {

using detail::require_array;
using detail::require_key;
using detail::require_string;
using detail::schema_error;

PromptText build_analyst_prompt(const DataDescription& description, const DataTable& table,
                                std::optional<std::size_t> max_prompt_rows) {
    return render_prompt(TemplateId::analyst,
                         {{"description", description.text}, {"table", render_table_text(table, max_prompt_rows)}});
}

AnalystOutput parse_analyst_response(std::string_view raw, const DataTable& /*table*/) {
    const Json reply = extract_json(raw);
    if (!reply.is_object()) schema_error("Insights", "reply must be a JSON object");

    AnalystOutput out;
    const Json& insights = require_array(reply, "Insights");
    if (insights.empty()) schema_error("Insights", "list must not be empty");
    for (std::size_t i = 0; i < insights.size(); ++i) {
        const std::string where = "Insights[" + std::to_string(i) + "]";
        Insight insight;
        insight.insight = require_string(insights[i], "insight", where);
        if (trim(insight.insight).empty()) schema_error(where + ".insight", "must not be empty");
        const Json& types = require_array(insights[i], "type", where);
        if (types.empty()) schema_error(where + ".type", "at least one insight type is required");
        for (const auto& t : types) {
            if (!t.is_string()) schema_error(where + ".type", "entries must be strings");
            insight.types.push_back(parse_insight_type(t.get<std::string>()));
        }
        out.insights.push_back(std::move(insight));
    }

    const Json& vis = require_key(reply, "Visualization");
    if (!vis.is_object()) schema_error("Visualization", "value must be a Vega-Lite JSON object");
    out.visualization.spec = vis;
    out.visualization.vis_type = parse_visualization_type(require_string(reply, "Visualization_Type"));

    out.narration = require_string(reply, "Narration");
    if (trim(out.narration).empty()) schema_error("Narration", "must not be empty");
    return out;
}

namespace {

constexpr const char* composition_keys[] = {"hconcat", "vconcat", "concat", "facet", "repeat"};

void check_single_view(const Json& view, const std::string& path, ValidationReport& report) {
    if (!view.is_object()) return;
    for (const char* key : composition_keys) {
        if (view.contains(key)) {
            report.fail("multi-view", path + "/" + key, "use a single chart; \"" + std::string(key) + "\" composes several");
        }
    }
    if (view.contains("layer") && view["layer"].is_array()) {
        for (std::size_t i = 0; i < view["layer"].size(); ++i) {
            check_single_view(view["layer"][i], path + "/layer/" + std::to_string(i), report);
        }
    }
}

std::size_t word_count(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::size_t n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
}

bool is_point_mark(const std::string& m) { return m == "point" || m == "circle" || m == "square"; }

bool mark_matches(VisualizationType t, const std::string& m) {
    switch (t) {
        case VisualizationType::bar: return m == "bar" || m == "rect";
        case VisualizationType::line: return m == "line";
        case VisualizationType::scatter: return is_point_mark(m);
        case VisualizationType::pie: return m == "arc";
    }
    return false;
}

}  // namespace

ValidationReport validate_visualization(const VisualizationSpec& vis) {
    ValidationReport report = check_spec_structure(vis.spec);
    if (!vis.spec.is_object()) return report;
    check_single_view(vis.spec, "", report);

    bool has_points = false;
    bool has_text = false;
    bool type_seen = false;
    vega::for_each_unit_view(vis.spec, [&](const Json& view, const std::string& path) {
        const std::string mark = vega::mark_type(view);
        if (is_point_mark(mark)) has_points = true;
        if (mark == "line" && view["mark"].is_object() && view["mark"].contains("point")) {
            const Json& p = view["mark"]["point"];
            if ((p.is_boolean() && p.get<bool>()) || p.is_object()) has_points = true;
        }
        if (mark == "text") has_text = true;
        if (mark_matches(vis.vis_type, mark)) type_seen = true;
        if (view.contains("encoding")) {
            for (const auto& field : vega::encoding_fields(view["encoding"])) {
                if (field == "index") {
                    report.fail("index-encoded", path + "/encoding",
                                "the \"index\" column must not be visualized");
                }
            }
        }
    });

    if (vis.vis_type == VisualizationType::line && !has_points) {
        report.advise("line-without-points", "/mark", "a line chart should include data points");
    }
    if (vis.vis_type == VisualizationType::pie && !has_text) {
        report.advise("pie-without-text", "/layer", "pie sectors should carry text annotations of their percentage");
    }
    if (const auto title = vega::title_text(vis.spec); word_count(title) >= 10) {
        report.advise("long-title", "/title", "title should be less than 10 words");
    }
    if (!type_seen) {
        report.advise("vis-type-mismatch", "/mark",
                      "no mark matches the declared type \"" + std::string(to_string(vis.vis_type)) + "\"");
    }
    return report;
}

Json analyst_output_to_json(const AnalystOutput& out) {
    Json insights = Json::array();
    for (const auto& i : out.insights) {
        Json types = Json::array();
        for (auto t : i.types) types.push_back(to_string(t));
        insights.push_back(Json{{"insight", i.insight}, {"type", std::move(types)}});
    }
    Json j = Json::object();
    j["Insights"] = std::move(insights);
    j["Visualization"] = out.visualization.spec;
    j["Visualization_Type"] = to_string(out.visualization.vis_type);
    j["Narration"] = out.narration;
    return j;
}

Checked<AnalystOutput> check_analyst_reply(std::string_view raw, const DataTable& table) {
    AnalystOutput parsed = parse_analyst_response(raw, table);
    ValidationReport report = validate_visualization(parsed.visualization);
    if (parsed.insights.size() > 10) {
        report.advise("insight-count", "/Insights",
                      std::to_string(parsed.insights.size()) + " insights; expected between 1 and 10");
    }
    std::set<std::string> derived;
    if (parsed.visualization.spec.contains("transform") && parsed.visualization.spec["transform"].is_array()) {
        // fields introduced by transforms ("as", fold keys) are not table columns
        for (const auto& t : parsed.visualization.spec["transform"]) {
            if (!t.is_object()) continue;
            if (t.contains("as")) {
                const Json& as = t["as"];
                if (as.is_string()) derived.insert(as.get<std::string>());
                if (as.is_array()) {
                    for (const auto& a : as) {
                        if (a.is_string()) derived.insert(a.get<std::string>());
                    }
                }
            }
            if (t.contains("fold")) derived.insert({"key", "value"});
        }
    }
    vega::for_each_unit_view(parsed.visualization.spec, [&](const Json& view, const std::string& path) {
        if (!view.contains("encoding")) return;
        for (const auto& field : vega::encoding_fields(view["encoding"])) {
            if (field != "index" && !table.column_index(field) && !derived.contains(field)) {
                report.advise("unknown-field", path + "/encoding", "field \"" + field + "\" is not a table column");
            }
        }
    });

    Checked<AnalystOutput> out;
    out.report = std::move(report);
    if (out.report.passing()) out.value = std::move(parsed);
    return out;
}

AnalystResult run_analyst(ChatSession& session, const DataDescription& description, const DataTable& table,
                          const AgentConfig& config) {
    if (table.row_count() == 0) throw Error(Errc::precondition, "the data table has no rows");
    if (trim(description.text).empty()) throw Error(Errc::precondition, "the data description is empty");
    const PromptText prompt = build_analyst_prompt(description, table, config.max_prompt_rows);
    auto outcome = repair_loop<AnalystOutput>(
        session, prompt, [&](const std::string& raw) { return check_analyst_reply(raw, table); },
        config.max_attempts);
    return AnalystResult{std::move(outcome.value), std::move(outcome.report), std::move(outcome.repair)};
}

}  // namespace datavideo
