#include "datavideo/designer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

#include "contract_util.hpp"
#include "datavideo/analyst.hpp"
#include "datavideo/ingest.hpp"

namespace datavideo {

using detail::optional_string;
using detail::require_array;
using detail::require_key;
using detail::require_string;
using detail::schema_error;

namespace {

constexpr const char* animation_key = "Annotated_Narration_for_Animation";
constexpr const char* annotation_key = "Annotated_Narration_for_Annotation";

std::string item_path(const char* list, std::size_t i) { return std::string("/") + list + "/" + std::to_string(i); }

std::vector<std::size_t> parse_indices(const Json& item, const std::string& where, const DataTable& table,
                                       bool required) {
    std::vector<std::size_t> out;
    if (!item.contains("index")) {
        if (required) schema_error("index", "missing key in " + where);
        return out;
    }
    const Json& index = item["index"];
    if (index.is_null()) return out;
    if (!index.is_array()) schema_error(where + ".index", "value must be a list of row indices");
    for (const auto& v : index) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
            throw Error(Errc::index_out_of_range, where + ": row " + std::to_string(v.get<long long>()));
        }
        if (!v.is_number_unsigned() && !v.is_number_integer()) {
            schema_error(where + ".index", "entries must be integer row indices");
        }
        const auto row = v.get<std::size_t>();
        if (row >= table.row_count()) {
            throw Error(Errc::index_out_of_range, where + ": row " + std::to_string(row) + " of a table with " +
                                                      std::to_string(table.row_count()) + " rows");
        }
        out.push_back(row);
    }
    return out;
}

}  // namespace

PromptText build_designer_prompt(const VisualizationSpec& vis, std::string_view narration, const DataTable& table,
                                 std::optional<std::size_t> max_prompt_rows) {
    if (trim(narration).empty()) throw Error(Errc::precondition, "the narration is empty");
    return render_prompt(TemplateId::designer, {{"visualization", vis.spec.dump()},
                                                {"narration", std::string(narration)},
                                                {"table", render_table_text(table, max_prompt_rows)}});
}

DesignerOutput parse_designer_response(std::string_view raw, const DataTable& table) {
    const Json reply = extract_json(raw);
    if (!reply.is_object()) schema_error("Annotated_Visualization", "reply must be a JSON object");

    DesignerOutput out;
    const Json& spec = require_key(reply, "Annotated_Visualization");
    if (!spec.is_object()) schema_error("Annotated_Visualization", "value must be a Vega-Lite JSON object");
    out.annotated_visualization = spec;

    const Json& animations = require_array(reply, animation_key);
    for (std::size_t i = 0; i < animations.size(); ++i) {
        const std::string where = std::string(animation_key) + "[" + std::to_string(i) + "]";
        const Json& item = animations[i];
        if (!item.is_object()) schema_error(where, "items must be JSON objects");
        AnimationDirective d;
        d.animation = parse_animation_type(require_string(item, "animation", where));
        d.narration = require_string(item, "narration", where);
        if (trim(d.narration).empty()) schema_error(where + ".narration", "must not be empty");
        d.target = require_string(item, "target", where);
        d.index = parse_indices(item, where, table, true);
        d.explanation = optional_string(item, "explanation");
        out.animation_directives.push_back(std::move(d));
    }

    const Json& annotations = require_array(reply, annotation_key);
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        const std::string where = std::string(annotation_key) + "[" + std::to_string(i) + "]";
        const Json& item = annotations[i];
        if (!item.is_object()) schema_error(where, "items must be JSON objects");
        const Json& types = require_array(item, "type", where);
        if (types.empty()) continue;
        AnnotationDirective a;
        for (const auto& t : types) {
            if (!t.is_string()) schema_error(where + ".type", "entries must be strings");
            a.types.push_back(parse_annotation_type(t.get<std::string>()));
        }
        a.description = optional_string(item, "description");
        a.index = parse_indices(item, where, table, false);
        a.nar = require_string(item, "nar", where);
        if (trim(a.nar).empty()) schema_error(where + ".nar", "must not be empty");
        out.annotation_directives.push_back(std::move(a));
    }
    return out;
}

Json designer_output_to_json(const DesignerOutput& out) {
    Json animations = Json::array();
    for (const auto& d : out.animation_directives) {
        animations.push_back(Json{{"animation", to_string(d.animation)},
                                  {"narration", d.narration},
                                  {"target", d.target},
                                  {"index", d.index},
                                  {"explanation", d.explanation}});
    }
    Json annotations = Json::array();
    for (const auto& a : out.annotation_directives) {
        Json types = Json::array();
        for (auto t : a.types) types.push_back(to_string(t));
        annotations.push_back(
            Json{{"type", std::move(types)}, {"description", a.description}, {"index", a.index}, {"nar", a.nar}});
    }
    Json j = Json::object();
    j["Annotated_Visualization"] = out.annotated_visualization;
    j[animation_key] = std::move(animations);
    j[annotation_key] = std::move(annotations);
    return j;
}

std::set<std::string> textual_targets(const AnimationDirective& directive) {
    std::set<std::string> out;
    std::string text;
    for (char c : trim(directive.target)) {
        text += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (!text.empty()) out.insert("target:" + text);
    for (auto r : directive.index) out.insert("row:" + std::to_string(r));
    if (out.empty()) throw Error(Errc::unresolved_target, "directive on '" + directive.narration + "' has no target");
    return out;
}

std::vector<std::optional<Span>> locate_segments(const std::vector<std::string>& segments,
                                                 std::string_view narration) {
    std::vector<std::optional<Span>> out;
    std::size_t cursor = 0;
    for (const auto& segment : segments) {
        std::optional<Span> span;
        for (std::size_t from : {cursor, std::size_t{0}}) {
            try {
                span = locate_span(narration, segment, from);
                break;
            } catch (const Error& e) {
                if (e.code() != Errc::segment_not_found) throw;
            }
        }
        if (span) cursor = span->start_char;
        out.push_back(span);
    }
    return out;
}

ValidationReport validate_animation_sequence(const std::vector<AnimationDirective>& directives,
                                             std::string_view narration, const TargetResolver& resolve) {
    ValidationReport report;
    std::vector<std::string> segments;
    for (const auto& d : directives) segments.push_back(d.narration);
    const auto spans = locate_segments(segments, narration);
    const Span opening = first_sentence(narration);

    struct Event {
        std::size_t directive;
        std::size_t start;
        AnimationCategory category;
        std::set<std::string> targets;
    };
    std::vector<Event> events;
    for (std::size_t i = 0; i < directives.size(); ++i) {
        const auto& d = directives[i];
        const std::string path = item_path(animation_key, i);
        if (!spans[i]) {
            report.fail("segment-not-found", path + "/narration",
                        "'" + d.narration + "' is not a verbatim part of the narration; narration text cannot be modified");
            continue;
        }
        if (d.animation == AnimationType::axes_fade_in && spans[i]->end_char > opening.end_char) {
            report.fail("axes-fade-in-position", path,
                        "Axes-fade-in can only be used in the first sentence of the narration");
        }
        try {
            events.push_back(Event{i, spans[i]->start_char, category_of(d.animation), resolve(d)});
        } catch (const Error& e) {
            if (e.code() != Errc::unresolved_target) throw;
            report.fail("unresolved-target", path + "/target", e.detail());
        }
    }

    // Per element: position of its first entrance, and every entrance/exit.
    std::map<std::string, std::size_t> first_entrance;
    std::map<std::string, std::vector<std::pair<std::size_t, AnimationCategory>>> lifecycle;
    for (const auto& ev : events) {
        if (ev.category == AnimationCategory::emphasis) continue;
        for (const auto& id : ev.targets) {
            lifecycle[id].emplace_back(ev.start, ev.category);
            if (ev.category == AnimationCategory::entrance) {
                auto [it, inserted] = first_entrance.try_emplace(id, ev.start);
                if (!inserted) it->second = std::min(it->second, ev.start);
            }
        }
    }

    for (const auto& ev : events) {
        if (ev.category == AnimationCategory::entrance) continue;
        const auto& d = directives[ev.directive];
        const std::string path = item_path(animation_key, ev.directive);
        std::set<std::string> early;
        std::set<std::string> gone;
        for (const auto& id : ev.targets) {
            if (auto it = first_entrance.find(id); it != first_entrance.end() && it->second > ev.start) {
                early.insert(id);
            }
            if (ev.category != AnimationCategory::emphasis) continue;
            std::optional<std::pair<std::size_t, AnimationCategory>> latest;
            for (const auto& step : lifecycle[id]) {
                if (step.first >= ev.start) continue;
                // an exit at the same position as an entrance counts as the later step
                if (!latest || step.first > latest->first ||
                    (step.first == latest->first && step.second == AnimationCategory::exit)) {
                    latest = step;
                }
            }
            if (latest && latest->second == AnimationCategory::exit) gone.insert(id);
        }
        auto join = [](const std::set<std::string>& ids) {
            std::string s;
            for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
            return s;
        };
        if (!early.empty()) {
            report.fail("before-entrance", path,
                        std::string(to_string(d.animation)) + " on '" + d.target +
                            "' comes before the entrance of its elements (" + join(early) +
                            "); elements can only be emphasized or disappear after they appear");
        }
        if (!gone.empty()) {
            report.fail("after-exit", path,
                        std::string(to_string(d.animation)) + " on '" + d.target +
                            "' comes after the exit of its elements (" + join(gone) +
                            "); elements cannot be emphasized after they disappear");
        }
    }
    return report;
}

std::vector<AnimationDirective> collapse_duplicates(const std::vector<AnimationDirective>& directives,
                                                    ValidationReport& report) {
    std::vector<AnimationDirective> out;
    std::set<std::tuple<AnimationType, std::string, std::string>> seen;
    for (std::size_t i = 0; i < directives.size(); ++i) {
        const auto& d = directives[i];
        auto key = std::make_tuple(d.animation, std::string(trim(d.narration)), std::string(trim(d.target)));
        if (!seen.insert(std::move(key)).second) {
            report.advise("duplicate-directive", item_path(animation_key, i),
                          std::string(to_string(d.animation)) + " on '" + d.narration + "' repeats an earlier directive");
            continue;
        }
        out.push_back(d);
    }
    return out;
}

Checked<DesignerOutput> check_designer_reply(std::string_view raw, const VisualizationSpec& base,
                                             std::string_view narration, const DataTable& table,
                                             const TargetResolver& resolve) {
    DesignerOutput parsed = parse_designer_response(raw, table);
    ValidationReport report;
    parsed.animation_directives = collapse_duplicates(parsed.animation_directives, report);
    report.merge(validate_animation_sequence(parsed.animation_directives, narration, resolve));

    std::vector<std::string> nars;
    for (const auto& a : parsed.annotation_directives) nars.push_back(a.nar);
    const auto spans = locate_segments(nars, narration);
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (!spans[i]) {
            report.fail("segment-not-found", item_path(annotation_key, i) + "/nar",
                        "'" + parsed.annotation_directives[i].nar + "' is not a verbatim part of the narration");
        }
    }

    const ValidationReport spec_report =
        validate_visualization(VisualizationSpec{parsed.annotated_visualization, base.vis_type});
    for (auto v : spec_report.violations) {
        v.path = "/Annotated_Visualization" + v.path;
        report.violations.push_back(std::move(v));
    }
    for (auto v : spec_report.advisories) {
        v.path = "/Annotated_Visualization" + v.path;
        report.advisories.push_back(std::move(v));
    }

    Checked<DesignerOutput> out;
    out.report = std::move(report);
    if (out.report.passing()) out.value = std::move(parsed);
    return out;
}

DesignerResult run_designer(ChatSession& session, const VisualizationSpec& vis, std::string_view narration,
                            const DataTable& table, const AgentConfig& config, const TargetResolver& resolve) {
    if (table.row_count() == 0) throw Error(Errc::precondition, "the data table has no rows");
    const PromptText prompt = build_designer_prompt(vis, narration, table, config.max_prompt_rows);
    auto outcome = repair_loop<DesignerOutput>(
        session, prompt,
        [&](const std::string& raw) { return check_designer_reply(raw, vis, narration, table, resolve); },
        config.max_attempts);
    return DesignerResult{std::move(outcome.value), std::move(outcome.report), std::move(outcome.repair)};
}

}  // namespace datavideo
