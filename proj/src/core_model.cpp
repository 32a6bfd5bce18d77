#include "datavideo/core_model.hpp"

#include <charconv>
#include <set>
#include <system_error>

#include "datavideo/error.hpp"

namespace datavideo {

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::string format_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

std::string cell_text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    return {};
}

DataTable::DataTable(std::string title, std::vector<Column> columns)
    : title_(std::move(title)), columns_(std::move(columns)) {
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        const auto& col = columns_[i];
        if (col.name.empty()) {
            throw Error(Errc::invalid_table, "column " + std::to_string(i) + " has an empty name");
        }
        if (!seen.insert(col.name).second) {
            throw Error(Errc::invalid_table, "duplicate column name '" + col.name + "'");
        }
        if (i == 0) {
            row_count_ = col.values.size();
        } else if (col.values.size() != row_count_) {
            throw Error(Errc::invalid_table, "column '" + col.name + "' has " +
                                                 std::to_string(col.values.size()) + " values, expected " +
                                                 std::to_string(row_count_));
        }
    }
}

std::optional<std::size_t> DataTable::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].name == name) return i;
    }
    return std::nullopt;
}

Json DataTable::rows_as_json() const {
    Json rows = Json::array();
    for (std::size_t r = 0; r < row_count_; ++r) {
        Json row = Json::object();
        for (const auto& col : columns_) {
            const Cell& c = col.values[r];
            if (const auto* d = std::get_if<double>(&c)) {
                row[col.name] = *d;
            } else if (const auto* s = std::get_if<std::string>(&c)) {
                row[col.name] = *s;
            } else {
                row[col.name] = nullptr;
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------

namespace {

template <typename Enum, std::size_t N>
struct Vocabulary {
    std::array<std::pair<Enum, std::string_view>, N> entries;

    std::string_view name(Enum e) const {
        for (const auto& [value, text] : entries) {
            if (value == e) return text;
        }
        return {};
    }

    std::optional<Enum> find(std::string_view text) const {
        const auto key = trim(text);
        for (const auto& [value, name] : entries) {
            if (name == key) return value;
        }
        return std::nullopt;
    }
};

constexpr Vocabulary<InsightType, 13> insight_vocab{{{
    {InsightType::change_over_time, "Change Over Time"},
    {InsightType::characterize_distribution, "Characterize Distribution"},
    {InsightType::cluster, "Cluster"},
    {InsightType::comparison, "Comparison"},
    {InsightType::correlate, "Correlate"},
    {InsightType::determine_range, "Determine Range"},
    {InsightType::deviation, "Deviation"},
    {InsightType::find_anomalies, "Find Anomalies"},
    {InsightType::find_extremum, "Find Extremum"},
    {InsightType::magnitude, "Magnitude"},
    {InsightType::part_to_whole, "Part to Whole"},
    {InsightType::sort, "Sort"},
    {InsightType::trend, "Trend"},
}}};

constexpr Vocabulary<VisualizationType, 4> vis_vocab{{{
    {VisualizationType::bar, "bar"},
    {VisualizationType::scatter, "scatter"},
    {VisualizationType::pie, "pie"},
    {VisualizationType::line, "line"},
}}};

constexpr Vocabulary<AnimationType, 17> animation_vocab{{{
    {AnimationType::axes_fade_in, "Axes-fade-in"},
    {AnimationType::bar_grow_in, "Bar-grow-in"},
    {AnimationType::line_wipe_in, "Line-wipe-in"},
    {AnimationType::pie_wheel_in, "Pie-wheel-in"},
    {AnimationType::pie_wheel_in_and_legend_fly_in, "Pie-wheel-in-and-legend-fly-in"},
    {AnimationType::scatter_fade_in, "Scatter-fade-in"},
    {AnimationType::bar_grow_and_legend_fade_in, "Bar-grow-and-legend-fade-in"},
    {AnimationType::line_wipe_and_legend_fade_in, "Line-wipe-and-legend-fade-in"},
    {AnimationType::fade_in, "Fade-in"},
    {AnimationType::float_in, "Float-in"},
    {AnimationType::fly_in, "Fly-in"},
    {AnimationType::zoom_in, "Zoom-in"},
    {AnimationType::bar_bounce, "Bar-bounce"},
    {AnimationType::zoom_in_then_zoom_out, "Zoom-in-then-zoom-out"},
    {AnimationType::shine_in_a_short_duration, "Shine-in-a-short-duration"},
    {AnimationType::highlight_one_and_fade_others, "Highlight-one-and-fade-others"},
    {AnimationType::fade_out, "Fade-out"},
}}};

constexpr Vocabulary<AnnotationType, 6> annotation_vocab{{{
    {AnnotationType::mark_label, "mark label"},
    {AnnotationType::circle, "circle"},
    {AnnotationType::text, "text"},
    {AnnotationType::rule, "rule"},
    {AnnotationType::trend_line, "trend line"},
    {AnnotationType::arrow, "arrow"},
}}};

template <typename Enum, std::size_t N>
std::array<Enum, N> values_of(const Vocabulary<Enum, N>& v) {
    std::array<Enum, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = v.entries[i].first;
    return out;
}

}  // namespace

const std::array<InsightType, insight_type_count>& all_insight_types() {
    static const auto values = values_of(insight_vocab);
    return values;
}

std::string_view to_string(InsightType t) { return insight_vocab.name(t); }

InsightType parse_insight_type(std::string_view name) {
    if (auto v = insight_vocab.find(name)) return *v;
    throw Error(Errc::unknown_insight_type, "'" + std::string(name) + "'");
}

std::string_view to_string(VisualizationType t) { return vis_vocab.name(t); }

VisualizationType parse_visualization_type(std::string_view name) {
    if (auto v = vis_vocab.find(name)) return *v;
    throw Error(Errc::unknown_visualization_type, "'" + std::string(name) + "'");
}

std::string_view to_string(AnimationCategory c) {
    switch (c) {
        case AnimationCategory::entrance: return "entrance";
        case AnimationCategory::emphasis: return "emphasis";
        case AnimationCategory::exit: return "exit";
    }
    return {};
}

const std::array<AnimationType, animation_type_count>& all_animation_types() {
    static const auto values = values_of(animation_vocab);
    return values;
}

std::string_view to_string(AnimationType t) { return animation_vocab.name(t); }

AnimationType parse_animation_type(std::string_view name) {
    if (auto v = animation_vocab.find(name)) return *v;
    throw Error(Errc::unknown_animation, "'" + std::string(name) + "'");
}

AnimationCategory category_of(AnimationType t) {
    switch (t) {
        case AnimationType::bar_bounce:
        case AnimationType::zoom_in_then_zoom_out:
        case AnimationType::shine_in_a_short_duration:
        case AnimationType::highlight_one_and_fade_others:
            return AnimationCategory::emphasis;
        case AnimationType::fade_out:
            return AnimationCategory::exit;
        default:
            return AnimationCategory::entrance;
    }
}

AnimationCategory classify_animation(std::string_view name) {
    return category_of(parse_animation_type(name));
}

std::string_view to_string(AnnotationType t) { return annotation_vocab.name(t); }

AnnotationType parse_annotation_type(std::string_view name) {
    if (auto v = annotation_vocab.find(name)) return *v;
    throw Error(Errc::unknown_annotation_type, "'" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

void ValidationReport::merge(const ValidationReport& other) {
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
    advisories.insert(advisories.end(), other.advisories.begin(), other.advisories.end());
}

Json to_json(const Violation& v) {
    return Json{{"code", v.code}, {"path", v.path}, {"message", v.message}};
}

Json to_json(const ValidationReport& r) {
    Json out = Json::object();
    out["passing"] = r.passing();
    out["violations"] = Json::array();
    for (const auto& v : r.violations) out["violations"].push_back(to_json(v));
    out["advisories"] = Json::array();
    for (const auto& v : r.advisories) out["advisories"].push_back(to_json(v));
    return out;
}

ValidationReport report_from_json(const Json& j) {
    ValidationReport r;
    auto read = [](const Json& list, std::vector<Violation>& into) {
        for (const auto& item : list) {
            into.push_back({item.value("code", ""), item.value("path", ""), item.value("message", "")});
        }
    };
    if (j.contains("violations")) read(j["violations"], r.violations);
    if (j.contains("advisories")) read(j["advisories"], r.advisories);
    return r;
}

namespace {

void check_view(const Json& view, const std::string& path, ValidationReport& report) {
    if (!view.is_object()) {
        report.fail("spec-not-object", path.empty() ? "/" : path, "view must be a JSON object");
        return;
    }
    if (view.contains("layer")) {
        const Json& layer = view["layer"];
        if (!layer.is_array() || layer.empty()) {
            report.fail("layer-not-list", path + "/layer", "\"layer\" must be a non-empty list");
        }
        for (const char* key : {"mark", "encoding"}) {
            if (view.contains(key)) {
                report.fail("layer-rule", path + "/" + key,
                            std::string("\"") + key + "\" must be inside the \"layer\" list, not beside it");
            }
        }
        if (layer.is_array()) {
            for (std::size_t i = 0; i < layer.size(); ++i) {
                check_view(layer[i], path + "/layer/" + std::to_string(i), report);
            }
        }
        return;
    }
    if (!view.contains("mark")) {
        report.fail("missing-mark", path + "/mark", "view has neither \"mark\" nor \"layer\"");
    }
    if (!view.contains("encoding")) {
        report.fail("missing-encoding", path + "/encoding", "view has no \"encoding\"");
    } else if (!view["encoding"].is_object()) {
        report.fail("missing-encoding", path + "/encoding", "\"encoding\" must be an object");
    }
}

}  // namespace

ValidationReport check_spec_structure(const Json& spec) {
    ValidationReport report;
    check_view(spec, "", report);
    return report;
}

}  // namespace datavideo
