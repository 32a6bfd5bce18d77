#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace datavideo {

// Key order of agent output is preserved so persisted artifacts mirror replies.
using Json = nlohmann::ordered_json;

// Rows of a table shown inside prompts; the full table stays in memory.
inline constexpr std::size_t default_prompt_rows = 100;

// ---------------------------------------------------------------------------
// Tables

using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_null(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
inline bool is_number(const Cell& c) { return std::holds_alternative<double>(c); }

// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);
std::string cell_text(const Cell& c);

struct Column {
    std::string name;
    std::vector<Cell> values;

    friend bool operator==(const Column&, const Column&) = default;
};

// Rows are identified by their 0-based position; directive "index" fields
// refer to this position.
class DataTable {
public:
    DataTable() = default;
    // Throws Error(invalid_table) if the columns break the invariants.
    DataTable(std::string title, std::vector<Column> columns);

    const std::string& title() const { return title_; }
    const std::vector<Column>& columns() const { return columns_; }
    std::size_t row_count() const { return row_count_; }
    std::size_t column_count() const { return columns_.size(); }
    const Cell& at(std::size_t row, std::size_t col) const { return columns_[col].values[row]; }
    std::optional<std::size_t> column_index(std::string_view name) const;

    // Rows as JSON objects keyed by column name; null cells stay null.
    Json rows_as_json() const;

    friend bool operator==(const DataTable&, const DataTable&) = default;

private:
    std::string title_;
    std::vector<Column> columns_;
    std::size_t row_count_ = 0;
};

struct DataDescription {
    std::string text;
};

// ---------------------------------------------------------------------------
// Closed vocabularies

enum class InsightType {
    change_over_time,
    characterize_distribution,
    cluster,
    comparison,
    correlate,
    determine_range,
    deviation,
    find_anomalies,
    find_extremum,
    magnitude,
    part_to_whole,
    sort,
    trend,
};
inline constexpr std::size_t insight_type_count = 13;
const std::array<InsightType, insight_type_count>& all_insight_types();
std::string_view to_string(InsightType t);
// Trims surrounding whitespace, then matches exactly. Throws UnknownInsightType.
InsightType parse_insight_type(std::string_view name);

enum class VisualizationType { bar, scatter, pie, line };
std::string_view to_string(VisualizationType t);
VisualizationType parse_visualization_type(std::string_view name);

enum class AnimationCategory { entrance, emphasis, exit };
std::string_view to_string(AnimationCategory c);

enum class AnimationType {
    // entrance
    axes_fade_in,
    bar_grow_in,
    line_wipe_in,
    pie_wheel_in,
    pie_wheel_in_and_legend_fly_in,
    scatter_fade_in,
    bar_grow_and_legend_fade_in,
    line_wipe_and_legend_fade_in,
    fade_in,
    float_in,
    fly_in,
    zoom_in,
    // emphasis
    bar_bounce,
    zoom_in_then_zoom_out,
    shine_in_a_short_duration,
    highlight_one_and_fade_others,
    // exit
    fade_out,
};
inline constexpr std::size_t animation_type_count = 17;
const std::array<AnimationType, animation_type_count>& all_animation_types();
std::string_view to_string(AnimationType t);
AnimationType parse_animation_type(std::string_view name);
AnimationCategory category_of(AnimationType t);
// Looks the name up and returns its category. Throws UnknownAnimation.
AnimationCategory classify_animation(std::string_view name);

enum class AnnotationType { mark_label, circle, text, rule, trend_line, arrow };
std::string_view to_string(AnnotationType t);
AnnotationType parse_annotation_type(std::string_view name);

// ---------------------------------------------------------------------------
// Agent outputs

struct Insight {
    std::string insight;
    std::vector<InsightType> types;
};

struct VisualizationSpec {
    Json spec;
    VisualizationType vis_type = VisualizationType::bar;
};

struct AnimationDirective {
    AnimationType animation = AnimationType::fade_in;
    std::string narration;
    std::string target;
    std::vector<std::size_t> index;
    std::string explanation;

    friend bool operator==(const AnimationDirective&, const AnimationDirective&) = default;
};

struct AnnotationDirective {
    std::vector<AnnotationType> types;
    std::string description;
    std::vector<std::size_t> index;
    std::string nar;
};

struct AnalystOutput {
    std::vector<Insight> insights;
    VisualizationSpec visualization;
    std::string narration;
};

struct DesignerOutput {
    Json annotated_visualization;
    std::vector<AnimationDirective> animation_directives;
    std::vector<AnnotationDirective> annotation_directives;
};

// ---------------------------------------------------------------------------
// Validation reports

struct Violation {
    std::string code;
    std::string path;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
    friend auto operator<=>(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<Violation> advisories;

    bool passing() const { return violations.empty(); }
    void fail(std::string code, std::string path, std::string message) {
        violations.push_back({std::move(code), std::move(path), std::move(message)});
    }
    void advise(std::string code, std::string path, std::string message) {
        advisories.push_back({std::move(code), std::move(path), std::move(message)});
    }
    void merge(const ValidationReport& other);
};

Json to_json(const Violation& v);
Json to_json(const ValidationReport& r);
ValidationReport report_from_json(const Json& j);

// Structural rules every chart spec must satisfy: a JSON object with either
// top-level mark+encoding or a "layer" list, and no mark/encoding beside a
// layer list. Applied recursively to layer items.
ValidationReport check_spec_structure(const Json& spec);

// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

}  // namespace datavideo
