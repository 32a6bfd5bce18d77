#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "datavideo/core_model.hpp"

namespace datavideo {

// Half-open character range [start_char, end_char) into the narration.
struct Span {
    std::size_t start_char = 0;
    std::size_t end_char = 0;

    bool intersects(const Span& o) const { return start_char < o.end_char && o.start_char < end_char; }
    friend bool operator==(const Span&, const Span&) = default;
    friend auto operator<=>(const Span&, const Span&) = default;
};

struct WordTiming {
    std::string word;
    double start = 0.0;
    double end = 0.0;
    Span char_span;

    friend bool operator==(const WordTiming&, const WordTiming&) = default;
};

struct Interval {
    double start = 0.0;
    double end = 0.0;

    double length() const { return end - start; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

// First occurrence of segment at or after cursor. Runs of whitespace count
// as one space on both sides and the segment's outer whitespace is ignored.
// Throws SegmentNotFound.
Span locate_span(std::string_view narration, std::string_view segment, std::size_t cursor = 0);

// Text up to and including the first '.', '!' or '?' that is followed by
// whitespace or the end of the narration. The whole narration if none.
Span first_sentence(std::string_view narration);

// Whitespace-separated tokens of the narration with their character spans.
std::vector<std::pair<std::string, Span>> tokenize_words(std::string_view narration);

// Interval from the start of the first word overlapping each span to the end
// of the last one. Throws NoWordOverlap.
std::vector<Interval> align_segments(const std::vector<Span>& spans, const std::vector<WordTiming>& timings);
Interval align_segment(const Span& span, const std::vector<WordTiming>& timings);

// ---------------------------------------------------------------------------
// Keyframes

enum class Property { opacity, scale, translate_x, translate_y, clip_fraction, wheel_fraction };
enum class Easing { linear, ease_in, ease_out, ease_in_out };

std::string_view to_string(Property p);
std::string_view to_string(Easing e);
Property parse_property(std::string_view s);
Easing parse_easing(std::string_view s);
double default_value(Property p);

// Progress curve of an easing on [0,1], matching the CSS cubic-bezier
// definitions of the same names.
double ease(Easing e, double progress);

// The easing of a keyframe governs interpolation toward the next keyframe.
struct Keyframe {
    std::string element_id;
    double time = 0.0;
    Property property = Property::opacity;
    double value = 0.0;
    Easing easing = Easing::linear;

    friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

enum class Visibility { visible, hidden };

struct Timeline {
    double duration = 0.0;
    // Per element: keyframes sorted by (time, property); times strictly
    // increase within each property.
    std::map<std::string, std::vector<Keyframe>> tracks;
    std::map<std::string, Visibility> initial_visibility;

    friend bool operator==(const Timeline&, const Timeline&) = default;
};

// Recipe parameters for the emphasis ramps and annotation fade-ins.
inline constexpr double emphasis_ramp_fraction = 0.15;
inline constexpr double annotation_fade_seconds = 0.5;
inline constexpr double highlight_dim_opacity = 0.2;

struct EffectContext {
    std::vector<std::string> mark_ids;    // candidates dimmed by Highlight-one-and-fade-others
    std::vector<std::string> legend_ids;  // animated by the legend variants
};

struct AnimationEffect {
    std::vector<Keyframe> keyframes;
    std::set<std::string> initially_hidden;
};

// Keyframe recipe of one animation over one interval.
AnimationEffect keyframes_for(AnimationType animation, const std::set<std::string>& element_ids,
                              const Interval& interval, const EffectContext& context = {});

struct PlacedDirective {
    AnimationDirective directive;
    Span span;
    Interval interval;
    std::set<std::string> targets;
};

struct PlacedAnnotation {
    std::string element_id;
    Interval interval;  // interval of the narration segment that introduces it
};

struct TimelineInputs {
    std::vector<PlacedDirective> directives;
    std::vector<PlacedAnnotation> annotations;
    std::vector<std::string> element_ids;  // every element listed in initial_visibility
    EffectContext context;
    double duration = 0.0;
};

struct CompiledTimeline {
    Timeline timeline;
    ValidationReport report;  // advisories only
};

// Directives are applied in narration order; entrance targets and annotation
// elements start hidden. Overlapping keyframes of one element and property
// are resolved last-writer-wins with an advisory.
CompiledTimeline compile_timeline(const TimelineInputs& inputs);

// ---------------------------------------------------------------------------
// Evaluation

struct ElementState {
    double opacity = 1.0;
    double scale = 1.0;
    double translate_x = 0.0;
    double translate_y = 0.0;
    double clip_fraction = 1.0;
    double wheel_fraction = 1.0;

    bool visible() const { return opacity > 0.0 && scale > 0.0 && clip_fraction > 0.0 && wheel_fraction > 0.0; }
    double get(Property p) const;
};

// Values hold the first keyframe before it and the last keyframe after it;
// elements without keyframes keep the defaults.
double property_at(const Timeline& timeline, const std::string& element_id, Property property, double time);
ElementState state_at(const Timeline& timeline, const std::string& element_id, double time);

// Invariant checks: keyframe times within [0, duration], per-property
// strict ordering, value ranges, hidden elements that never enter.
ValidationReport check_timeline(const Timeline& timeline);

Json to_json(const Timeline& timeline);
Timeline timeline_from_json(const Json& j);
Json to_json(const std::vector<WordTiming>& timings);
std::vector<WordTiming> word_timings_from_json(const Json& j);

}  // namespace datavideo
