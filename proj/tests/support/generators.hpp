#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "datavideo/core_model.hpp"
#include "datavideo/designer.hpp"
#include "datavideo/media.hpp"
#include "datavideo/svg.hpp"
#include "datavideo/timeline.hpp"
#include "test_support.hpp"

namespace testing_support {

using namespace datavideo;

// ---------------------------------------------------------------------------
// SVG trees

struct XmlNode {
    std::string tag;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::string text;
    std::vector<XmlNode> children;
};

inline std::string to_xml(const XmlNode& n, int depth = 0) {
    std::string out(static_cast<std::size_t>(depth) * 2, ' ');
    out += "<" + n.tag;
    for (const auto& [k, v] : n.attrs) out += " " + k + "=\"" + xml_escape(v) + "\"";
    if (n.children.empty() && n.text.empty()) return out + "/>\n";
    out += ">";
    out += xml_escape(n.text);
    if (!n.children.empty()) {
        out += "\n";
        for (const auto& c : n.children) out += to_xml(c, depth + 1);
        out += std::string(static_cast<std::size_t>(depth) * 2, ' ');
    }
    return out + "</" + n.tag + ">\n";
}

inline std::string num_attr(Rng& rng) { return std::to_string(rng.uniform(0, 400)); }

inline XmlNode random_leaf(Rng& rng, int& serial) {
    static const std::vector<std::string> tags = {"rect", "circle", "path", "text", "line"};
    static const std::vector<std::string> fills = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
    XmlNode n;
    n.tag = rng.pick(tags);
    if (rng.chance(0.5)) n.attrs.emplace_back("id", "m" + std::to_string(serial++));
    if (n.tag == "rect") {
        n.attrs.insert(n.attrs.end(), {{"x", num_attr(rng)}, {"y", num_attr(rng)}, {"width", num_attr(rng)},
                                       {"height", num_attr(rng)}});
    } else if (n.tag == "circle") {
        n.attrs.insert(n.attrs.end(), {{"cx", num_attr(rng)}, {"cy", num_attr(rng)}, {"r", "3"}});
    } else if (n.tag == "path") {
        n.attrs.emplace_back("d", "M" + num_attr(rng) + "," + num_attr(rng) + "L" + num_attr(rng) + "," + num_attr(rng));
    } else if (n.tag == "text") {
        n.attrs.insert(n.attrs.end(), {{"x", num_attr(rng)}, {"y", num_attr(rng)}});
        n.text = "label " + std::to_string(rng.uniform(0, 5));
    } else {
        n.attrs.insert(n.attrs.end(), {{"x1", num_attr(rng)}, {"y1", num_attr(rng)}, {"x2", num_attr(rng)},
                                       {"y2", num_attr(rng)}});
    }
    n.attrs.emplace_back("fill", rng.pick(fills));
    if (rng.chance(0.3)) n.attrs.emplace_back("data-row", std::to_string(rng.uniform(0, 20)));
    return n;
}

// An svg root holding role groups of leaves, loosely shaped like rendered
// charts; nested groups appear inside the mark groups.
inline XmlNode random_svg_tree(Rng& rng) {
    static const std::vector<std::string> roles = {"role-axis", "role-mark mark-line", "role-mark mark-bar",
                                                   "role-legend", "role-title", "plot"};
    int serial = 0;
    XmlNode root{"svg", {{"xmlns", "http://www.w3.org/2000/svg"}, {"width", "600"}, {"height", "400"}}, "", {}};
    const int groups = rng.uniform(1, 5);
    for (int g = 0; g < groups; ++g) {
        XmlNode group{"g", {{"class", rng.pick(roles)}}, "", {}};
        if (rng.chance(0.5)) group.attrs.emplace_back("id", "g" + std::to_string(serial++));
        const int leaves = rng.uniform(0, 8);
        for (int i = 0; i < leaves; ++i) {
            if (rng.chance(0.15)) {
                XmlNode inner{"g", {{"class", "series"}}, "", {}};
                const int k = rng.uniform(1, 4);
                for (int j = 0; j < k; ++j) inner.children.push_back(random_leaf(rng, serial));
                group.children.push_back(std::move(inner));
            } else {
                group.children.push_back(random_leaf(rng, serial));
            }
        }
        root.children.push_back(std::move(group));
    }
    return root;
}

inline void permute_siblings(XmlNode& n, Rng& rng) {
    rng.shuffle(n.children);
    for (auto& c : n.children) permute_siblings(c, rng);
}

inline void collect_groups(XmlNode& n, std::vector<XmlNode*>& out) {
    if (n.tag == "svg" || n.tag == "g") out.push_back(&n);
    for (auto& c : n.children) collect_groups(c, out);
}

// Adds k leaf elements with ids "ann-0".."ann-<k-1>" at random positions.
// They carry a stroke, which the generated base elements never do.
inline std::vector<std::string> inject_annotations(XmlNode& root, Rng& rng, int k) {
    static const std::vector<std::string> tags = {"circle", "text", "line", "path"};
    std::vector<std::string> ids;
    for (int i = 0; i < k; ++i) {
        std::vector<XmlNode*> groups;
        collect_groups(root, groups);
        XmlNode* parent = rng.pick(groups);
        XmlNode leaf{rng.pick(tags), {{"id", "ann-" + std::to_string(i)}, {"stroke", "black"}, {"x", num_attr(rng)}}, "", {}};
        if (leaf.tag == "text") leaf.text = "note " + std::to_string(i);
        const auto pos = rng.index(parent->children.size() + 1);
        parent->children.insert(parent->children.begin() + static_cast<std::ptrdiff_t>(pos), std::move(leaf));
        ids.push_back("ann-" + std::to_string(i));
    }
    return ids;
}

// ---------------------------------------------------------------------------
// Animation scripts: a legal sequence of directives over a narration built
// from their segments.

struct ScriptEvent {
    AnimationType animation;
    int series;  // -1 for the axes
};

struct Script {
    std::string narration;
    std::vector<AnimationDirective> directives;
    std::vector<ScriptEvent> events;
};

inline const std::vector<AnimationType>& entrance_animations() {
    static const std::vector<AnimationType> v = {AnimationType::fade_in,      AnimationType::float_in,
                                                 AnimationType::fly_in,       AnimationType::zoom_in,
                                                 AnimationType::line_wipe_in, AnimationType::bar_grow_in,
                                                 AnimationType::scatter_fade_in};
    return v;
}

inline const std::vector<AnimationType>& emphasis_animations() {
    static const std::vector<AnimationType> v = {AnimationType::bar_bounce, AnimationType::zoom_in_then_zoom_out,
                                                 AnimationType::shine_in_a_short_duration,
                                                 AnimationType::highlight_one_and_fade_others};
    return v;
}

inline std::vector<ScriptEvent> legal_events(Rng& rng, int series_count) {
    enum class State { waiting, shown, gone };
    std::vector<State> state(static_cast<std::size_t>(series_count), State::waiting);
    std::vector<ScriptEvent> events{{AnimationType::axes_fade_in, -1}};
    const int steps = rng.uniform(series_count, series_count + 6);
    for (int step = 0; step < steps; ++step) {
        std::vector<int> waiting, shown;
        for (int s = 0; s < series_count; ++s) {
            if (state[static_cast<std::size_t>(s)] == State::waiting) waiting.push_back(s);
            if (state[static_cast<std::size_t>(s)] == State::shown) shown.push_back(s);
        }
        if (!waiting.empty() && (shown.empty() || rng.chance(0.5))) {
            const int s = rng.pick(waiting);
            events.push_back({rng.pick(entrance_animations()), s});
            state[static_cast<std::size_t>(s)] = State::shown;
        } else if (!shown.empty() && rng.chance(0.8)) {
            events.push_back({rng.pick(emphasis_animations()), rng.pick(shown)});
        } else if (!shown.empty()) {
            const int s = rng.pick(shown);
            events.push_back({AnimationType::fade_out, s});
            state[static_cast<std::size_t>(s)] = State::gone;
        }
    }
    return events;
}

inline std::string series_target(int series) { return series < 0 ? "axes" : "series " + std::to_string(series); }

// Each event owns one chunk of words, unique thanks to a numbered token.
inline Script script_from_events(Rng& rng, std::vector<ScriptEvent> events, bool opening_filler = false) {
    static const std::vector<std::string> words = {"revenue", "grew",   "steadily", "across", "the",    "quarter",
                                                   "while",   "costs",  "fell",     "sharply", "in",    "spring",
                                                   "and",     "profit", "peaked",   "late",   "summer", "before"};
    Script script;
    script.events = events;
    std::string text = opening_filler ? "Overall the picture was mixed. " : "";
    for (std::size_t i = 0; i < events.size(); ++i) {
        std::vector<std::string> chunk;
        const int n = rng.uniform(1, 3);
        for (int w = 0; w < n; ++w) chunk.push_back(rng.pick(words));
        chunk.insert(chunk.begin() + static_cast<std::ptrdiff_t>(rng.index(chunk.size() + 1)),
                     "k" + std::to_string(i) + "z");
        std::string segment;
        for (const auto& w : chunk) segment += (segment.empty() ? "" : " ") + w;

        AnimationDirective d;
        d.animation = events[i].animation;
        d.narration = segment;
        d.target = series_target(events[i].series);
        if (events[i].series >= 0) d.index = {static_cast<std::size_t>(events[i].series)};
        script.directives.push_back(d);

        text += segment;
        if (rng.chance(0.3)) text += " " + rng.pick(words);
        const bool last = i + 1 == events.size();
        text += (last || rng.chance(0.35)) ? ". " : " ";
    }
    script.narration = std::string(trim(text));
    return script;
}

enum class LegalityRule { axes_position, before_entrance, after_exit, verbatim_segment };

inline const char* rule_code(LegalityRule r) {
    switch (r) {
        case LegalityRule::axes_position: return "axes-fade-in-position";
        case LegalityRule::before_entrance: return "before-entrance";
        case LegalityRule::after_exit: return "after-exit";
        case LegalityRule::verbatim_segment: return "segment-not-found";
    }
    return "";
}

inline Script clean_script(Rng& rng) { return script_from_events(rng, legal_events(rng, rng.uniform(1, 4))); }

// A script that breaks exactly one rule of the given class.
inline Script violating_script(Rng& rng, LegalityRule rule) {
    auto events = legal_events(rng, rng.uniform(1, 4));
    switch (rule) {
        case LegalityRule::axes_position: return script_from_events(rng, events, true);
        case LegalityRule::before_entrance: {
            std::vector<std::size_t> entrances;
            for (std::size_t i = 1; i < events.size(); ++i) {
                if (category_of(events[i].animation) == AnimationCategory::entrance) entrances.push_back(i);
            }
            const std::size_t at = rng.pick(entrances);
            const auto pos = static_cast<std::ptrdiff_t>(1 + rng.index(at));
            events.insert(events.begin() + pos, ScriptEvent{rng.pick(emphasis_animations()), events[at].series});
            return script_from_events(rng, events);
        }
        case LegalityRule::after_exit: {
            std::map<int, std::size_t> exits;
            std::set<int> entered;
            for (std::size_t i = 0; i < events.size(); ++i) {
                if (events[i].animation == AnimationType::fade_out) exits[events[i].series] = i;
                if (events[i].series >= 0) entered.insert(events[i].series);
            }
            const int s = *std::next(entered.begin(), static_cast<std::ptrdiff_t>(rng.index(entered.size())));
            std::size_t exit_at;
            if (auto it = exits.find(s); it != exits.end()) {
                exit_at = it->second;
            } else {
                events.push_back({AnimationType::fade_out, s});
                exit_at = events.size() - 1;
            }
            const auto pos = static_cast<std::ptrdiff_t>(exit_at + 1 + rng.index(events.size() - exit_at));
            events.insert(events.begin() + pos, ScriptEvent{rng.pick(emphasis_animations()), s});
            return script_from_events(rng, events);
        }
        case LegalityRule::verbatim_segment: {
            Script script = script_from_events(rng, events);
            auto& d = script.directives[rng.index(script.directives.size())];
            d.narration += " quietly";
            return script;
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Timelines compiled from random legal scripts over synthetic element ids.

struct TimelineCase {
    Script script;
    TimelineInputs inputs;
    CompiledTimeline compiled;
    Speech speech;
};

inline std::vector<std::string> series_elements(int series, int marks_per_series) {
    std::vector<std::string> ids;
    for (int k = 0; k < marks_per_series; ++k) ids.push_back("s" + std::to_string(series) + "-" + std::to_string(k));
    return ids;
}

inline TimelineCase random_timeline_case(Rng& rng, const std::filesystem::path& audio) {
    TimelineCase c;
    const int series = rng.uniform(1, 4);
    const int marks = rng.uniform(1, 3);
    c.script = script_from_events(rng, legal_events(rng, series));

    MockSpeechSynthesizer tts;
    c.speech = synthesize_speech(c.script.narration, tts, audio);

    TimelineInputs& in = c.inputs;
    in.duration = c.speech.duration;
    in.element_ids = {"root", "axis-x", "axis-y", "legend", "title"};
    for (int s = 0; s < series; ++s) {
        for (const auto& id : series_elements(s, marks)) {
            in.element_ids.push_back(id);
            in.context.mark_ids.push_back(id);
        }
    }
    in.context.legend_ids = {"legend"};

    std::vector<std::string> segments;
    for (const auto& d : c.script.directives) segments.push_back(d.narration);
    const auto spans = locate_segments(segments, c.script.narration);
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const int s = c.script.events[i].series;
        std::set<std::string> targets;
        if (s < 0) {
            targets = {"axis-x", "axis-y"};
        } else {
            for (const auto& id : series_elements(s, marks)) targets.insert(id);
        }
        in.directives.push_back(PlacedDirective{c.script.directives[i], *spans[i],
                                                align_segment(*spans[i], c.speech.timings), targets});
    }
    const int annotations = rng.uniform(0, 2);
    for (int a = 0; a < annotations; ++a) {
        const auto& d = in.directives[rng.index(in.directives.size())];
        const std::string id = "note-" + std::to_string(a);
        in.element_ids.push_back(id);
        in.annotations.push_back(PlacedAnnotation{id, d.interval});
    }
    c.compiled = compile_timeline(in);
    return c;
}

}  // namespace testing_support
