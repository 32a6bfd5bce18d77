#include "datavideo/timeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "datavideo/error.hpp"

namespace datavideo {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct Normalized {
    std::string text;
    std::vector<std::size_t> origin;  // original offset of each normalized char
};

Normalized normalize_whitespace(std::string_view s) {
    Normalized n;
    n.text.reserve(s.size());
    n.origin.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (is_space(s[i])) {
            if (!n.text.empty() && n.text.back() == ' ') continue;
            n.text.push_back(' ');
        } else {
            n.text.push_back(s[i]);
        }
        n.origin.push_back(i);
    }
    return n;
}

}  // namespace

Span locate_span(std::string_view narration, std::string_view segment, std::size_t cursor) {
    const auto trimmed = trim(segment);
    if (trimmed.empty()) throw Error(Errc::segment_not_found, "segment is empty");
    const Normalized hay = normalize_whitespace(narration);
    const std::string needle = normalize_whitespace(trimmed).text;

    const auto from = std::lower_bound(hay.origin.begin(), hay.origin.end(), cursor) - hay.origin.begin();
    const auto pos = hay.text.find(needle, static_cast<std::size_t>(from));
    if (pos == std::string::npos) {
        throw Error(Errc::segment_not_found, "'" + std::string(segment) + "'");
    }
    return Span{hay.origin[pos], hay.origin[pos + needle.size() - 1] + 1};
}

Span first_sentence(std::string_view narration) {
    for (std::size_t i = 0; i < narration.size(); ++i) {
        const char c = narration[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == narration.size() || is_space(narration[i + 1]))) {
            return Span{0, i + 1};
        }
    }
    return Span{0, narration.size()};
}

std::vector<std::pair<std::string, Span>> tokenize_words(std::string_view narration) {
    std::vector<std::pair<std::string, Span>> out;
    std::size_t i = 0;
    while (i < narration.size()) {
        while (i < narration.size() && is_space(narration[i])) ++i;
        if (i >= narration.size()) break;
        const std::size_t start = i;
        while (i < narration.size() && !is_space(narration[i])) ++i;
        out.emplace_back(std::string(narration.substr(start, i - start)), Span{start, i});
    }
    return out;
}

Interval align_segment(const Span& span, const std::vector<WordTiming>& timings) {
    std::optional<Interval> out;
    for (const auto& w : timings) {
        if (!w.char_span.intersects(span)) continue;
        if (!out) {
            out = Interval{w.start, w.end};
        } else {
            out->end = w.end;
        }
    }
    if (!out) {
        throw Error(Errc::no_word_overlap, "span [" + std::to_string(span.start_char) + "," +
                                                std::to_string(span.end_char) + ") covers no word");
    }
    return *out;
}

std::vector<Interval> align_segments(const std::vector<Span>& spans, const std::vector<WordTiming>& timings) {
    std::vector<Interval> out;
    out.reserve(spans.size());
    for (const auto& s : spans) out.push_back(align_segment(s, timings));
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Property p) {
    switch (p) {
        case Property::opacity: return "opacity";
        case Property::scale: return "scale";
        case Property::translate_x: return "translate_x";
        case Property::translate_y: return "translate_y";
        case Property::clip_fraction: return "clip_fraction";
        case Property::wheel_fraction: return "wheel_fraction";
    }
    return {};
}

std::string_view to_string(Easing e) {
    switch (e) {
        case Easing::linear: return "linear";
        case Easing::ease_in: return "ease-in";
        case Easing::ease_out: return "ease-out";
        case Easing::ease_in_out: return "ease-in-out";
    }
    return {};
}

Property parse_property(std::string_view s) {
    for (auto p : {Property::opacity, Property::scale, Property::translate_x, Property::translate_y,
                   Property::clip_fraction, Property::wheel_fraction}) {
        if (to_string(p) == s) return p;
    }
    throw Error(Errc::schema_error, "unknown keyframe property '" + std::string(s) + "'");
}

Easing parse_easing(std::string_view s) {
    for (auto e : {Easing::linear, Easing::ease_in, Easing::ease_out, Easing::ease_in_out}) {
        if (to_string(e) == s) return e;
    }
    throw Error(Errc::schema_error, "unknown easing '" + std::string(s) + "'");
}

double default_value(Property p) {
    switch (p) {
        case Property::translate_x:
        case Property::translate_y:
            return 0.0;
        default:
            return 1.0;
    }
}

namespace {

// y(x) of the CSS cubic-bezier (0,0),(x1,y1),(x2,y2),(1,1).
double cubic_bezier(double x1, double y1, double x2, double y2, double x) {
    auto coord = [](double a, double b, double t) {
        const double u = 1.0 - t;
        return 3 * u * u * t * a + 3 * u * t * t * b + t * t * t;
    };
    double lo = 0.0;
    double hi = 1.0;
    double t = x;
    for (int i = 0; i < 60; ++i) {
        t = 0.5 * (lo + hi);
        if (coord(x1, x2, t) < x) {
            lo = t;
        } else {
            hi = t;
        }
    }
    return coord(y1, y2, t);
}

}  // namespace

double ease(Easing e, double p) {
    p = std::clamp(p, 0.0, 1.0);
    if (p == 0.0 || p == 1.0) return p;
    switch (e) {
        case Easing::linear: return p;
        case Easing::ease_in: return cubic_bezier(0.42, 0.0, 1.0, 1.0, p);
        case Easing::ease_out: return cubic_bezier(0.0, 0.0, 0.58, 1.0, p);
        case Easing::ease_in_out: return cubic_bezier(0.42, 0.0, 0.58, 1.0, p);
    }
    return p;
}

// ---------------------------------------------------------------------------

namespace {

struct Stop {
    double value;
    Easing easing;
};

// Evenly spaced stops across the interval; the last lands exactly on its end.
void add_stops(std::vector<Keyframe>& out, const std::string& id, Property prop, const Interval& iv,
               const std::vector<Stop>& stops) {
    const std::size_t n = stops.size() - 1;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = k == n ? iv.end : iv.start + iv.length() * static_cast<double>(k) / static_cast<double>(n);
        out.push_back(Keyframe{id, t, prop, stops[k].value, stops[k].easing});
    }
}

void add_ramp(std::vector<Keyframe>& out, const std::string& id, Property prop, const Interval& iv, double from,
              double to, Easing easing) {
    add_stops(out, id, prop, iv, {{from, easing}, {to, easing}});
}

}  // namespace

AnimationEffect keyframes_for(AnimationType animation, const std::set<std::string>& ids, const Interval& iv,
                              const EffectContext& ctx) {
    AnimationEffect fx;
    auto& kf = fx.keyframes;
    auto entrance = [&](const std::string& id) { fx.initially_hidden.insert(id); };

    auto legend_fade = [&] {
        for (const auto& id : ctx.legend_ids) {
            entrance(id);
            add_ramp(kf, id, Property::opacity, iv, 0.0, 1.0, Easing::linear);
        }
    };

    switch (animation) {
        case AnimationType::axes_fade_in:
        case AnimationType::scatter_fade_in:
        case AnimationType::fade_in:
            for (const auto& id : ids) {
                entrance(id);
                add_ramp(kf, id, Property::opacity, iv, 0.0, 1.0, Easing::linear);
            }
            break;
        case AnimationType::bar_grow_in:
        case AnimationType::bar_grow_and_legend_fade_in:
            for (const auto& id : ids) {
                entrance(id);
                add_ramp(kf, id, Property::scale, iv, 0.0, 1.0, Easing::ease_out);
            }
            if (animation == AnimationType::bar_grow_and_legend_fade_in) legend_fade();
            break;
        case AnimationType::line_wipe_in:
        case AnimationType::line_wipe_and_legend_fade_in:
            for (const auto& id : ids) {
                entrance(id);
                add_ramp(kf, id, Property::clip_fraction, iv, 0.0, 1.0, Easing::linear);
            }
            if (animation == AnimationType::line_wipe_and_legend_fade_in) legend_fade();
            break;
        case AnimationType::pie_wheel_in:
        case AnimationType::pie_wheel_in_and_legend_fly_in:
            for (const auto& id : ids) {
                entrance(id);
                add_ramp(kf, id, Property::wheel_fraction, iv, 0.0, 1.0, Easing::linear);
            }
            if (animation == AnimationType::pie_wheel_in_and_legend_fly_in) {
                for (const auto& id : ctx.legend_ids) {
                    entrance(id);
                    add_ramp(kf, id, Property::translate_x, iv, -40.0, 0.0, Easing::ease_out);
                    add_ramp(kf, id, Property::opacity, iv, 0.0, 1.0, Easing::ease_out);
                }
            }
            break;
        case AnimationType::float_in:
            for (const auto& id : ids) {
                entrance(id);
                add_ramp(kf, id, Property::translate_y, iv, 20.0, 0.0, Easing::ease_out);
                add_ramp(kf, id, Property::opacity, iv, 0.0, 1.0, Easing::ease_out);
            }
            break;
        case AnimationType::fly_in:
            for (const auto& id : ids) {
                entrance(id);
                add_ramp(kf, id, Property::translate_x, iv, -40.0, 0.0, Easing::ease_out);
                add_ramp(kf, id, Property::opacity, iv, 0.0, 1.0, Easing::ease_out);
            }
            break;
        case AnimationType::zoom_in:
            for (const auto& id : ids) {
                entrance(id);
                add_ramp(kf, id, Property::scale, iv, 0.5, 1.0, Easing::ease_out);
                add_ramp(kf, id, Property::opacity, iv, 0.0, 1.0, Easing::ease_out);
            }
            break;
        case AnimationType::bar_bounce:
            for (const auto& id : ids) {
                add_stops(kf, id, Property::scale, iv,
                          {{1.0, Easing::ease_in_out},
                           {1.15, Easing::ease_in_out},
                           {1.0, Easing::ease_in_out},
                           {1.15, Easing::ease_in_out},
                           {1.0, Easing::ease_in_out}});
            }
            break;
        case AnimationType::zoom_in_then_zoom_out:
            for (const auto& id : ids) {
                add_stops(kf, id, Property::scale, iv,
                          {{1.0, Easing::ease_in_out}, {1.25, Easing::ease_in_out}, {1.0, Easing::ease_in_out}});
            }
            break;
        case AnimationType::shine_in_a_short_duration:
            for (const auto& id : ids) {
                std::vector<Stop> stops;
                for (int pulse = 0; pulse < 3; ++pulse) {
                    stops.push_back({1.0, Easing::ease_in_out});
                    stops.push_back({0.4, Easing::ease_in_out});
                }
                stops.push_back({1.0, Easing::ease_in_out});
                add_stops(kf, id, Property::opacity, iv, stops);
            }
            break;
        case AnimationType::highlight_one_and_fade_others: {
            const double delta = emphasis_ramp_fraction * iv.length();
            for (const auto& id : ctx.mark_ids) {
                if (ids.contains(id)) continue;
                kf.push_back(Keyframe{id, iv.start, Property::opacity, 1.0, Easing::ease_in_out});
                kf.push_back(Keyframe{id, iv.start + delta, Property::opacity, highlight_dim_opacity, Easing::linear});
                kf.push_back(Keyframe{id, iv.end - delta, Property::opacity, highlight_dim_opacity,
                                      Easing::ease_in_out});
                kf.push_back(Keyframe{id, iv.end, Property::opacity, 1.0, Easing::linear});
            }
            break;
        }
        case AnimationType::fade_out:
            for (const auto& id : ids) add_ramp(kf, id, Property::opacity, iv, 1.0, 0.0, Easing::linear);
            break;
    }
    return fx;
}

// ---------------------------------------------------------------------------

namespace {

struct Segment {
    double start;
    double end;
    std::vector<Keyframe> keyframes;
};

class TrackBuilder {
public:
    explicit TrackBuilder(ValidationReport& report) : report_(report) {}

    void add(const std::vector<Keyframe>& keyframes, const std::string& source) {
        std::map<std::pair<std::string, Property>, std::vector<Keyframe>> grouped;
        for (const auto& k : keyframes) grouped[{k.element_id, k.property}].push_back(k);
        for (auto& [key, kfs] : grouped) {
            std::sort(kfs.begin(), kfs.end(), [](const Keyframe& a, const Keyframe& b) { return a.time < b.time; });
            insert(key, Segment{kfs.front().time, kfs.back().time, std::move(kfs)}, source);
        }
    }

    std::map<std::string, std::vector<Keyframe>> flatten() const {
        std::map<std::string, std::vector<Keyframe>> out;
        for (const auto& [key, segments] : segments_) {
            auto& track = out[key.first];
            for (const auto& s : segments) track.insert(track.end(), s.keyframes.begin(), s.keyframes.end());
        }
        for (auto& [id, track] : out) {
            std::stable_sort(track.begin(), track.end(), [](const Keyframe& a, const Keyframe& b) {
                if (a.time != b.time) return a.time < b.time;
                return a.property < b.property;
            });
        }
        return out;
    }

private:
    void insert(const std::pair<std::string, Property>& key, Segment seg, const std::string& source) {
        auto& list = segments_[key];
        const auto before = list.size();
        std::erase_if(list, [&](const Segment& s) { return s.start < seg.end && seg.start < s.end; });
        if (list.size() != before) {
            report_.advise("overlapping-animation", key.first,
                           std::string(to_string(key.second)) + " keyframes replaced by " + source);
        }
        // a shared boundary keeps only the newer keyframe
        for (auto& s : list) {
            std::erase_if(s.keyframes, [&](const Keyframe& k) { return k.time == seg.start || k.time == seg.end; });
        }
        std::erase_if(list, [](const Segment& s) { return s.keyframes.empty(); });
        list.push_back(std::move(seg));
    }

    ValidationReport& report_;
    std::map<std::pair<std::string, Property>, std::vector<Segment>> segments_;
};

// Entrance/exit schedule used to skip dimming elements that are not on screen.
class VisibilitySchedule {
public:
    void entrance(const std::string& id, const Interval& iv) { events_[id].push_back({iv.start, true}); }
    void exit(const std::string& id, const Interval& iv) { events_[id].push_back({iv.end, false}); }

    bool visible_at(const std::string& id, double t) const {
        const auto it = events_.find(id);
        if (it == events_.end()) return true;
        bool has_entrance = false;
        double first_entrance = 0.0;
        for (const auto& [time, is_entrance] : it->second) {
            if (is_entrance && (!has_entrance || time < first_entrance)) {
                first_entrance = time;
                has_entrance = true;
            }
        }
        if (has_entrance && t < first_entrance) return false;
        std::optional<std::pair<double, bool>> latest;
        for (const auto& e : it->second) {
            if (e.first <= t && (!latest || e.first >= latest->first)) latest = e;
        }
        return !latest || latest->second;
    }

private:
    std::map<std::string, std::vector<std::pair<double, bool>>> events_;
};

}  // namespace

CompiledTimeline compile_timeline(const TimelineInputs& in) {
    CompiledTimeline out;
    out.timeline.duration = in.duration;

    std::vector<const PlacedDirective*> ordered;
    for (const auto& d : in.directives) ordered.push_back(&d);
    std::stable_sort(ordered.begin(), ordered.end(), [](const PlacedDirective* a, const PlacedDirective* b) {
        return a->span < b->span;
    });

    auto clamp_interval = [&](Interval iv, const std::string& what) {
        if (iv.start < 0.0 || iv.end > in.duration) {
            out.report.advise("interval-clamped", what, "interval exceeds the audio duration and was clamped");
            iv.start = std::clamp(iv.start, 0.0, in.duration);
            iv.end = std::clamp(iv.end, 0.0, in.duration);
        }
        return iv;
    };

    VisibilitySchedule schedule;
    for (const auto* d : ordered) {
        const auto category = category_of(d->directive.animation);
        for (const auto& id : d->targets) {
            if (category == AnimationCategory::entrance) schedule.entrance(id, d->interval);
            if (category == AnimationCategory::exit) schedule.exit(id, d->interval);
        }
    }

    TrackBuilder builder(out.report);
    std::set<std::string> hidden;
    for (std::size_t n = 0; n < ordered.size(); ++n) {
        const PlacedDirective& d = *ordered[n];
        const std::string label = std::string(to_string(d.directive.animation)) + " on '" + d.directive.narration + "'";
        const Interval iv = clamp_interval(d.interval, label);
        if (iv.length() <= 0.0) {
            out.report.advise("empty-interval", label, "directive skipped: interval has no duration");
            continue;
        }
        EffectContext ctx;
        ctx.legend_ids = in.context.legend_ids;
        for (const auto& id : in.context.mark_ids) {
            if (schedule.visible_at(id, iv.start)) ctx.mark_ids.push_back(id);
        }
        AnimationEffect fx = keyframes_for(d.directive.animation, d.targets, iv, ctx);
        hidden.insert(fx.initially_hidden.begin(), fx.initially_hidden.end());
        builder.add(fx.keyframes, label);
    }

    for (const auto& a : in.annotations) {
        const Interval seg = clamp_interval(a.interval, a.element_id);
        hidden.insert(a.element_id);
        if (seg.length() <= 0.0) continue;
        const Interval fade{seg.start, seg.start + std::min(annotation_fade_seconds, seg.length())};
        std::vector<Keyframe> kfs;
        add_ramp(kfs, a.element_id, Property::opacity, fade, 0.0, 1.0, Easing::linear);
        builder.add(kfs, "annotation fade-in");
    }

    out.timeline.tracks = builder.flatten();
    for (const auto& id : in.element_ids) {
        out.timeline.initial_visibility[id] = hidden.contains(id) ? Visibility::hidden : Visibility::visible;
    }
    for (const auto& id : hidden) out.timeline.initial_visibility[id] = Visibility::hidden;
    for (const auto& [id, track] : out.timeline.tracks) {
        out.timeline.initial_visibility.try_emplace(id, Visibility::visible);
    }
    for (const auto& [id, vis] : out.timeline.initial_visibility) {
        if (vis == Visibility::hidden && !out.timeline.tracks.contains(id)) {
            out.report.advise("never-shown", id, "element starts hidden and has no entrance keyframes");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

double ElementState::get(Property p) const {
    switch (p) {
        case Property::opacity: return opacity;
        case Property::scale: return scale;
        case Property::translate_x: return translate_x;
        case Property::translate_y: return translate_y;
        case Property::clip_fraction: return clip_fraction;
        case Property::wheel_fraction: return wheel_fraction;
    }
    return 0.0;
}

double property_at(const Timeline& timeline, const std::string& id, Property property, double time) {
    const auto it = timeline.tracks.find(id);
    if (it == timeline.tracks.end()) return default_value(property);
    const Keyframe* prev = nullptr;
    for (const auto& k : it->second) {
        if (k.property != property) continue;
        if (k.time > time) {
            if (!prev) return k.value;
            const double span = k.time - prev->time;
            const double p = span > 0.0 ? (time - prev->time) / span : 1.0;
            return prev->value + (k.value - prev->value) * ease(prev->easing, p);
        }
        prev = &k;
    }
    return prev ? prev->value : default_value(property);
}

ElementState state_at(const Timeline& timeline, const std::string& id, double t) {
    ElementState s;
    s.opacity = property_at(timeline, id, Property::opacity, t);
    s.scale = property_at(timeline, id, Property::scale, t);
    s.translate_x = property_at(timeline, id, Property::translate_x, t);
    s.translate_y = property_at(timeline, id, Property::translate_y, t);
    s.clip_fraction = property_at(timeline, id, Property::clip_fraction, t);
    s.wheel_fraction = property_at(timeline, id, Property::wheel_fraction, t);
    return s;
}

ValidationReport check_timeline(const Timeline& tl) {
    ValidationReport report;
    if (!(tl.duration >= 0.0)) report.fail("negative-duration", "/duration", "duration must be non-negative");
    for (const auto& [id, track] : tl.tracks) {
        std::map<Property, double> last_time;
        for (std::size_t i = 0; i < track.size(); ++i) {
            const Keyframe& k = track[i];
            const std::string where = id + "[" + std::to_string(i) + "]";
            if (k.element_id != id) report.fail("track-id", where, "keyframe belongs to '" + k.element_id + "'");
            if (k.time < 0.0 || k.time > tl.duration) {
                report.fail("time-range", where, "time " + format_number(k.time) + " outside [0, duration]");
            }
            if (i > 0) {
                const Keyframe& p = track[i - 1];
                if (p.time > k.time || (p.time == k.time && p.property > k.property)) {
                    report.fail("track-order", where, "keyframes are not sorted by time");
                }
            }
            if (auto it = last_time.find(k.property); it != last_time.end() && !(it->second < k.time)) {
                report.fail("property-order", where,
                            std::string(to_string(k.property)) + " keyframe times must strictly increase");
            }
            last_time[k.property] = k.time;
            const bool unit_range = k.property == Property::opacity || k.property == Property::clip_fraction ||
                                    k.property == Property::wheel_fraction;
            if (unit_range && (k.value < 0.0 || k.value > 1.0)) {
                report.fail("value-range", where, std::string(to_string(k.property)) + " must lie in [0,1]");
            }
            if (k.property == Property::scale && k.value < 0.0) {
                report.fail("value-range", where, "scale must be non-negative");
            }
        }
    }
    for (const auto& [id, vis] : tl.initial_visibility) {
        if (vis == Visibility::hidden && !tl.tracks.contains(id)) {
            report.advise("never-shown", id, "element starts hidden and has no entrance keyframes");
        }
    }
    return report;
}

Json to_json(const Timeline& tl) {
    Json out = Json::object();
    out["duration"] = tl.duration;
    Json vis = Json::object();
    for (const auto& [id, v] : tl.initial_visibility) vis[id] = v == Visibility::visible ? "visible" : "hidden";
    out["initial_visibility"] = std::move(vis);
    Json tracks = Json::array();
    for (const auto& [id, track] : tl.tracks) {
        Json kfs = Json::array();
        for (const auto& k : track) {
            kfs.push_back(Json{{"time", k.time},
                               {"property", to_string(k.property)},
                               {"value", k.value},
                               {"easing", to_string(k.easing)}});
        }
        tracks.push_back(Json{{"element_id", id}, {"keyframes", std::move(kfs)}});
    }
    out["tracks"] = std::move(tracks);
    return out;
}

Timeline timeline_from_json(const Json& j) {
    Timeline tl;
    try {
        tl.duration = j.at("duration").get<double>();
        for (const auto& [id, v] : j.at("initial_visibility").items()) {
            tl.initial_visibility[id] = v.get<std::string>() == "hidden" ? Visibility::hidden : Visibility::visible;
        }
        for (const auto& track : j.at("tracks")) {
            const auto id = track.at("element_id").get<std::string>();
            auto& kfs = tl.tracks[id];
            for (const auto& k : track.at("keyframes")) {
                kfs.push_back(Keyframe{id, k.at("time").get<double>(), parse_property(k.at("property").get<std::string>()),
                                       k.at("value").get<double>(), parse_easing(k.at("easing").get<std::string>())});
            }
        }
    } catch (const Json::exception& e) {
        throw Error(Errc::schema_error, std::string("timeline.json: ") + e.what());
    }
    return tl;
}

Json to_json(const std::vector<WordTiming>& timings) {
    Json out = Json::array();
    for (const auto& w : timings) {
        out.push_back(Json{{"word", w.word},
                           {"start", w.start},
                           {"end", w.end},
                           {"char_start", w.char_span.start_char},
                           {"char_end", w.char_span.end_char}});
    }
    return out;
}

std::vector<WordTiming> word_timings_from_json(const Json& j) {
    std::vector<WordTiming> out;
    try {
        for (const auto& w : j) {
            out.push_back(WordTiming{w.at("word").get<std::string>(), w.at("start").get<double>(),
                                     w.at("end").get<double>(),
                                     Span{w.at("char_start").get<std::size_t>(), w.at("char_end").get<std::size_t>()}});
        }
    } catch (const Json::exception& e) {
        throw Error(Errc::schema_error, std::string("word timings: ") + e.what());
    }
    return out;
}

}  // namespace datavideo
