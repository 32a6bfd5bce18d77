#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>

#include "datavideo/media.hpp"

namespace datavideo {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string key_spline(Easing e) {
    switch (e) {
        case Easing::linear: return "0 0 1 1";
        case Easing::ease_in: return "0.42 0 1 1";
        case Easing::ease_out: return "0 0 0.58 1";
        case Easing::ease_in_out: return "0.42 0 0.58 1";
    }
    return "0 0 1 1";
}

// One SMIL animation spanning the whole video; the first and last values are
// held outside the keyframes, as in the timeline's evaluation rule.
struct Schedule {
    std::string values;
    std::string key_times;
    std::string key_splines;
};

Schedule schedule_for(const std::vector<const Keyframe*>& kfs, double duration,
                      const std::function<std::string(double)>& value) {
    std::vector<std::pair<double, const Keyframe*>> stops;
    if (kfs.front()->time > 0.0) stops.emplace_back(0.0, kfs.front());
    for (const Keyframe* k : kfs) stops.emplace_back(k->time, k);
    if (kfs.back()->time < duration) stops.emplace_back(duration, kfs.back());

    Schedule s;
    for (std::size_t i = 0; i < stops.size(); ++i) {
        const auto& [t, k] = stops[i];
        const char* sep = i == 0 ? "" : ";";
        s.values += sep + value(k->value);
        s.key_times += sep + num(duration > 0 ? t / duration : 0);
        if (i + 1 < stops.size()) {
            // holds before the first and after the last keyframe are flat
            const bool hold = stops[i + 1].second == k;
            s.key_splines += (i == 0 ? "" : ";") + key_spline(hold ? Easing::linear : k->easing);
        }
    }
    return s;
}

std::string animate(const std::string& attribute, const Schedule& s, double duration) {
    return "<animate attributeName=\"" + attribute + "\" begin=\"0s\" dur=\"" + num(duration) +
           "s\" fill=\"freeze\" calcMode=\"spline\" values=\"" + s.values + "\" keyTimes=\"" + s.key_times +
           "\" keySplines=\"" + s.key_splines + "\"/>";
}

std::string animate_transform(const std::string& type, const Schedule& s, double duration) {
    return "<animateTransform attributeName=\"transform\" type=\"" + type + "\" additive=\"sum\" begin=\"0s\" dur=\"" +
           num(duration) + "s\" fill=\"freeze\" calcMode=\"spline\" values=\"" + s.values + "\" keyTimes=\"" +
           s.key_times + "\" keySplines=\"" + s.key_splines + "\"/>";
}

std::string clip_id(const std::string& element) { return "clip-" + element; }

}  // namespace

std::string export_html(const Timeline& timeline, const SvgDoc& svg, const std::string& audio_ref) {
    const double duration = timeline.duration;
    const double width = [&] {
        const auto w = svg.root().attr("width");
        return w ? std::atof(w->c_str()) : 800.0;
    }();
    const double height = [&] {
        const auto h = svg.root().attr("height");
        return h ? std::atof(h->c_str()) : 600.0;
    }();

    std::map<std::string, std::map<Property, std::vector<const Keyframe*>>> by_property;
    for (const auto& [id, track] : timeline.tracks) {
        for (const auto& k : track) by_property[id][k.property].push_back(&k);
    }

    std::string clip_defs;
    SvgDecorator decorate;
    decorate.attributes = [&](const SvgElement& el) {
        std::string out;
        const auto vis = timeline.initial_visibility.find(el.id);
        const bool hidden = vis != timeline.initial_visibility.end() && vis->second == Visibility::hidden;
        const auto props = by_property.find(el.id);
        if (hidden && !el.attr("opacity")) out += " opacity=\"0\"";
        if (props != by_property.end() &&
            (props->second.contains(Property::clip_fraction) || props->second.contains(Property::wheel_fraction))) {
            out += " clip-path=\"url(#" + clip_id(el.id) + ")\"";
        }
        return out;
    };
    decorate.children = [&](const SvgElement& el) {
        std::string out;
        const auto vis = timeline.initial_visibility.find(el.id);
        const bool hidden = vis != timeline.initial_visibility.end() && vis->second == Visibility::hidden;
        const auto props = by_property.find(el.id);
        if (props == by_property.end()) return out;
        double first_time = duration;
        for (const auto& [p, kfs] : props->second) first_time = std::min(first_time, kfs.front()->time);
        if (hidden && !props->second.contains(Property::opacity)) {
            // hidden by scale or clipping alone: reveal once its first keyframe starts
            out += "<set attributeName=\"opacity\" to=\"1\" begin=\"" + num(first_time) + "s\"/>";
        }
        for (const auto& [p, kfs] : props->second) {
            switch (p) {
                case Property::opacity:
                    out += animate("opacity", schedule_for(kfs, duration, num), duration);
                    break;
                case Property::scale:
                    out += animate_transform("scale", schedule_for(kfs, duration, num), duration);
                    break;
                case Property::translate_x:
                    out += animate_transform(
                        "translate", schedule_for(kfs, duration, [](double v) { return num(v) + " 0"; }), duration);
                    break;
                case Property::translate_y:
                    out += animate_transform(
                        "translate", schedule_for(kfs, duration, [](double v) { return "0 " + num(v); }), duration);
                    break;
                case Property::clip_fraction:
                case Property::wheel_fraction: {
                    // both reveal left to right through a clip rectangle that
                    // starts 1000 units left of the origin
                    const auto s = schedule_for(kfs, duration, [&](double v) { return num(1000 + v * width); });
                    clip_defs += "<clipPath id=\"" + clip_id(el.id) +
                                 "\" clipPathUnits=\"userSpaceOnUse\"><rect x=\"-1000\" y=\"-1000\" width=\"0\" height=\"" +
                                 num(height + 2000) + "\">" +
                                 "<animate attributeName=\"width\" begin=\"0s\" dur=\"" + num(duration) +
                                 "s\" fill=\"freeze\" calcMode=\"spline\" values=\"" + s.values + "\" keyTimes=\"" +
                                 s.key_times + "\" keySplines=\"" + s.key_splines + "\"/></rect></clipPath>";
                    break;
                }
            }
        }
        return out;
    };

    std::string chart = serialize_svg(svg, decorate);
    if (!clip_defs.empty()) {
        const auto close = chart.find('>');
        chart.insert(close + 1, "\n<defs>" + clip_defs + "</defs>");
    }

    std::string html;
    html += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Data video</title>\n";
    html += "<style>body{font-family:sans-serif;margin:24px}#chart svg{max-width:100%;height:auto}</style>\n";
    html += "</head>\n<body>\n<div id=\"chart\">\n" + chart + "</div>\n";
    html += "<audio id=\"narration\" controls src=\"" + xml_escape(audio_ref) + "\"></audio>\n";
    html += "<script>\n"
            "const svg = document.querySelector('#chart svg');\n"
            "const audio = document.getElementById('narration');\n"
            "svg.pauseAnimations();\n"
            "svg.setCurrentTime(0);\n"
            "const sync = () => svg.setCurrentTime(audio.currentTime);\n"
            "audio.addEventListener('play', () => { sync(); svg.unpauseAnimations(); });\n"
            "audio.addEventListener('pause', () => { svg.pauseAnimations(); sync(); });\n"
            "audio.addEventListener('seeked', sync);\n"
            "</script>\n</body>\n</html>\n";
    return html;
}

}  // namespace datavideo
