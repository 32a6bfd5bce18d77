#include "datavideo/svg_binding.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <regex>

#include "datavideo/error.hpp"

namespace datavideo {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::mark: return "mark";
        case Role::axis: return "axis";
        case Role::legend: return "legend";
        case Role::title: return "title";
        case Role::annotation: return "annotation";
    }
    return {};
}

std::vector<std::string> MarkIndex::ids_with_role(Role r) const {
    std::vector<std::string> out;
    for (const auto& id : order) {
        if (entries.at(id).roles.contains(r)) out.push_back(id);
    }
    return out;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::set<std::size_t> parse_rows(const SvgElement& el, std::size_t row_count) {
    const auto attr = el.attr("data-row");
    if (!attr) throw Error(Errc::unbound_mark, el.id + " has no data-row attribute");
    std::set<std::size_t> rows;
    std::string_view rest = *attr;
    while (!rest.empty()) {
        const auto semi = rest.find(';');
        const auto token = trim(rest.substr(0, semi));
        rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
        if (token.empty()) continue;
        std::size_t row = 0;
        const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), row);
        if (ec != std::errc{} || end != token.data() + token.size()) {
            throw Error(Errc::unbound_mark, el.id + " has an unreadable data-row '" + *attr + "'");
        }
        if (row >= row_count) {
            throw Error(Errc::unbound_mark, el.id + " refers to row " + std::to_string(row) + " of " +
                                                      std::to_string(row_count));
        }
        rows.insert(row);
    }
    return rows;
}

void add_entry(MarkIndex& index, const std::string& id, Role role) {
    auto [it, inserted] = index.entries.try_emplace(id);
    it->second.roles.insert(role);
    if (inserted) index.order.push_back(id);
}

}  // namespace

MarkIndex index_marks(const SvgDoc& svg, const VisualizationSpec& /*spec*/, const DataTable& table) {
    MarkIndex index;
    for (std::size_t i = 0; i < svg.size(); ++i) {
        const SvgElement& el = svg.at(i);
        if (el.has_class(axis_group_class)) add_entry(index, el.id, Role::axis);
        if (el.has_class(legend_group_class)) add_entry(index, el.id, Role::legend);
        if (el.has_class(title_group_class)) add_entry(index, el.id, Role::title);
        if (el.parent && svg.at(*el.parent).has_class(mark_group_class)) {
            MarkEntry& entry = index.entries[el.id];
            if (entry.roles.empty()) index.order.push_back(el.id);
            entry.roles.insert(Role::mark);
            entry.data_rows = parse_rows(el, table.row_count());
            if (auto series = el.attr("data-series")) entry.series_key = *series;
        }
    }
    return index;
}

void mark_annotations(MarkIndex& index, const std::vector<std::string>& annotation_ids, const SvgDoc& svg) {
    for (const auto& id : annotation_ids) {
        auto [it, inserted] = index.entries.try_emplace(id);
        it->second.roles = {Role::annotation};
        if (inserted) index.order.push_back(id);
    }
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < svg.size(); ++i) position[svg.at(i).id] = i;
    std::stable_sort(index.order.begin(), index.order.end(), [&](const std::string& a, const std::string& b) {
        return position[a] < position[b];
    });
}

namespace {

bool has_word(const std::string& text, std::string_view word) {
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string::npos) {
        const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(text[pos - 1]));
        const std::size_t after = pos + word.size();
        const bool right = after == text.size() || !std::isalnum(static_cast<unsigned char>(text[after]));
        if (left && right) return true;
        ++pos;
    }
    return false;
}

constexpr std::string_view whole_chart_words[] = {"all",  "chart", "line",  "lines",  "bar",    "bars",
                                                  "point", "points", "mark", "marks", "sector", "sectors",
                                                  "slice", "slices", "pie", "dots",  "circles", "data"};

std::set<std::string> resolve_by_text(const std::string& target, const MarkIndex& index) {
    std::set<std::string> out;
    const std::string t = lower(target);
    auto add_role = [&](Role r) {
        for (const auto& id : index.ids_with_role(r)) out.insert(id);
    };
    if (has_word(t, "axis") || has_word(t, "axes")) add_role(Role::axis);
    if (has_word(t, "legend") || has_word(t, "legends")) add_role(Role::legend);
    if (has_word(t, "title")) add_role(Role::title);
    if (!out.empty()) return out;

    for (const auto& id : index.ids_with_role(Role::mark)) {
        const auto& key = index.entries.at(id).series_key;
        if (key && !key->empty() && t.find(lower(*key)) != std::string::npos) out.insert(id);
    }
    if (!out.empty()) return out;

    for (auto word : whole_chart_words) {
        if (has_word(t, word)) {
            add_role(Role::mark);
            break;
        }
    }
    return out;
}

}  // namespace

std::set<std::string> resolve_targets(const AnimationDirective& directive, const MarkIndex& index) {
    std::set<std::string> out;
    if (!directive.index.empty()) {
        for (const auto& id : index.ids_with_role(Role::mark)) {
            const auto& rows = index.entries.at(id).data_rows;
            if (std::any_of(directive.index.begin(), directive.index.end(),
                            [&](std::size_t r) { return rows.contains(r); })) {
                out.insert(id);
            }
        }
    }
    const auto by_text = resolve_by_text(directive.target, index);
    out.insert(by_text.begin(), by_text.end());
    if (out.empty()) {
        throw Error(Errc::unresolved_target, "'" + directive.target + "' (" + std::string(to_string(directive.animation)) +
                                                 " on '" + directive.narration + "')");
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view geometry_attributes[] = {"x",  "y",  "x1",    "y1",     "x2", "y2",        "cx",
                                                    "cy", "r",  "rx",    "ry",     "d",  "transform", "width",
                                                    "height", "points", "class"};

bool is_structural_class(const std::string& c) { return c.starts_with("role-") || c.starts_with("mark-"); }

std::string role_tokens(const SvgElement& el) {
    std::string out;
    for (const auto& c : el.classes()) {
        if (!c.starts_with("role-")) continue;
        if (!out.empty()) out += ' ';
        out += c;
    }
    return out;
}

std::string diff_key(const SvgDoc& doc, std::size_t i) {
    const SvgElement& el = doc.at(i);
    std::string key = el.tag;
    key += '\x1f';
    const auto ancestors = doc.ancestors(i);
    for (auto it = ancestors.rbegin(); it != ancestors.rend(); ++it) {
        const auto roles = role_tokens(doc.at(*it));
        if (!roles.empty()) key += roles + "/";
    }
    key += '\x1f';
    std::vector<std::string> cls;
    for (const auto& c : el.classes()) {
        if (is_structural_class(c)) cls.push_back(c);
    }
    std::sort(cls.begin(), cls.end());
    for (const auto& c : cls) key += c + " ";
    key += '\x1f';
    std::vector<std::pair<std::string, std::string>> attrs;
    for (const auto& a : el.attributes) {
        if (std::find(std::begin(geometry_attributes), std::end(geometry_attributes), a.first) ==
            std::end(geometry_attributes)) {
            attrs.push_back(a);
        }
    }
    std::sort(attrs.begin(), attrs.end());
    for (const auto& [k, v] : attrs) key += k + "=" + v + '\x1e';
    key += '\x1f';
    key += el.text;
    return key;
}

std::vector<std::string> unmatched_ids(const SvgDoc& from, const SvgDoc& against) {
    std::map<std::string, std::size_t> available;
    for (std::size_t i = 0; i < against.size(); ++i) ++available[diff_key(against, i)];
    std::vector<std::string> out;
    for (std::size_t i = 0; i < from.size(); ++i) {
        auto it = available.find(diff_key(from, i));
        if (it != available.end() && it->second > 0) {
            --it->second;
        } else {
            out.push_back(from.at(i).id);
        }
    }
    return out;
}

}  // namespace

AnnotationDiff diff_annotations_detailed(const SvgDoc& base, const SvgDoc& annotated) {
    return AnnotationDiff{unmatched_ids(annotated, base), unmatched_ids(base, annotated)};
}

std::vector<std::string> diff_annotations(const SvgDoc& base, const SvgDoc& annotated) {
    return unmatched_ids(annotated, base);
}

std::vector<std::string> annotation_leaves(const SvgDoc& annotated, const std::vector<std::string>& added) {
    std::vector<std::string> out;
    for (const auto& id : added) {
        const auto i = annotated.find(id);
        if (i && annotated.at(*i).children.empty()) out.push_back(id);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Point {
    double x;
    double y;
};

double number_attr(const SvgElement& el, std::string_view name, double fallback = 0.0) {
    const auto v = el.attr(name);
    if (!v) return fallback;
    double out = fallback;
    const auto t = trim(*v);
    std::from_chars(t.data(), t.data() + t.size(), out);
    return out;
}

std::vector<double> numbers_in(const std::string& text) {
    static const std::regex number(R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)");
    std::vector<double> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), number); it != std::sregex_iterator(); ++it) {
        out.push_back(std::stod(it->str()));
    }
    return out;
}

Point translation(const SvgElement& el) {
    const auto t = el.attr("transform");
    if (!t) return {0, 0};
    const auto pos = t->find("translate(");
    if (pos == std::string::npos) return {0, 0};
    const auto end = t->find(')', pos);
    const auto nums = numbers_in(t->substr(pos + 10, end - pos - 10));
    if (nums.empty()) return {0, 0};
    return {nums[0], nums.size() > 1 ? nums[1] : 0.0};
}

std::vector<Point> anchors(const SvgDoc& doc, std::size_t i) {
    const SvgElement& el = doc.at(i);
    std::vector<Point> pts;
    if (el.tag == "circle" || el.tag == "ellipse") {
        pts.push_back({number_attr(el, "cx"), number_attr(el, "cy")});
    } else if (el.tag == "rect" || el.tag == "image") {
        pts.push_back({number_attr(el, "x") + number_attr(el, "width") / 2,
                       number_attr(el, "y") + number_attr(el, "height") / 2});
    } else if (el.tag == "text") {
        pts.push_back({number_attr(el, "x"), number_attr(el, "y")});
    } else if (el.tag == "line") {
        pts.push_back({number_attr(el, "x1"), number_attr(el, "y1")});
        pts.push_back({number_attr(el, "x2"), number_attr(el, "y2")});
    } else if (el.tag == "path" || el.tag == "polyline" || el.tag == "polygon") {
        const std::string geometry = el.attr(el.tag == "path" ? "d" : "points").value_or("");
        const bool simple = geometry.find_first_of("AaCcQqSsTtHhVv") == std::string::npos;
        const auto nums = numbers_in(geometry);
        for (std::size_t k = 0; k + 1 < nums.size(); k += 2) {
            pts.push_back({nums[k], nums[k + 1]});
            if (!simple) break;
        }
    }
    Point offset = translation(el);
    for (auto a : doc.ancestors(i)) {
        const Point t = translation(doc.at(a));
        offset.x += t.x;
        offset.y += t.y;
    }
    for (auto& p : pts) {
        p.x += offset.x;
        p.y += offset.y;
    }
    return pts;
}

double nearest(const std::vector<Point>& a, const std::vector<Point>& b) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : a) {
        for (const auto& q : b) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
    }
    return best;
}

}  // namespace

AnnotationAssignment match_annotation_directives(const std::vector<std::string>& annotation_ids,
                                                 const std::vector<AnnotationDirective>& directives,
                                                 const MarkIndex& index, const SvgDoc& annotated) {
    AnnotationAssignment out;
    out.per_directive.resize(directives.size());
    if (directives.empty()) {
        for (const auto& id : annotation_ids) {
            out.report.advise("unassigned-annotation", id, "no annotation directive to trigger this element");
        }
        return out;
    }

    // Anchors of the marks bound to each directive's rows; single-row marks
    // locate a row more precisely than a series path does.
    std::vector<std::vector<Point>> directive_anchors(directives.size());
    for (std::size_t d = 0; d < directives.size(); ++d) {
        std::vector<Point> single;
        std::vector<Point> multi;
        for (const auto& id : index.ids_with_role(Role::mark)) {
            const auto& rows = index.entries.at(id).data_rows;
            const bool bound = std::any_of(directives[d].index.begin(), directives[d].index.end(),
                                           [&](std::size_t r) { return rows.contains(r); });
            if (!bound) continue;
            const auto pos = annotated.find(id);
            if (!pos) continue;
            auto pts = anchors(annotated, *pos);
            auto& bucket = rows.size() == 1 ? single : multi;
            bucket.insert(bucket.end(), pts.begin(), pts.end());
        }
        directive_anchors[d] = single.empty() ? std::move(multi) : std::move(single);
    }

    for (const auto& id : annotation_ids) {
        std::optional<std::size_t> chosen;
        const auto entry = index.entries.find(id);
        if (entry != index.entries.end() && !entry->second.data_rows.empty()) {
            std::size_t best = 0;
            for (std::size_t d = 0; d < directives.size(); ++d) {
                const auto shared = static_cast<std::size_t>(
                    std::count_if(directives[d].index.begin(), directives[d].index.end(),
                                  [&](std::size_t r) { return entry->second.data_rows.contains(r); }));
                if (shared > best) {
                    best = shared;
                    chosen = d;
                }
            }
        }
        if (!chosen) {
            const auto pos = annotated.find(id);
            const auto pts = pos ? anchors(annotated, *pos) : std::vector<Point>{};
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t d = 0; d < directives.size(); ++d) {
                const double dist = nearest(pts, directive_anchors[d]);
                if (dist < best) {
                    best = dist;
                    chosen = d;
                }
            }
        }
        out.per_directive[chosen.value_or(0)].push_back(id);
    }

    for (std::size_t d = 0; d < directives.size(); ++d) {
        if (out.per_directive[d].empty()) {
            out.report.advise("annotation-without-elements", "/Annotated_Narration_for_Annotation/" + std::to_string(d),
                              "no annotation element was matched to '" + directives[d].nar + "'");
        }
    }
    return out;
}

Json to_json(const MarkIndex& index) {
    Json entries = Json::array();
    for (const auto& id : index.order) {
        const MarkEntry& e = index.entries.at(id);
        Json roles = Json::array();
        for (auto r : e.roles) roles.push_back(to_string(r));
        Json rows = Json::array();
        for (auto r : e.data_rows) rows.push_back(r);
        Json item{{"id", id}, {"roles", std::move(roles)}, {"data_rows", std::move(rows)}};
        item["series_key"] = e.series_key ? Json(*e.series_key) : Json(nullptr);
        entries.push_back(std::move(item));
    }
    return entries;
}

}  // namespace datavideo
