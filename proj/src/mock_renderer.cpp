#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <regex>
#include <set>

#include "datavideo/error.hpp"
#include "datavideo/media.hpp"
#include "datavideo/svg.hpp"
#include "datavideo/svg_binding.hpp"
#include "datavideo/vega.hpp"

namespace datavideo {

namespace {

[[noreturn]] void reject(const std::string& path, const std::string& what) {
    throw Error(Errc::renderer_rejected_spec, (path.empty() ? std::string("/") : path) + ": " + what);
}

constexpr std::array<const char*, 10> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr const char* default_fill = "#4c78a8";
constexpr double margin_left = 60;
constexpr double margin_top = 50;
constexpr double margin_right = 140;
constexpr double margin_bottom = 50;

std::string fmt(double v) {
    if (std::abs(v) < 0.005) v = 0.0;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string json_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return format_number(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    return v.dump();
}

std::optional<double> json_number(const Json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = trim(v.get_ref<const std::string&>());
        double out = 0;
        const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec == std::errc{} && end == s.data() + s.size() && !s.empty()) return out;
    }
    return std::nullopt;
}

// Days since 1970-01-01 (proleptic Gregorian).
long long days_from_civil(long long y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

std::optional<double> parse_date(const Json& v) {
    if (v.is_number()) return v.get<double>();
    if (!v.is_string()) return std::nullopt;
    const std::string s(trim(v.get_ref<const std::string&>()));
    static const std::regex iso(R"((\d{4})(?:-(\d{1,2})(?:-(\d{1,2}))?)?(?:[T ](\d{1,2}):(\d{2})(?::(\d{2}))?)?Z?)");
    static const std::regex named(R"(([A-Za-z]{3})[a-z]*\.? (\d{1,2}),? (\d{4}))");
    std::smatch m;
    if (std::regex_match(s, m, iso)) {
        const long long y = std::stoll(m[1]);
        const unsigned mo = m[2].matched ? static_cast<unsigned>(std::stoul(m[2])) : 1;
        const unsigned d = m[3].matched ? static_cast<unsigned>(std::stoul(m[3])) : 1;
        double days = static_cast<double>(days_from_civil(y, mo, d));
        if (m[4].matched) days += (std::stod(m[4]) * 3600 + std::stod(m[5]) + (m[6].matched ? std::stod(m[6]) : 0)) / 86400;
        return days;
    }
    if (std::regex_match(s, m, named)) {
        static const std::array<const char*, 12> months = {"jan", "feb", "mar", "apr", "may", "jun",
                                                           "jul", "aug", "sep", "oct", "nov", "dec"};
        std::string mon = m[1];
        for (auto& c : mon) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        for (unsigned i = 0; i < months.size(); ++i) {
            if (mon == months[i]) {
                return static_cast<double>(days_from_civil(std::stoll(m[3]), i + 1, static_cast<unsigned>(std::stoul(m[2]))));
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Data and predicates

struct Datum {
    const Json* row;
    std::optional<std::size_t> index;  // position in the bound table
};

int compare_values(const Json& a, const Json& b) {
    const auto na = json_number(a);
    const auto nb = json_number(b);
    if (na && nb) return *na < *nb ? -1 : (*na > *nb ? 1 : 0);
    const auto sa = json_text(a);
    const auto sb = json_text(b);
    return sa < sb ? -1 : (sa > sb ? 1 : 0);
}

bool values_equal(const Json& a, const Json& b) {
    if (a.is_null() || b.is_null()) return a.is_null() && b.is_null();
    return compare_values(a, b) == 0;
}

const Json& field_of(const Json& row, const std::string& field) {
    static const Json null_value;
    const auto it = row.find(field);
    return it == row.end() ? null_value : *it;
}

Json parse_literal(const std::string& text, const std::string& path) {
    const auto t = std::string(trim(text));
    if (t.size() >= 2 && (t.front() == '\'' || t.front() == '"') && t.back() == t.front()) {
        return Json(t.substr(1, t.size() - 2));
    }
    if (t == "true") return Json(true);
    if (t == "false") return Json(false);
    if (t == "null") return Json(nullptr);
    if (const auto n = json_number(Json(t))) return Json(*n);
    reject(path, "unsupported literal '" + t + "' in filter expression");
}

std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t pos; (pos = s.find(sep, start)) != std::string::npos; start = pos + sep.size()) {
        out.push_back(s.substr(start, pos - start));
    }
    out.push_back(s.substr(start));
    return out;
}

struct Comparison {
    std::string field;
    std::string op;
    Json literal;
};

// Expressions of the form datum.f OP literal joined by && and ||.
std::vector<std::vector<Comparison>> parse_expression(const std::string& expr, const std::string& path) {
    if (expr.find_first_of("()") != std::string::npos) reject(path, "unsupported filter expression '" + expr + "'");
    static const std::regex clause(
        R"(\s*datum(?:\.([A-Za-z_]\w*)|\[\s*['"]([^'"]+)['"]\s*\])\s*(===|==|!==|!=|>=|<=|>|<)\s*(.+?)\s*)");
    std::vector<std::vector<Comparison>> any;
    for (const auto& alternative : split_on(expr, "||")) {
        std::vector<Comparison> all;
        for (const auto& part : split_on(alternative, "&&")) {
            std::smatch m;
            if (!std::regex_match(part, m, clause)) reject(path, "unsupported filter expression '" + expr + "'");
            all.push_back(Comparison{m[1].matched ? m[1].str() : m[2].str(), m[3], parse_literal(m[4], path)});
        }
        any.push_back(std::move(all));
    }
    return any;
}

bool compare(const Json& value, const std::string& op, const Json& literal) {
    if (op == "==" || op == "===") return values_equal(value, literal);
    if (op == "!=" || op == "!==") return !values_equal(value, literal);
    if (value.is_null()) return false;
    const int c = compare_values(value, literal);
    if (op == ">") return c > 0;
    if (op == "<") return c < 0;
    if (op == ">=") return c >= 0;
    return c <= 0;
}

void predicate_fields(const Json& pred, std::set<std::string>& out, const std::string& path) {
    if (pred.is_string()) {
        for (const auto& alt : parse_expression(pred.get<std::string>(), path)) {
            for (const auto& c : alt) out.insert(c.field);
        }
        return;
    }
    if (!pred.is_object()) reject(path, "filter must be an expression or a predicate object");
    for (const char* key : {"and", "or"}) {
        if (pred.contains(key)) {
            for (const auto& p : pred[key]) predicate_fields(p, out, path);
            return;
        }
    }
    if (pred.contains("not")) return predicate_fields(pred["not"], out, path);
    if (!pred.contains("field") || !pred["field"].is_string()) reject(path, "unsupported filter predicate");
    out.insert(pred["field"].get<std::string>());
}

bool test(const Json& pred, const Json& row, const std::string& path) {
    if (pred.is_string()) {
        for (const auto& alt : parse_expression(pred.get<std::string>(), path)) {
            if (std::all_of(alt.begin(), alt.end(),
                            [&](const Comparison& c) { return compare(field_of(row, c.field), c.op, c.literal); })) {
                return true;
            }
        }
        return false;
    }
    if (pred.contains("and")) {
        return std::all_of(pred["and"].begin(), pred["and"].end(), [&](const Json& p) { return test(p, row, path); });
    }
    if (pred.contains("or")) {
        return std::any_of(pred["or"].begin(), pred["or"].end(), [&](const Json& p) { return test(p, row, path); });
    }
    if (pred.contains("not")) return !test(pred["not"], row, path);
    if (pred.contains("timeUnit")) reject(path, "timeUnit predicates are not supported");
    const Json& v = field_of(row, pred["field"].get<std::string>());
    if (pred.contains("equal")) return values_equal(v, pred["equal"]);
    if (pred.contains("oneOf") || pred.contains("in")) {
        const Json& options = pred.contains("oneOf") ? pred["oneOf"] : pred["in"];
        return std::any_of(options.begin(), options.end(), [&](const Json& o) { return values_equal(v, o); });
    }
    if (pred.contains("range")) {
        const Json& r = pred["range"];
        if (!r.is_array() || r.size() != 2) reject(path, "range predicate needs two bounds");
        return !v.is_null() && compare_values(v, r[0]) >= 0 && compare_values(v, r[1]) <= 0;
    }
    if (pred.contains("valid")) return v.is_null() != pred["valid"].get<bool>();
    for (const char* op : {"lt", "lte", "gt", "gte"}) {
        if (pred.contains(op)) {
            const std::string o = std::string(op) == "lt" ? "<" : std::string(op) == "lte" ? "<=" : std::string(op) == "gt" ? ">" : ">=";
            return compare(v, o, pred[op]);
        }
    }
    reject(path, "unsupported filter predicate " + pred.dump());
}

void check_fields(const std::vector<Datum>& data, const std::set<std::string>& fields, const std::string& path) {
    if (data.empty()) return;
    for (const auto& f : fields) {
        const bool present = std::any_of(data.begin(), data.end(), [&](const Datum& d) { return d.row->contains(f); });
        if (!present) reject(path, "field \"" + f + "\" does not exist in the data");
    }
}

std::vector<Datum> apply_transforms(std::vector<Datum> data, const Json& transforms, const std::string& path) {
    if (transforms.is_null()) return data;
    if (!transforms.is_array()) reject(path + "/transform", "must be a list");
    for (std::size_t i = 0; i < transforms.size(); ++i) {
        const Json& t = transforms[i];
        const std::string where = path + "/transform/" + std::to_string(i);
        if (!t.is_object() || !t.contains("filter") || t.size() != 1) {
            reject(where, "only filter transforms are supported by the mock renderer");
        }
        std::set<std::string> fields;
        predicate_fields(t["filter"], fields, where);
        check_fields(data, fields, where);
        std::erase_if(data, [&](const Datum& d) { return !test(t["filter"], *d.row, where); });
    }
    return data;
}

// ---------------------------------------------------------------------------
// Views

struct View {
    Json mark;
    std::string type;
    Json encoding;
    std::vector<Datum> data;
    std::string path;
    bool inline_data = false;
};

std::vector<Datum> inline_rows(const Json& data, const std::string& path, bool bound) {
    if (!data.is_object() || !data.contains("values") || !data["values"].is_array()) {
        reject(path + "/data", "only inline \"values\" data is supported");
    }
    std::vector<Datum> out;
    const Json& values = data["values"];
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].is_object()) reject(path + "/data", "data values must be objects");
        out.push_back(Datum{&values[i], bound ? std::optional<std::size_t>(i) : std::nullopt});
    }
    return out;
}

Json merge_encoding(const Json& parent, const Json& own) {
    Json out = parent.is_object() ? parent : Json::object();
    if (own.is_object()) {
        for (const auto& [k, v] : own.items()) out[k] = v;
    }
    return out;
}

void collect_views(const Json& spec, const std::vector<Datum>& data, bool inline_data, const Json& encoding,
                   const std::string& path, std::vector<View>& out) {
    if (!spec.is_object()) reject(path, "view must be an object");
    for (const char* key : {"hconcat", "vconcat", "concat", "facet", "repeat"}) {
        if (spec.contains(key)) reject(path, std::string("composition \"") + key + "\" is not supported");
    }
    std::vector<Datum> rows = data;
    bool is_inline = inline_data;
    if (spec.contains("data") && !path.empty()) {
        rows = inline_rows(spec["data"], path, false);
        is_inline = true;
    }
    rows = apply_transforms(std::move(rows), spec.contains("transform") ? spec["transform"] : Json(), path);
    const Json enc = merge_encoding(encoding, spec.contains("encoding") ? spec["encoding"] : Json());
    if (spec.contains("layer")) {
        for (std::size_t i = 0; i < spec["layer"].size(); ++i) {
            collect_views(spec["layer"][i], rows, is_inline, enc, path + "/layer/" + std::to_string(i), out);
        }
        return;
    }
    const std::string type = vega::mark_type(spec);
    if (type.empty()) reject(path + "/mark", "missing mark type");
    out.push_back(View{spec["mark"], type, enc, std::move(rows), path, is_inline});
}

std::optional<std::string> channel_field(const View& v, const char* channel) {
    if (!v.encoding.contains(channel)) return std::nullopt;
    const Json& def = v.encoding[channel];
    if (!def.is_object()) return std::nullopt;
    if (def.contains("aggregate") || def.contains("bin")) {
        reject(v.path + "/encoding/" + channel, "aggregate and bin are not supported by the mock renderer");
    }
    if (!def.contains("field")) return std::nullopt;
    if (!def["field"].is_string()) reject(v.path + "/encoding/" + channel, "field must be a string");
    return def["field"].get<std::string>();
}

// ---------------------------------------------------------------------------
// Scales

struct Scale {
    enum class Kind { none, linear, temporal, band } kind = Kind::none;
    double lo = 0;
    double hi = 1;
    std::vector<std::string> categories;
    double range0 = 0;
    double range1 = 1;
    std::string title;

    double value_of(const Json& v) const {
        if (kind == Kind::temporal) return parse_date(v).value_or(lo);
        return json_number(v).value_or(lo);
    }

    double map(const Json& v) const {
        if (kind == Kind::band) {
            const auto it = std::find(categories.begin(), categories.end(), json_text(v));
            const double n = static_cast<double>(std::max<std::size_t>(categories.size(), 1));
            const double k = it == categories.end() ? 0.0 : static_cast<double>(it - categories.begin());
            return range0 + (range1 - range0) * (k + 0.5) / n;
        }
        const double x = value_of(v);
        return range0 + (range1 - range0) * (x - lo) / (hi - lo);
    }

    double bandwidth() const {
        const double n = static_cast<double>(std::max<std::size_t>(categories.size(), 1));
        return std::abs(range1 - range0) / n * 0.8;
    }

    // (position, label) pairs
    std::vector<std::pair<double, std::string>> ticks() const {
        std::vector<std::pair<double, std::string>> out;
        if (kind == Kind::band) {
            for (const auto& c : categories) out.emplace_back(map(Json(c)), c);
        } else if (kind == Kind::linear) {
            const double raw = (hi - lo) / 5;
            const double mag = std::pow(10.0, std::floor(std::log10(raw)));
            double step = mag;
            for (double m : {1.0, 2.0, 5.0, 10.0}) {
                step = m * mag;
                if (step >= raw) break;
            }
            for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + step * 1e-9; t += step) {
                const double v = std::abs(t) < step * 1e-9 ? 0.0 : t;
                out.emplace_back(map(Json(v)), format_number(std::round(v * 1e6) / 1e6));
            }
        } else if (kind == Kind::temporal) {
            for (const auto& c : categories) out.emplace_back(map(Json(c)), c);
        }
        return out;
    }
};

Scale build_position_scale(const std::vector<View>& views, const char* channel, double range0, double range1) {
    Scale s;
    s.range0 = range0;
    s.range1 = range1;
    std::vector<const Json*> values;
    std::string type;
    bool zero = false;
    for (const auto& v : views) {
        if (!v.encoding.contains(channel) || !v.encoding[channel].is_object()) continue;
        const Json& def = v.encoding[channel];
        if (type.empty() && def.contains("type") && def["type"].is_string()) type = def["type"].get<std::string>();
        if (def.contains("timeUnit") && type.empty()) type = "temporal";
        if (const auto f = channel_field(v, channel)) {
            if (s.title.empty()) s.title = def.contains("title") && def["title"].is_string() ? def["title"].get<std::string>() : *f;
            for (const auto& d : v.data) values.push_back(&field_of(*d.row, *f));
        } else if (def.contains("datum")) {
            values.push_back(&def["datum"]);
        }
        if (v.type == "bar" || v.type == "area") zero = true;
    }
    if (values.empty()) return s;
    if (type.empty()) {
        const bool numeric = std::all_of(values.begin(), values.end(),
                                         [](const Json* j) { return j->is_null() || json_number(*j).has_value(); });
        type = numeric ? "quantitative" : "nominal";
    }
    if (type == "nominal" || type == "ordinal") {
        s.kind = Scale::Kind::band;
        for (const Json* j : values) {
            if (j->is_null()) continue;
            const auto t = json_text(*j);
            if (std::find(s.categories.begin(), s.categories.end(), t) == s.categories.end()) s.categories.push_back(t);
        }
        return s;
    }
    s.kind = type == "temporal" ? Scale::Kind::temporal : Scale::Kind::linear;
    bool first = true;
    std::vector<std::pair<double, std::string>> seen;
    for (const Json* j : values) {
        if (j->is_null()) continue;
        const auto x = s.kind == Scale::Kind::temporal ? parse_date(*j) : json_number(*j);
        if (!x) reject("/encoding/" + std::string(channel), "value " + j->dump() + " does not fit a " + type + " scale");
        if (first) {
            s.lo = s.hi = *x;
            first = false;
        }
        s.lo = std::min(s.lo, *x);
        s.hi = std::max(s.hi, *x);
        if (s.kind == Scale::Kind::temporal) seen.emplace_back(*x, json_text(*j));
    }
    if (zero && s.kind == Scale::Kind::linear) {
        s.lo = std::min(s.lo, 0.0);
        s.hi = std::max(s.hi, 0.0);
    }
    if (s.hi == s.lo) {
        s.lo -= 1;
        s.hi += 1;
    }
    if (s.kind == Scale::Kind::temporal) {
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
                   seen.end());
        const std::size_t n = seen.size();
        const std::size_t want = std::min<std::size_t>(n, 6);
        for (std::size_t k = 0; k < want; ++k) {
            const std::size_t i = want == 1 ? 0 : k * (n - 1) / (want - 1);
            s.categories.push_back(seen[i].second);
        }
    }
    return s;
}

struct ColorScale {
    std::vector<std::string> domain;
    std::string title;

    std::string color(const std::string& v) const {
        const auto it = std::find(domain.begin(), domain.end(), v);
        return it == domain.end() ? default_fill : palette[static_cast<std::size_t>(it - domain.begin()) % palette.size()];
    }
};

ColorScale build_color_scale(const std::vector<View>& views) {
    ColorScale c;
    for (const auto& v : views) {
        const auto f = channel_field(v, "color");
        if (!f) continue;
        if (c.title.empty()) c.title = *f;
        for (const auto& d : v.data) {
            const Json& val = field_of(*d.row, *f);
            if (val.is_null()) continue;
            const auto t = json_text(val);
            if (std::find(c.domain.begin(), c.domain.end(), t) == c.domain.end()) c.domain.push_back(t);
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Drawing

struct Canvas {
    double width;
    double height;
    Scale x;
    Scale y;
    ColorScale color;
};

std::string rows_attr(const std::vector<const Datum*>& data) {
    std::string out;
    for (const Datum* d : data) {
        if (!d->index) continue;
        if (!out.empty()) out += ';';
        out += std::to_string(*d->index);
    }
    return out;
}

std::string attr(const char* name, const std::string& value) { return std::string(" ") + name + "=\"" + xml_escape(value) + "\""; }

const Json* mark_prop(const View& v, const char* key) {
    if (v.mark.is_object() && v.mark.contains(key)) return &v.mark[key];
    return nullptr;
}

double mark_number(const View& v, const char* key, double fallback) {
    const Json* p = mark_prop(v, key);
    return p && p->is_number() ? p->get<double>() : fallback;
}

class Drawer {
public:
    Drawer(const Canvas& canvas, std::string& out) : c_(canvas), out_(out) {}

    void draw(const View& v) {
        const std::set<std::string> supported = {"bar",  "line", "area", "point", "circle", "square",
                                                 "arc",  "text", "rule", "tick",  "rect"};
        if (!supported.contains(v.type)) reject(v.path + "/mark", "mark type \"" + v.type + "\" is not supported");
        std::set<std::string> fields;
        for (const auto& [channel, def] : v.encoding.items()) {
            if (channel == "tooltip" || channel == "href") continue;
            if (const auto f = channel_field(v, channel.c_str())) fields.insert(*f);
        }
        check_fields(v.data, fields, v.path + "/encoding");

        if (v.type == "line" || v.type == "area") {
            draw_series(v);
            const Json* point = mark_prop(v, "point");
            if (v.type == "line" && point && ((point->is_boolean() && point->get<bool>()) || point->is_object())) {
                draw_points(v, "mark-symbol");
            }
        } else if (v.type == "arc") {
            draw_arcs(v);
        } else if (v.type == "point" || v.type == "circle" || v.type == "square") {
            draw_points(v, "mark-symbol");
        } else if (v.type == "text") {
            draw_text(v);
        } else if (v.type == "rule") {
            draw_rules(v);
        } else {
            draw_bars(v);
        }
    }

private:
    std::optional<double> position(const View& v, const char* channel, const Scale& s, const Json& row) const {
        if (!v.encoding.contains(channel) || !v.encoding[channel].is_object()) return std::nullopt;
        const Json& def = v.encoding[channel];
        if (def.contains("value") && def["value"].is_number()) return def["value"].get<double>();
        if (def.contains("datum")) return s.map(def["datum"]);
        if (const auto f = channel_field(v, channel)) {
            const Json& val = field_of(row, *f);
            if (val.is_null()) return std::nullopt;
            return s.map(val);
        }
        return std::nullopt;
    }

    std::string fill(const View& v, const Json& row) const {
        if (v.encoding.contains("color") && v.encoding["color"].is_object()) {
            const Json& def = v.encoding["color"];
            if (def.contains("value") && def["value"].is_string()) return def["value"].get<std::string>();
            if (const auto f = channel_field(v, "color")) return c_.color.color(json_text(field_of(row, *f)));
        }
        if (const Json* p = mark_prop(v, "color"); p && p->is_string()) return p->get<std::string>();
        return default_fill;
    }

    std::optional<std::string> series(const View& v, const Json& row) const {
        for (const char* channel : {"color", "detail"}) {
            if (const auto f = channel_field(v, channel)) return json_text(field_of(row, *f));
        }
        return std::nullopt;
    }

    std::string item_meta(const std::vector<const Datum*>& data, const std::optional<std::string>& s) const {
        std::string out = attr("data-row", rows_attr(data));
        if (s) out += attr("data-series", *s);
        return out;
    }

    void open_group(const std::string& mark_class) { out_ += "<g" + attr("class", "role-mark " + mark_class) + ">"; }
    void close_group() { out_ += "</g>"; }

    void draw_series(const View& v) {
        std::vector<std::pair<std::optional<std::string>, std::vector<const Datum*>>> groups;
        for (const auto& d : v.data) {
            const auto key = series(v, *d.row);
            auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
            if (it == groups.end()) {
                groups.push_back({key, {}});
                it = std::prev(groups.end());
            }
            it->second.push_back(&d);
        }
        open_group(v.type == "line" ? "mark-line" : "mark-area");
        for (auto& [key, data] : groups) {
            std::vector<std::pair<double, double>> pts;
            for (const Datum* d : data) {
                const auto x = position(v, "x", c_.x, *d->row);
                const auto y = position(v, "y", c_.y, *d->row);
                if (x && y) pts.emplace_back(*x, *y);
            }
            std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            std::string path;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                path += (i == 0 ? "M" : "L") + fmt(pts[i].first) + "," + fmt(pts[i].second);
            }
            const std::string color = data.empty() ? default_fill : fill(v, *data.front()->row);
            if (v.type == "area" && !pts.empty()) {
                path += "L" + fmt(pts.back().first) + "," + fmt(c_.height) + "L" + fmt(pts.front().first) + "," +
                        fmt(c_.height) + "Z";
                out_ += "<path" + attr("d", path) + attr("fill", color) + attr("fill-opacity", "0.7") +
                        item_meta(data, key) + "/>";
            } else {
                out_ += "<path" + attr("d", path) + attr("fill", "none") + attr("stroke", color) +
                        attr("stroke-width", fmt(mark_number(v, "strokeWidth", 2))) + item_meta(data, key) + "/>";
            }
        }
        close_group();
    }

    void draw_points(const View& v, const std::string& mark_class) {
        const double size = mark_number(v, "size", 30);
        const double r = std::sqrt(size / std::numbers::pi);
        const Json* filled = mark_prop(v, "filled");
        const bool solid = v.type != "point" || (filled && filled->is_boolean() && filled->get<bool>()) ||
                           (mark_prop(v, "point") != nullptr);
        open_group(mark_class);
        for (const auto& d : v.data) {
            const double x = position(v, "x", c_.x, *d.row).value_or(c_.width / 2);
            const double y = position(v, "y", c_.y, *d.row).value_or(c_.height / 2);
            const std::string color = fill(v, *d.row);
            out_ += "<circle" + attr("cx", fmt(x)) + attr("cy", fmt(y)) + attr("r", fmt(r)) +
                    attr("fill", solid ? color : "none") + attr("stroke", color) + item_meta({&d}, series(v, *d.row)) +
                    "/>";
        }
        close_group();
    }

    void draw_bars(const View& v) {
        open_group("mark-" + v.type);
        for (const auto& d : v.data) {
            double x0, x1, y0, y1;
            const auto px = position(v, "x", c_.x, *d.row);
            const auto py = position(v, "y", c_.y, *d.row);
            if (c_.x.kind == Scale::Kind::band) {
                const double w = c_.x.bandwidth();
                x0 = px.value_or(c_.width / 2) - w / 2;
                x1 = x0 + w;
                y0 = py.value_or(0);
                y1 = c_.y.kind == Scale::Kind::linear ? c_.y.map(Json(0.0)) : c_.height;
            } else if (c_.y.kind == Scale::Kind::band) {
                const double h = c_.y.bandwidth();
                y0 = py.value_or(c_.height / 2) - h / 2;
                y1 = y0 + h;
                x0 = c_.x.kind == Scale::Kind::linear ? c_.x.map(Json(0.0)) : 0;
                x1 = px.value_or(0);
            } else {
                x0 = px.value_or(c_.width / 2) - 2;
                x1 = x0 + 4;
                y0 = py.value_or(c_.height / 2);
                y1 = c_.y.kind == Scale::Kind::linear ? c_.y.map(Json(std::max(0.0, c_.y.lo))) : c_.height;
            }
            out_ += "<rect" + attr("x", fmt(std::min(x0, x1))) + attr("y", fmt(std::min(y0, y1))) +
                    attr("width", fmt(std::abs(x1 - x0))) + attr("height", fmt(std::abs(y1 - y0))) +
                    attr("fill", fill(v, *d.row)) + item_meta({&d}, series(v, *d.row)) + "/>";
        }
        close_group();
    }

    void draw_text(const View& v) {
        const double dx = mark_number(v, "dx", 0);
        const double dy = mark_number(v, "dy", 0);
        std::string anchor = "middle";
        if (const Json* a = mark_prop(v, "align"); a && a->is_string()) {
            anchor = a->get<std::string>() == "left" ? "start" : a->get<std::string>() == "right" ? "end" : "middle";
        }
        const auto pie = pie_angles(v);
        open_group("mark-text");
        for (std::size_t i = 0; i < v.data.size(); ++i) {
            const Datum& d = v.data[i];
            double x = position(v, "x", c_.x, *d.row).value_or(c_.width / 2);
            double y = position(v, "y", c_.y, *d.row).value_or(c_.height / 2);
            if (!pie.empty()) {
                const double radius = mark_number(v, "radius", pie_radius() * 0.7);
                const double mid = (pie[i].first + pie[i].second) / 2;
                x = c_.width / 2 + radius * std::sin(mid);
                y = c_.height / 2 - radius * std::cos(mid);
            }
            std::string label;
            if (v.encoding.contains("text") && v.encoding["text"].is_object()) {
                const Json& def = v.encoding["text"];
                if (const auto f = channel_field(v, "text")) {
                    label = json_text(field_of(*d.row, *f));
                } else if (def.contains("value")) {
                    label = json_text(def["value"]);
                }
            } else if (const Json* t = mark_prop(v, "text")) {
                label = json_text(*t);
            }
            std::string color = "#333333";
            if (v.encoding.contains("color")) color = fill(v, *d.row);
            out_ += "<text" + attr("x", fmt(x + dx)) + attr("y", fmt(y + dy)) + attr("text-anchor", anchor) +
                    attr("font-size", fmt(mark_number(v, "fontSize", 11))) + attr("fill", color) +
                    item_meta({&d}, series(v, *d.row)) + ">" + xml_escape(label) + "</text>";
        }
        close_group();
    }

    void draw_rules(const View& v) {
        open_group("mark-rule");
        auto one = [&](const Json& row, const std::vector<const Datum*>& data, const std::optional<std::string>& s) {
            const auto px = position(v, "x", c_.x, row);
            const auto py = position(v, "y", c_.y, row);
            const auto px2 = position(v, "x2", c_.x, row);
            const auto py2 = position(v, "y2", c_.y, row);
            double x1 = 0, x2 = c_.width, y1 = 0, y2 = c_.height;
            if (px && !py) {
                x1 = x2 = *px;
            } else if (py && !px) {
                y1 = y2 = *py;
            } else if (px && py) {
                x1 = *px;
                y1 = *py;
                x2 = px2.value_or(*px);
                y2 = py2.value_or(*py);
            }
            out_ += "<line" + attr("x1", fmt(x1)) + attr("y1", fmt(y1)) + attr("x2", fmt(x2)) + attr("y2", fmt(y2)) +
                    attr("stroke", fill(v, row)) + attr("stroke-dasharray", "4,2") + item_meta(data, s) + "/>";
        };
        const bool constant = !channel_field(v, "x") && !channel_field(v, "y");
        if (constant || v.data.empty()) {
            one(Json::object(), {}, std::nullopt);
        } else {
            for (const auto& d : v.data) one(*d.row, {&d}, series(v, *d.row));
        }
        close_group();
    }

    double pie_radius() const { return std::min(c_.width, c_.height) / 2 - 10; }

    // Angular extent of each datum, stacked by color domain then data order.
    std::vector<std::pair<double, double>> pie_angles(const View& v) const {
        const auto theta = channel_field(v, "theta");
        if (!theta) return {};
        std::vector<std::size_t> order(v.data.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (const auto color = channel_field(v, "color")) {
            auto rank = [&](std::size_t i) {
                const auto t = json_text(field_of(*v.data[i].row, *color));
                const auto it = std::find(c_.color.domain.begin(), c_.color.domain.end(), t);
                return it - c_.color.domain.begin();
            };
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });
        }
        double total = 0;
        for (const auto& d : v.data) total += std::max(0.0, json_number(field_of(*d.row, *theta)).value_or(0));
        std::vector<std::pair<double, double>> out(v.data.size());
        double at = 0;
        for (std::size_t i : order) {
            const double share = total > 0 ? std::max(0.0, json_number(field_of(*v.data[i].row, *theta)).value_or(0)) / total : 0;
            out[i] = {at, at + share * 2 * std::numbers::pi};
            at = out[i].second;
        }
        return out;
    }

    void draw_arcs(const View& v) {
        const auto angles = pie_angles(v);
        if (angles.empty()) reject(v.path + "/encoding", "arc marks need a theta field");
        const double r = mark_number(v, "outerRadius", pie_radius());
        const double inner = mark_number(v, "innerRadius", 0);
        const double cx = c_.width / 2;
        const double cy = c_.height / 2;
        std::vector<std::pair<std::optional<std::string>, std::vector<std::size_t>>> groups;
        for (std::size_t i = 0; i < v.data.size(); ++i) {
            const auto key = channel_field(v, "color") ? series(v, *v.data[i].row) : std::optional<std::string>{};
            auto it = key ? std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; })
                          : groups.end();
            if (it == groups.end()) {
                groups.push_back({key, {}});
                it = std::prev(groups.end());
            }
            it->second.push_back(i);
        }
        auto point = [&](double radius, double a) {
            return fmt(cx + radius * std::sin(a)) + "," + fmt(cy - radius * std::cos(a));
        };
        open_group("mark-arc");
        for (const auto& [key, members] : groups) {
            double a0 = 2 * std::numbers::pi;
            double a1 = 0;
            std::vector<const Datum*> data;
            for (auto i : members) {
                a0 = std::min(a0, angles[i].first);
                a1 = std::max(a1, angles[i].second);
                data.push_back(&v.data[i]);
            }
            const int large = a1 - a0 > std::numbers::pi ? 1 : 0;
            std::string d = "M" + point(inner, a0) + "L" + point(r, a0) + "A" + fmt(r) + "," + fmt(r) + " 0 " +
                            std::to_string(large) + " 1 " + point(r, a1) + "L" + point(inner, a1) + "Z";
            out_ += "<path" + attr("d", d) + attr("fill", fill(v, *data.front()->row)) + attr("stroke", "#ffffff") +
                    item_meta(data, key) + "/>";
        }
        close_group();
    }

    const Canvas& c_;
    std::string& out_;
};

void draw_axis(std::string& out, const Scale& s, bool horizontal, const Canvas& c) {
    if (s.kind == Scale::Kind::none) return;
    if (horizontal) {
        out += "<g class=\"role-axis axis-x\" transform=\"translate(0," + fmt(c.height) + ")\">";
        out += "<line x1=\"0\" y1=\"0\" x2=\"" + fmt(c.width) + "\" y2=\"0\" stroke=\"#888888\"/>";
        for (const auto& [pos, label] : s.ticks()) {
            out += "<g class=\"tick\" transform=\"translate(" + fmt(pos) + ",0)\"><line y2=\"5\" stroke=\"#888888\"/>"
                   "<text y=\"18\" text-anchor=\"middle\" font-size=\"10\">" +
                   xml_escape(label) + "</text></g>";
        }
        out += "<text class=\"axis-title\" x=\"" + fmt(c.width / 2) + "\" y=\"38\" text-anchor=\"middle\" font-size=\"11\">" +
               xml_escape(s.title) + "</text></g>";
    } else {
        out += "<g class=\"role-axis axis-y\">";
        out += "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"" + fmt(c.height) + "\" stroke=\"#888888\"/>";
        for (const auto& [pos, label] : s.ticks()) {
            out += "<g class=\"tick\" transform=\"translate(0," + fmt(pos) + ")\"><line x2=\"-5\" stroke=\"#888888\"/>"
                   "<text x=\"-8\" y=\"3\" text-anchor=\"end\" font-size=\"10\">" +
                   xml_escape(label) + "</text></g>";
        }
        out += "<text class=\"axis-title\" transform=\"rotate(-90)\" x=\"" + fmt(-c.height / 2) +
               "\" y=\"-45\" text-anchor=\"middle\" font-size=\"11\">" + xml_escape(s.title) + "</text></g>";
    }
}

}  // namespace

std::string MockRenderer::render(const Json& spec) {
    if (!spec.is_object()) reject("", "spec must be a JSON object");
    std::vector<Datum> rows;
    if (spec.contains("data")) rows = inline_rows(spec["data"], "", true);
    std::vector<View> views;
    collect_views(spec, rows, false, Json::object(), "", views);

    Canvas c;
    c.width = spec.contains("width") && spec["width"].is_number() ? spec["width"].get<double>() : 400;
    c.height = spec.contains("height") && spec["height"].is_number() ? spec["height"].get<double>() : 300;
    c.x = build_position_scale(views, "x", 0, c.width);
    c.y = build_position_scale(views, "y", c.height, 0);
    c.color = build_color_scale(views);

    const double total_w = margin_left + c.width + margin_right;
    const double total_h = margin_top + c.height + margin_bottom;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(total_w) + "\" height=\"" +
                      fmt(total_h) + "\" viewBox=\"0 0 " + fmt(total_w) + " " + fmt(total_h) + "\">";
    out += "<rect class=\"background\" width=\"" + fmt(total_w) + "\" height=\"" + fmt(total_h) + "\" fill=\"#ffffff\"/>";
    if (const auto title = vega::title_text(spec); !title.empty()) {
        out += "<g class=\"role-title\"><text x=\"" + fmt(total_w / 2) +
               "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\" font-weight=\"bold\">" + xml_escape(title) +
               "</text></g>";
    }
    out += "<g class=\"plot\" transform=\"translate(" + fmt(margin_left) + "," + fmt(margin_top) + ")\">";
    draw_axis(out, c.x, true, c);
    draw_axis(out, c.y, false, c);
    Drawer drawer(c, out);
    for (const auto& v : views) drawer.draw(v);
    out += "</g>";
    if (!c.color.domain.empty()) {
        out += "<g class=\"role-legend\" transform=\"translate(" + fmt(margin_left + c.width + 20) + "," +
               fmt(margin_top) + ")\">";
        out += "<text class=\"legend-title\" x=\"0\" y=\"-8\" font-size=\"11\">" + xml_escape(c.color.title) + "</text>";
        for (std::size_t i = 0; i < c.color.domain.size(); ++i) {
            const auto& value = c.color.domain[i];
            out += "<g class=\"legend-entry\" transform=\"translate(0," + fmt(static_cast<double>(i) * 20) +
                   ")\"><circle cx=\"5\" cy=\"5\" r=\"5\" fill=\"" + c.color.color(value) +
                   "\"/><text x=\"15\" y=\"9\" font-size=\"11\">" + xml_escape(value) + "</text></g>";
        }
        out += "</g>";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace datavideo
