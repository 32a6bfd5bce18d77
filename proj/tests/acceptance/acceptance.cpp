// Runs the eight acceptance criteria and prints one line per criterion.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "contract_fixtures.hpp"
#include "datavideo/agent_runtime.hpp"
#include "datavideo/analyst.hpp"
#include "datavideo/designer.hpp"
#include "datavideo/hashing.hpp"
#include "datavideo/ingest.hpp"
#include "datavideo/pipeline.hpp"
#include "datavideo/prompts.hpp"
#include "datavideo/svg.hpp"
#include "datavideo/svg_binding.hpp"
#include "datavideo/timeline.hpp"
#include "generators.hpp"
#include "json_fuzz.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace datavideo;
using namespace testing_support;

namespace {

// Collects failed expectations of one criterion.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        ++count_;
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    bool passed() const { return failed_ == 0; }
    std::string summary() const {
        std::ostringstream out;
        out << failed_ << "/" << count_ << " checks failed";
        for (const auto& f : failures_) out << "\n      - " << f;
        return out.str();
    }
    int count() const { return count_; }

private:
    int count_ = 0;
    int failed_ = 0;
    std::vector<std::string> failures_;
};

std::string replace_first(std::string text, const std::string& needle, const std::string& with) {
    const auto pos = text.find(needle);
    if (pos != std::string::npos) text.replace(pos, needle.size(), with);
    return text;
}

// ---------------------------------------------------------------------------

void prompt_fidelity(Checks& c) {
    const DataTable table = parse_csv("quarter,units\nQ1,120\nQ2,135\nQ3,128\n", "Quarterly widget sales");
    const std::string table_text = render_table_text(table);
    struct Case {
        TemplateId id;
        const char* golden;
        const char* anchor;
    };
    for (const Case& k : {Case{TemplateId::description, "description_prompt.golden", "Give a short and consistent description"},
                          Case{TemplateId::analyst, "analyst_prompt.golden", "You are a data analyst."},
                          Case{TemplateId::designer, "designer_prompt.golden", "You are a data video designer."}}) {
        const std::string golden = read_file(golden_dir() / k.golden);
        c.expect(std::string(template_text(k.id)) == golden, std::string(k.golden) + ": stored template differs");

        std::string rendered, reblanked;
        if (k.id == TemplateId::description) {
            rendered = build_description_prompt(table).text;
            reblanked = replace_first(replace_first(rendered, table.title(), "{{title}}"), table_text, "{{table}}");
        } else if (k.id == TemplateId::analyst) {
            const DataDescription d{"Units sold per quarter."};
            rendered = build_analyst_prompt(d, table).text;
            reblanked = replace_first(replace_first(rendered, d.text, "{{description}}"), table_text, "{{table}}");
        } else {
            const VisualizationSpec vis{Json::parse(R"({"mark":"bar","encoding":{"x":{"field":"quarter"}}})"),
                                        VisualizationType::bar};
            const std::string narration = "Units peaked in Q2.";
            rendered = build_designer_prompt(vis, narration, table).text;
            reblanked = replace_first(replace_first(replace_first(rendered, vis.spec.dump(), "{{visualization}}"),
                                                    narration, "{{narration}}"),
                                      table_text, "{{table}}");
        }
        c.expect(reblanked == golden, std::string(k.golden) + ": re-blanked prompt differs");
        c.expect(rendered.find(k.anchor) != std::string::npos, std::string(k.golden) + ": anchor line missing");
    }
}

void contract_parsing(Checks& c) {
    const auto fixtures = contract_fixtures();
    c.expect(fixtures.size() >= 30, "fewer than 30 fixtures");
    for (const auto& f : fixtures) {
        const auto got = parse_outcome(f);
        c.expect(got == f.expected, f.name + ": got " + (got ? std::string(errc_name(*got)) : "ok"));
    }

    Rng rng(2024);
    for (int i = 0; i < 50; ++i) {
        const FuzzReply reply = random_reply(rng);
        const auto expected = brute_force_extract(reply.text);
        try {
            const Json got = extract_json(reply.text);
            c.expect(expected && nlohmann::json::parse(got.dump()) == *expected, "fuzz " + std::to_string(i) + ": value differs");
        } catch (const Error& e) {
            c.expect(!expected && (e.code() == Errc::malformed_json || e.code() == Errc::no_json_found),
                     "fuzz " + std::to_string(i) + ": unexpected " + std::string(errc_name(e.code())));
        }
    }
}

std::set<std::string> violation_codes(const ValidationReport& r) {
    std::set<std::string> codes;
    for (const auto& v : r.violations) codes.insert(v.code);
    return codes;
}

void animation_legality(Checks& c) {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const Script s = clean_script(rng);
        const auto report = validate_animation_sequence(s.directives, s.narration);
        c.expect(report.passing(), "false positive on clean script: " + s.narration);
    }
    for (LegalityRule rule : {LegalityRule::axes_position, LegalityRule::before_entrance, LegalityRule::after_exit,
                              LegalityRule::verbatim_segment}) {
        for (int i = 0; i < 25; ++i) {
            const Script s = violating_script(rng, rule);
            const auto codes = violation_codes(validate_animation_sequence(s.directives, s.narration));
            c.expect(codes == std::set<std::string>{rule_code(rule)},
                     std::string(rule_code(rule)) + ": reported " + std::to_string(codes.size()) + " code(s) on " +
                         s.narration);
        }
    }
}

// All occurrences of the whitespace-normalized needle, by trying every raw
// substring; the answer is the earliest one starting at or after cursor.
std::optional<Span> brute_force_locate(const std::string& text, const std::string& segment, std::size_t cursor) {
    auto space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v'; };
    auto collapse = [&](std::string_view s) {
        std::string out;
        for (char ch : s) {
            if (space(ch)) {
                if (!out.empty() && out.back() == ' ') continue;
                out += ' ';
            } else {
                out += ch;
            }
        }
        return out;
    };
    std::size_t b = 0, e = segment.size();
    while (b < e && space(segment[b])) ++b;
    while (e > b && space(segment[e - 1])) --e;
    const std::string needle = collapse(std::string_view(segment).substr(b, e - b));
    if (needle.empty()) return std::nullopt;
    for (std::size_t s = cursor; s < text.size(); ++s) {
        if (space(text[s])) continue;
        for (std::size_t t = s + 1; t <= text.size(); ++t) {
            if (space(text[t - 1])) continue;
            if (collapse(std::string_view(text).substr(s, t - s)) == needle) return Span{s, t};
        }
    }
    return std::nullopt;
}

void segment_alignment(Checks& c) {
    Rng rng(99);
    const std::vector<std::string> words = {"a", "ab", "b", "ba", "aab", "bb"};
    const std::vector<std::string> gaps = {" ", "  ", "\t", "\n", " \n "};
    for (int i = 0; i < 1000; ++i) {
        std::string text = rng.chance(0.2) ? " " : "";
        const int n = rng.uniform(1, 10);
        for (int w = 0; w < n; ++w) text += rng.pick(words) + (w + 1 < n || rng.chance(0.2) ? rng.pick(gaps) : "");
        std::string segment;
        if (rng.chance(0.65)) {
            const auto a = rng.index(text.size());
            const auto len = 1 + rng.index(text.size() - a);
            for (char ch : text.substr(a, len)) segment += (ch == ' ' && rng.chance(0.3)) ? std::string("\t ") : std::string(1, ch);
        } else {
            const int m = rng.uniform(1, 3);
            for (int w = 0; w < m; ++w) segment += (w ? " " : "") + rng.pick(words);
        }
        const std::size_t cursor = rng.index(text.size() + 1);
        const auto expected = brute_force_locate(text, segment, cursor);
        std::optional<Span> got;
        try {
            got = locate_span(text, segment, cursor);
        } catch (const Error& e) {
            c.expect(e.code() == Errc::segment_not_found, "unexpected error " + std::string(errc_name(e.code())));
        }
        c.expect(got == expected, "triple " + std::to_string(i) + " disagrees with the oracle");
    }

    struct AlignFixture {
        std::string narration;
        std::string segment;
        double start;
        double end;
    };
    const std::vector<AlignFixture> fixtures = {
        {"The quick brown fox jumps over the lazy dog.", "quick brown", 0.3, 0.9},
        {"The quick brown fox jumps over the lazy dog.", "The", 0.0, 0.3},
        {"The quick brown fox jumps over the lazy dog.", "lazy dog.", 2.1, 2.7},
        {"The quick brown fox jumps over the lazy dog.", "uick bro", 0.3, 0.9},
        {"Sales rose.  Then   they fell sharply.", "Then they fell", 0.6, 1.5},
        {"Sales rose. Then they fell sharply.", "rose. Then", 0.3, 0.9},
        {"One two three four five six seven eight nine ten eleven", "eleven", 3.0, 3.3},
        {"One two three four five six seven eight nine ten eleven", "four five six seven", 0.9, 2.1},
        {"Prices\tclimbed\nall year", "climbed all", 0.3, 0.9},
        {"A B C D E F G H", "A B C D E F G H", 0.0, 2.4},
    };
    TempDir dir;
    MockSpeechSynthesizer tts;
    for (const auto& f : fixtures) {
        const Speech speech = synthesize_speech(f.narration, tts, dir / "a.wav");
        const Interval iv = align_segment(locate_span(f.narration, f.segment), speech.timings);
        c.expect(iv.start == f.start && iv.end == f.end, "alignment of '" + f.segment + "'");
    }
}

void annotation_diff(Checks& c) {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        XmlNode tree = random_svg_tree(rng);
        const SvgDoc base = parse_svg(to_xml(tree));
        c.expect(diff_annotations(base, parse_svg(to_xml(tree))).empty(), "diff(d, d) not empty");

        XmlNode shuffled = tree;
        permute_siblings(shuffled, rng);
        c.expect(diff_annotations(base, parse_svg(to_xml(shuffled))).empty(), "permutation reported as change");

        XmlNode annotated = tree;
        const int k = rng.uniform(1, 10);
        const auto injected = inject_annotations(annotated, rng, k);
        const auto added = diff_annotations(base, parse_svg(to_xml(annotated)));
        c.expect(std::set<std::string>(added.begin(), added.end()) ==
                         std::set<std::string>(injected.begin(), injected.end()) &&
                     added.size() == injected.size(),
                 "injected " + std::to_string(k) + ", detected " + std::to_string(added.size()));
    }
}

void timeline_invariants(Checks& c) {
    Rng rng(5);
    TempDir dir;
    for (int i = 0; i < 200; ++i) {
        const TimelineCase tc = random_timeline_case(rng, dir / "a.wav");
        const Timeline& tl = tc.compiled.timeline;
        const std::string tag = "case " + std::to_string(i);
        c.expect(check_timeline(tl).passing(), tag + ": check_timeline failed");
        c.expect(tl.duration == tc.speech.duration, tag + ": duration differs from the audio");

        for (const auto& [id, track] : tl.tracks) {
            for (std::size_t k = 0; k < track.size(); ++k) {
                c.expect(track[k].time >= 0 && track[k].time <= tl.duration, tag + ": keyframe outside the video");
                if (k) c.expect(track[k - 1].time <= track[k].time, tag + ": track " + id + " unsorted");
            }
        }
        for (const auto& pd : tc.inputs.directives) {
            const auto cat = category_of(pd.directive.animation);
            const Interval& iv = pd.interval;
            if (cat == AnimationCategory::entrance) {
                for (const auto& id : pd.targets) {
                    c.expect(tl.initial_visibility.at(id) == Visibility::hidden, tag + ": entrance target starts visible");
                    c.expect(!state_at(tl, id, iv.start / 2).visible(), tag + ": " + id + " visible before its entrance");
                    c.expect(!state_at(tl, id, iv.start).visible(), tag + ": " + id + " visible at entrance start");
                    c.expect(state_at(tl, id, iv.end).visible(), tag + ": " + id + " hidden after entrance");
                }
            } else if (cat == AnimationCategory::exit) {
                for (const auto& id : pd.targets) {
                    c.expect(!state_at(tl, id, iv.end).visible(), tag + ": " + id + " visible after its exit");
                    c.expect(!state_at(tl, id, tl.duration).visible(), tag + ": " + id + " visible at the end");
                }
            } else {
                std::vector<std::string> affected(pd.targets.begin(), pd.targets.end());
                if (pd.directive.animation == AnimationType::highlight_one_and_fade_others) {
                    affected.insert(affected.end(), tc.inputs.context.mark_ids.begin(), tc.inputs.context.mark_ids.end());
                }
                for (const auto& id : affected) {
                    const ElementState before = state_at(tl, id, iv.start);
                    const ElementState after = state_at(tl, id, iv.end);
                    for (Property p : {Property::opacity, Property::scale, Property::translate_x, Property::translate_y,
                                       Property::clip_fraction, Property::wheel_fraction}) {
                        c.expect(std::abs(before.get(p) - after.get(p)) < 1e-9,
                                 tag + ": " + id + " not restored after " + std::string(to_string(pd.directive.animation)));
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------

ProjectConfig stock_config(const fs::path& out) {
    ProjectConfig config = load_config(stocks_dir() / "config.json");
    config.output_dir = out;
    return config;
}

Json manifest_without_times(const fs::path& dir) {
    Json m = Json::parse(read_file(dir / "manifest.json"));
    for (auto& s : m["stages"]) {
        s.erase("started_at");
        s.erase("finished_at");
    }
    return m;
}

std::set<std::string> series_elements_in(const SvgDoc& doc, const std::string& company) {
    std::set<std::string> out;
    for (const auto& el : doc.elements()) {
        if (el.attr("data-series") == company) out.insert(el.id);
    }
    return out;
}

void stock_case_study(Checks& c) {
    TempDir dir;
    run_pipeline(stock_config(dir / "a"));
    run_pipeline(stock_config(dir / "b"));
    const fs::path a = dir / "a";

    const Json analyst = Json::parse(read_file(a / "analyst.json"));
    c.expect(analyst["Visualization_Type"] == "line", "not a line chart");
    const DataTable table = parse_csv(read_file(stocks_dir() / "stocks.csv"), "stocks");
    std::set<std::string> companies;
    for (const auto& cell : table.columns()[*table.column_index("company")].values) companies.insert(cell_text(cell));
    c.expect(companies.size() == 4, "fixture does not hold four companies");

    const SvgDoc canvas = parse_svg(read_file(a / "annotated.svg"));
    std::set<std::string> series_in_chart;
    for (const auto& el : canvas.elements()) {
        if (auto s = el.attr("data-series")) series_in_chart.insert(*s);
    }
    c.expect(series_in_chart == companies, "chart does not draw one series per company");

    const Json bindings = Json::parse(read_file(a / "bindings.json"));
    const Json designer = Json::parse(read_file(a / "designer.json"));
    const Json word_timings = Json::parse(read_file(a / "word_timings.json"));
    const std::string narration = analyst["Narration"];

    struct Highlight {
        std::string company;
        double start, end;
    };
    std::vector<Highlight> highlights;
    for (const auto& company : companies) {
        const auto expected = series_elements_in(canvas, company);
        bool found = false;
        for (std::size_t i = 0; i < designer["Annotated_Narration_for_Animation"].size(); ++i) {
            const Json& d = designer["Annotated_Narration_for_Animation"][i];
            if (classify_animation(d["animation"].get<std::string>()) != AnimationCategory::emphasis) continue;
            const Json& ids = bindings["directive_targets"][i]["elements"];
            const std::set<std::string> got(ids.begin(), ids.end());
            if (got != expected) continue;
            found = true;
            // interval from word positions: the n-th word spans [0.3 n, 0.3 (n + 1)]
            const std::string seg = d["narration"];
            const auto at = narration.find(seg);
            auto words_before = [&](std::size_t pos) {
                std::istringstream in(narration.substr(0, pos));
                std::size_t n = 0;
                for (std::string w; in >> w;) ++n;
                return n;
            };
            const auto first = words_before(at);
            const auto last = words_before(at + seg.size());
            highlights.push_back({company, static_cast<double>(first) * 0.3, static_cast<double>(last) * 0.3});
        }
        c.expect(found, company + ": no emphasis directive resolved to exactly its series");
    }

    std::multiset<std::string> annotation_tags;
    std::string annotation_text;
    for (const auto& id : bindings["annotations"]) {
        const auto& el = canvas.at(*canvas.find(id.get<std::string>()));
        annotation_tags.insert(el.tag);
        if (el.tag == "text") annotation_text = el.text;
    }
    c.expect(annotation_tags == std::multiset<std::string>{"circle", "text"}, "scripted point and text not detected");
    c.expect(annotation_text == "$376", "annotation text not detected");

    const Json video = Json::parse(read_file(a / "video_manifest.json"));
    c.expect(video["duration"].get<double>() == word_timings["duration"].get<double>(), "video and audio durations differ");
    std::set<std::string> marks;
    for (const auto& company : companies) {
        for (const auto& id : series_elements_in(canvas, company)) marks.insert(id);
    }
    for (const auto& frame : video["frames"]) {
        const double t = frame["t"];
        const Highlight* active = nullptr;
        for (const auto& h : highlights) {
            if (t >= h.start && t <= h.end) active = &h;
        }
        std::set<std::string> dimmed_marks;
        for (const auto& id : frame["dimmed"]) {
            if (marks.contains(id)) dimmed_marks.insert(id);
        }
        if (!active) {
            c.expect(dimmed_marks.empty(), "series dimmed outside every highlight at t=" + std::to_string(t));
        } else if (t > active->start + 0.2 && t < active->end - 0.2) {
            std::set<std::string> others;
            for (const auto& id : marks) {
                if (!series_elements_in(canvas, active->company).contains(id)) others.insert(id);
            }
            c.expect(dimmed_marks == others, "other series not dimmed while " + active->company + " is highlighted");
        }
    }

    for (const auto& s : run_pipeline(stock_config(dir / "b")).stages) {
        for (const auto& art : s.artifacts) {
            c.expect(sha256_file(a / art.path) == art.sha256, art.path + " differs between runs");
        }
    }
    c.expect(manifest_without_times(a) == manifest_without_times(dir / "b"), "manifests differ beyond timestamps");
    c.expect(validate_project(a).passing(), "validate reports violations");
}

bool live_smoke(Checks& c) {
    const char* config_path = std::getenv("DATAVIDEO_LIVE_CONFIG");
    if (!config_path) return false;
    ProjectConfig config = load_config(config_path);
    if (config.backend.api_key_env.empty() || !std::getenv(config.backend.api_key_env.c_str())) return false;
    TempDir dir;
    config.output_dir = dir / "live";
    config.mock_mode = false;
    try {
        run_pipeline(config);
    } catch (const PipelineError& e) {
        c.expect(e.error_class() == ErrorClass::agent_contract, std::string("unclassified failure: ") + e.what());
    }
    const auto report = validate_project(config.output_dir);
    c.expect(report.passing(), "persisted artifacts fail validation");
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        long long limit_ms;
        std::function<bool(Checks&)> run;  // false: skipped
    };
    auto always = [](void (*f)(Checks&)) { return [f](Checks& c) { f(c); return true; }; };
    const std::vector<Criterion> criteria = {
        {1, "prompt fidelity", 1000, always(prompt_fidelity)},
        {2, "contract parsing", 5000, always(contract_parsing)},
        {3, "animation legality", 5000, always(animation_legality)},
        {4, "segment location and alignment", 5000, always(segment_alignment)},
        {5, "annotation diff", 5000, always(annotation_diff)},
        {6, "timeline invariants", 10000, always(timeline_invariants)},
        {7, "end-to-end stock case study", 10000, always(stock_case_study)},
        {8, "live backend smoke", 600000, live_smoke},
    };

    int failures = 0;
    for (const auto& cr : criteria) {
        Checks checks;
        bool ran = true;
        std::string error;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            ran = cr.run(checks);
        } catch (const std::exception& e) {
            error = e.what();
        }
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        checks.expect(ms < cr.limit_ms, "took longer than " + std::to_string(cr.limit_ms) + " ms");
        const bool pass = error.empty() && checks.passed();
        const char* status = !ran && pass ? "SKIP" : pass ? "PASS" : "FAIL";
        std::cout << "[" << status << "] " << cr.number << " " << cr.name << " (" << ms << " ms";
        if (ran && pass) std::cout << ", " << checks.count() << " checks";
        if (!ran && pass) std::cout << ", no live credentials configured";
        std::cout << ")\n";
        if (!pass) {
            ++failures;
            if (!error.empty()) std::cout << "      exception: " << error << "\n";
            if (!checks.passed()) std::cout << "      " << checks.summary() << "\n";
        }
    }
    return failures == 0 ? 0 : 1;
}
