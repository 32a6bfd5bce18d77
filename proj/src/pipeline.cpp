#include "datavideo/pipeline.hpp"

#include <algorithm>
#include <ctime>
#include <sstream>

#include "datavideo/analyst.hpp"
#include "datavideo/designer.hpp"
#include "datavideo/hashing.hpp"
#include "datavideo/ingest.hpp"
#include "datavideo/svg.hpp"
#include "datavideo/svg_binding.hpp"
#include "datavideo/timeline.hpp"
#include "datavideo/vega.hpp"

namespace datavideo {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

void ProjectConfig::validate() const {
    if (input_csv.empty()) throw Error(Errc::invalid_config, "no input CSV given");
    if (!fs::is_regular_file(input_csv)) throw Error(Errc::precondition, "input file not found: " + input_csv.string());
    if (output_dir.empty()) throw Error(Errc::invalid_config, "no output directory given");
    if (max_repair_attempts < 1) throw Error(Errc::invalid_config, "max_repair_attempts must be at least 1");
    if (fps <= 0) throw Error(Errc::invalid_config, "fps must be positive");
    const bool mock_backend = mock_mode || backend.kind == BackendKind::mock;
    if (mock_backend) {
        for (const auto* p : {&description_transcript, &analyst_transcript, &designer_transcript}) {
            if (p->empty()) throw Error(Errc::invalid_config, "mock mode needs a transcript for every agent role");
            if (!fs::is_regular_file(*p)) throw Error(Errc::precondition, "transcript not found: " + p->string());
        }
    } else {
        backend.validate();
    }
    if (!mock_mode) {
        for (const auto* a : {&renderer, &tts, &synth}) {
            if (a->kind == AdapterKind::command && a->command.empty()) {
                throw Error(Errc::invalid_config, "command adapters need a \"command\"");
            }
        }
    }
}

namespace {

fs::path resolve_path(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const Json::exception&) {
        throw Error(Errc::invalid_config, std::string("\"") + key + "\" has the wrong type");
    }
}

std::chrono::milliseconds seconds_to_ms(double s) { return std::chrono::milliseconds(static_cast<long long>(s * 1000)); }

AdapterConfig adapter_from_json(const Json& j, const char* name) {
    AdapterConfig a;
    if (!j.contains(name)) return a;
    const Json& c = j[name];
    if (!c.is_object()) throw Error(Errc::invalid_config, std::string("\"") + name + "\" must be an object");
    const auto kind = get_or<std::string>(c, "kind", "mock");
    if (kind == "mock") {
        a.kind = AdapterKind::mock;
    } else if (kind == "command") {
        a.kind = AdapterKind::command;
    } else {
        throw Error(Errc::invalid_config, std::string("\"") + name + ".kind\" must be \"mock\" or \"command\"");
    }
    a.command = get_or<std::string>(c, "command", "");
    if (c.contains("timeout_seconds")) a.timeout = seconds_to_ms(get_or<double>(c, "timeout_seconds", 120));
    return a;
}

}  // namespace

ProjectConfig config_from_json(const Json& j, const fs::path& base) {
    if (!j.is_object()) throw Error(Errc::invalid_config, "config must be a JSON object");
    ProjectConfig c;
    c.input_csv = resolve_path(base, get_or<std::string>(j, "input", ""));
    c.title = get_or<std::string>(j, "title", "");
    c.output_dir = resolve_path(base, get_or<std::string>(j, "output_dir", "out"));
    if (const auto cache = get_or<std::string>(j, "cache_dir", ""); !cache.empty()) c.cache_dir = resolve_path(base, cache);
    c.mock_mode = get_or<bool>(j, "mock_mode", false);
    c.max_repair_attempts = get_or<int>(j, "max_repair_attempts", default_max_attempts);
    c.fps = get_or<int>(j, "fps", default_fps);
    if (j.contains("max_prompt_rows")) {
        c.max_prompt_rows = j["max_prompt_rows"].is_null() ? std::nullopt
                                                            : std::optional<std::size_t>(get_or<std::size_t>(j, "max_prompt_rows", 0));
    }
    const auto exp = get_or<std::string>(j, "export", "both");
    if (exp == "html") {
        c.export_kind = ExportKind::html;
    } else if (exp == "video") {
        c.export_kind = ExportKind::video;
    } else if (exp == "both") {
        c.export_kind = ExportKind::both;
    } else {
        throw Error(Errc::invalid_config, "\"export\" must be html, video or both");
    }

    if (j.contains("backend")) {
        const Json& b = j["backend"];
        if (!b.is_object()) throw Error(Errc::invalid_config, "\"backend\" must be an object");
        const auto kind = get_or<std::string>(b, "kind", "mock");
        if (kind == "live") {
            c.backend.kind = BackendKind::live;
        } else if (kind == "mock") {
            c.backend.kind = BackendKind::mock;
        } else {
            throw Error(Errc::invalid_config, "\"backend.kind\" must be \"live\" or \"mock\"");
        }
        c.backend.endpoint = get_or<std::string>(b, "endpoint", "");
        c.backend.model_name = get_or<std::string>(b, "model", c.backend.model_name);
        c.backend.temperature = get_or<double>(b, "temperature", 0.0);
        c.backend.api_key_env = get_or<std::string>(b, "api_key_env", "");
        c.backend.max_http_retries = get_or<int>(b, "max_http_retries", c.backend.max_http_retries);
        if (b.contains("timeout_seconds")) c.backend.timeout = seconds_to_ms(get_or<double>(b, "timeout_seconds", 60));
    }
    if (j.contains("transcripts")) {
        const Json& t = j["transcripts"];
        c.description_transcript = resolve_path(base, get_or<std::string>(t, "description", ""));
        c.analyst_transcript = resolve_path(base, get_or<std::string>(t, "analyst", ""));
        c.designer_transcript = resolve_path(base, get_or<std::string>(t, "designer", ""));
    }
    c.renderer = adapter_from_json(j, "renderer");
    c.tts = adapter_from_json(j, "tts");
    c.synth = adapter_from_json(j, "synth");
    return c;
}

ProjectConfig load_config(const fs::path& file) {
    if (!fs::is_regular_file(file)) throw Error(Errc::invalid_config, "config file not found: " + file.string());
    Json j;
    try {
        j = Json::parse(read_file(file));
    } catch (const Json::exception& e) {
        throw Error(Errc::invalid_config, file.string() + ": " + e.what());
    }
    return config_from_json(j, fs::absolute(file).parent_path());
}

// ---------------------------------------------------------------------------
// Manifest

const StageRecord* ProjectManifest::stage(std::string_view name) const {
    for (const auto& s : stages) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

Json to_json(const ProjectManifest& m) {
    Json stages = Json::array();
    for (const auto& s : m.stages) {
        Json artifacts = Json::array();
        for (const auto& a : s.artifacts) artifacts.push_back(Json{{"path", a.path}, {"sha256", a.sha256}});
        stages.push_back(Json{{"name", s.name},
                              {"status", s.status},
                              {"started_at", s.started_at},
                              {"finished_at", s.finished_at},
                              {"artifacts", std::move(artifacts)}});
    }
    Json out = Json::object();
    out["stages"] = std::move(stages);
    out["failure"] = m.failure ? Json{{"stage", m.failure->stage},
                                      {"error", m.failure->error},
                                      {"error_class", m.failure->error_class},
                                      {"message", m.failure->message}}
                               : Json(nullptr);
    return out;
}

ProjectManifest manifest_from_json(const Json& j) {
    ProjectManifest m;
    try {
        for (const auto& s : j.at("stages")) {
            StageRecord r{s.at("name").get<std::string>(), s.at("status").get<std::string>(),
                          s.at("started_at").get<std::string>(), s.at("finished_at").get<std::string>(), {}};
            for (const auto& a : s.at("artifacts")) {
                r.artifacts.push_back(ArtifactRecord{a.at("path").get<std::string>(), a.at("sha256").get<std::string>()});
            }
            m.stages.push_back(std::move(r));
        }
        if (j.contains("failure") && !j["failure"].is_null()) {
            const Json& f = j["failure"];
            m.failure = FailureRecord{f.at("stage").get<std::string>(), f.at("error").get<std::string>(),
                                      f.at("error_class").get<std::string>(), f.at("message").get<std::string>()};
        }
    } catch (const Json::exception& e) {
        throw Error(Errc::schema_error, std::string("manifest.json: ") + e.what());
    }
    return m;
}

ProjectManifest load_manifest(const fs::path& project_dir) {
    const auto path = project_dir / "manifest.json";
    if (!fs::is_regular_file(path)) throw Error(Errc::manifest_not_found, path.string());
    try {
        return manifest_from_json(Json::parse(read_file(path)));
    } catch (const Json::parse_error& e) {
        throw Error(Errc::manifest_not_found, path.string() + " is unreadable: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

std::string now_utc() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string_view class_name(ErrorClass c) {
    switch (c) {
        case ErrorClass::precondition: return "precondition";
        case ErrorClass::agent_contract: return "agent_contract";
        case ErrorClass::adapter: return "adapter";
    }
    return {};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json stage_report(const ValidationReport& report, const RepairReport* repair) {
    Json j = Json::object();
    j["validation"] = to_json(report);
    if (repair) j["repair"] = to_json(*repair);
    return j;
}

std::unique_ptr<Renderer> make_renderer(const ProjectConfig& c) {
    if (c.mock_mode || c.renderer.kind == AdapterKind::mock) return std::make_unique<MockRenderer>();
    return std::make_unique<CommandRenderer>(c.renderer.command, c.renderer.timeout);
}

std::unique_ptr<SpeechSynthesizer> make_tts(const ProjectConfig& c) {
    if (c.mock_mode || c.tts.kind == AdapterKind::mock) return std::make_unique<MockSpeechSynthesizer>();
    return std::make_unique<CommandSpeechSynthesizer>(c.tts.command, c.tts.timeout);
}

std::unique_ptr<VideoSynthesizer> make_synth(const ProjectConfig& c) {
    if (c.mock_mode || c.synth.kind == AdapterKind::mock) return std::make_unique<MockVideoSynthesizer>();
    return std::make_unique<CommandVideoSynthesizer>(c.synth.command, c.synth.timeout);
}

Json word_timings_document(const Speech& speech, const fs::path& dir) {
    Json j = Json::object();
    j["audio"] = fs::relative(speech.audio, dir).generic_string();
    j["duration"] = speech.duration;
    j["words"] = to_json(speech.timings);
    return j;
}

class Run {
public:
    explicit Run(const ProjectConfig& config) : config_(config), dir_(config.output_dir) {}

    template <typename Body>
    void stage(std::string_view name, Body&& body) {
        current_ = StageRecord{std::string(name), "ok", now_utc(), "", {}};
        try {
            try {
                body();
            } catch (const RepairExhausted& e) {
                artifact(std::string(name) + ".report.json", dump(stage_report(e.last_report(), &e.report())));
                throw;
            } catch (const Error&) {
                throw;
            } catch (const fs::filesystem_error& e) {
                throw Error(Errc::io_error, e.what());
            } catch (const Json::exception& e) {
                throw Error(Errc::schema_error, e.what());
            }
        } catch (const Error& e) {
            current_.status = "failed";
            current_.finished_at = now_utc();
            manifest_.stages.push_back(current_);
            manifest_.failure = FailureRecord{std::string(name), std::string(errc_name(e.code())),
                                              std::string(class_name(e.error_class())), e.detail()};
            write_manifest();
            throw PipelineError(e, std::string(name), manifest_);
        }
        current_.finished_at = now_utc();
        manifest_.stages.push_back(current_);
        write_manifest();
    }

    void artifact(const std::string& rel, const std::string& contents) {
        write_file_atomic(dir_ / rel, contents);
        record(rel, sha256_hex(contents));
    }

    void record(const std::string& rel, const std::string& sha) {
        std::erase_if(current_.artifacts, [&](const ArtifactRecord& a) { return a.path == rel; });
        current_.artifacts.push_back(ArtifactRecord{rel, sha});
    }

    const fs::path& dir() const { return dir_; }
    const ProjectManifest& manifest() const { return manifest_; }

private:
    void write_manifest() { write_file_atomic(dir_ / "manifest.json", dump(to_json(manifest_))); }

    const ProjectConfig& config_;
    fs::path dir_;
    ProjectManifest manifest_;
    StageRecord current_;
};

std::shared_ptr<ChatBackend> role_backend(const ProjectConfig& c, const fs::path& transcript) {
    if (c.mock_mode || c.backend.kind == BackendKind::mock) {
        return std::make_shared<MockBackend>(MockBackend::load_transcript(transcript));
    }
    return nullptr;
}

}  // namespace

ProjectManifest run_pipeline(const ProjectConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);
    Run run(config);
    const AgentConfig agent{config.max_repair_attempts, config.max_prompt_rows};

    std::shared_ptr<ChatBackend> live;
    if (!config.mock_mode && config.backend.kind == BackendKind::live) live = make_backend(config.backend, config.cache_dir);
    auto session_for = [&](const fs::path& transcript) {
        auto backend = role_backend(config, transcript);
        return ChatSession(backend ? backend : live);
    };
    auto renderer = make_renderer(config);
    auto tts = make_tts(config);
    auto synth = make_synth(config);

    DataTable table;
    DataDescription description;
    AnalystResult analyst;
    SvgDoc base_doc;
    MarkIndex base_index;
    DesignerResult designer;
    SvgDoc canvas;
    MarkIndex index;
    std::vector<std::set<std::string>> targets;
    AnnotationAssignment assignment;
    Speech speech;
    Timeline timeline;

    run.stage("ingest", [&] {
        const std::string title = config.title.empty() ? config.input_csv.stem().string() : config.title;
        table = parse_csv(read_file(config.input_csv), title);
        run.artifact("table.csv", serialize_csv(table));
        Json columns = Json::array();
        for (const auto& c : table.columns()) columns.push_back(c.name);
        run.artifact("ingest.json",
                     dump(Json{{"title", table.title()}, {"row_count", table.row_count()}, {"columns", columns}}));
    });

    run.stage("description", [&] {
        ChatSession session = session_for(config.description_transcript);
        const PromptText prompt = build_description_prompt(table, config.max_prompt_rows);
        auto outcome = repair_loop<DataDescription>(
            session, prompt,
            [](const std::string& raw) { return Checked<DataDescription>{parse_description_response(raw), {}}; },
            config.max_repair_attempts);
        description = outcome.value;
        run.artifact("description.json", dump(Json{{"Description", description.text}}));
        run.artifact("description.report.json", dump(stage_report(outcome.report, &outcome.repair)));
    });

    run.stage("analyst", [&] {
        ChatSession session = session_for(config.analyst_transcript);
        analyst = run_analyst(session, description, table, agent);
        run.artifact("analyst.json", dump(analyst_output_to_json(analyst.output)));
        run.artifact("analyst.report.json", dump(stage_report(analyst.report, &analyst.repair)));
    });

    run.stage("render_base", [&] {
        const std::string svg =
            render_visualization(vega::bind_table_data(analyst.output.visualization.spec, table), *renderer);
        base_doc = parse_svg(svg);
        base_index = index_marks(base_doc, analyst.output.visualization, table);
        run.artifact("base.svg", svg);
    });

    run.stage("designer", [&] {
        ChatSession session = session_for(config.designer_transcript);
        const TargetResolver resolver = [&](const AnimationDirective& d) { return resolve_targets(d, base_index); };
        designer = run_designer(session, analyst.output.visualization, analyst.output.narration, table, agent, resolver);
        Json report = stage_report(designer.report, &designer.repair);
        Json resolved = Json::array();
        for (const auto& d : designer.output.animation_directives) resolved.push_back(resolver(d));
        report["base_targets"] = std::move(resolved);
        run.artifact("designer.json", dump(designer_output_to_json(designer.output)));
        run.artifact("designer.report.json", dump(report));
    });

    run.stage("render_annotated", [&] {
        const VisualizationSpec annotated{designer.output.annotated_visualization, analyst.output.visualization.vis_type};
        const std::string svg = render_visualization(vega::bind_table_data(annotated.spec, table), *renderer);
        canvas = parse_svg(svg);
        run.artifact("annotated.svg", svg);
        run.artifact("canvas.svg", serialize_svg(canvas));
    });

    run.stage("binding", [&] {
        ValidationReport report;
        const AnnotationDiff diff = diff_annotations_detailed(base_doc, canvas);
        for (const auto& id : diff.unmatched) {
            report.advise("non-additive-change", id, "base element has no counterpart in the annotated chart");
        }
        const auto leaves = annotation_leaves(canvas, diff.added);
        index = index_marks(canvas, VisualizationSpec{designer.output.annotated_visualization,
                                                      analyst.output.visualization.vis_type},
                            table);
        mark_annotations(index, leaves, canvas);

        Json directive_targets = Json::array();
        for (const auto& d : designer.output.animation_directives) {
            try {
                targets.push_back(resolve_targets(d, index));
            } catch (const Error& e) {
                // the designer stage resolved it against the base chart; fall back to that
                if (e.code() != Errc::unresolved_target) throw;
                throw Error(Errc::unresolved_target, e.detail() + " in the annotated chart");
            }
            directive_targets.push_back(Json{{"animation", to_string(d.animation)},
                                             {"narration", d.narration},
                                             {"target", d.target},
                                             {"elements", targets.back()}});
        }
        assignment = match_annotation_directives(leaves, designer.output.annotation_directives, index, canvas);
        report.merge(assignment.report);
        Json assigned = Json::array();
        for (std::size_t i = 0; i < designer.output.annotation_directives.size(); ++i) {
            assigned.push_back(Json{{"nar", designer.output.annotation_directives[i].nar},
                                    {"elements", assignment.per_directive[i]}});
        }
        Json j = Json::object();
        j["marks"] = to_json(index);
        j["annotations"] = leaves;
        j["directive_targets"] = std::move(directive_targets);
        j["annotation_assignment"] = std::move(assigned);
        j["report"] = to_json(report);
        run.artifact("bindings.json", dump(j));
    });

    run.stage("tts", [&] {
        speech = synthesize_speech(analyst.output.narration, *tts, run.dir() / "audio.wav");
        run.record("audio.wav", sha256_file(speech.audio));
        Json doc = word_timings_document(speech, run.dir());
        doc["report"] = to_json(speech.report);
        run.artifact("word_timings.json", dump(doc));
    });

    run.stage("timeline", [&] {
        const std::string& narration = analyst.output.narration;
        TimelineInputs in;
        in.duration = speech.duration;
        for (const auto& el : canvas.elements()) in.element_ids.push_back(el.id);
        for (const auto& id : index.ids_with_role(Role::mark)) in.context.mark_ids.push_back(id);
        for (const auto& id : index.ids_with_role(Role::legend)) in.context.legend_ids.push_back(id);

        std::vector<std::string> segments;
        for (const auto& d : designer.output.animation_directives) segments.push_back(d.narration);
        const auto spans = locate_segments(segments, narration);
        for (std::size_t i = 0; i < spans.size(); ++i) {
            if (!spans[i]) throw Error(Errc::segment_not_found, "'" + segments[i] + "'");
            in.directives.push_back(PlacedDirective{designer.output.animation_directives[i], *spans[i],
                                                    align_segment(*spans[i], speech.timings), targets[i]});
        }
        std::vector<std::string> nars;
        for (const auto& a : designer.output.annotation_directives) nars.push_back(a.nar);
        const auto nar_spans = locate_segments(nars, narration);
        for (std::size_t i = 0; i < nar_spans.size(); ++i) {
            if (!nar_spans[i]) throw Error(Errc::segment_not_found, "'" + nars[i] + "'");
            const Interval iv = align_segment(*nar_spans[i], speech.timings);
            for (const auto& id : assignment.per_directive[i]) in.annotations.push_back(PlacedAnnotation{id, iv});
        }
        CompiledTimeline compiled = compile_timeline(in);
        const ValidationReport check = check_timeline(compiled.timeline);
        if (!check.passing()) {
            throw Error(Errc::synth_failure, "compiled timeline is invalid: " + check.violations.front().message);
        }
        timeline = std::move(compiled.timeline);
        run.artifact("timeline.json", dump(to_json(timeline)));
        run.artifact("timeline.report.json", dump(stage_report(compiled.report, nullptr)));
    });

    run.stage("export", [&] {
        if (config.export_kind != ExportKind::video) {
            run.artifact("video.html", export_html(timeline, canvas, "audio.wav"));
        }
        if (config.export_kind != ExportKind::html) {
            SynthRequest request{run.dir() / "timeline.json", run.dir() / "canvas.svg", speech.audio, run.dir(), config.fps};
            const fs::path out = synthesize_video(request, *synth);
            run.record(fs::relative(out, run.dir()).generic_string(), sha256_file(out));
        }
    });

    return run.manifest();
}

// ---------------------------------------------------------------------------
// Inspection

namespace {

Json read_json(const fs::path& p) {
    try {
        return Json::parse(read_file(p));
    } catch (const Json::parse_error& e) {
        throw Error(Errc::schema_error, p.filename().string() + ": " + e.what());
    }
}

void print_report(std::ostringstream& out, const fs::path& file) {
    if (!fs::is_regular_file(file)) return;
    const Json j = read_json(file);
    const Json& v = j.contains("validation") ? j["validation"] : j;
    if (j.contains("repair")) out << "repair attempts: " << j["repair"].value("attempts", 0) << "\n";
    for (const char* kind : {"violations", "advisories"}) {
        if (!v.contains(kind)) continue;
        out << kind << ": " << v[kind].size() << "\n";
        for (const auto& item : v[kind]) {
            out << "  [" << item.value("code", "") << "] " << item.value("path", "") << " " << item.value("message", "")
                << "\n";
        }
    }
}

std::string pad(std::string s, std::size_t w) {
    s.append(s.size() < w ? w - s.size() : 1, ' ');
    return s;
}

}  // namespace

std::string inspect_stage(const fs::path& dir, std::string_view stage) {
    if (std::find(pipeline_stages.begin(), pipeline_stages.end(), stage) == pipeline_stages.end()) {
        throw Error(Errc::unknown_stage, "'" + std::string(stage) + "'");
    }
    const ProjectManifest manifest = load_manifest(dir);
    std::ostringstream out;
    const StageRecord* rec = manifest.stage(stage);
    out << "stage: " << stage << "\n";
    if (!rec) {
        out << "status: not run\n";
        if (manifest.failure) out << "pipeline stopped at " << manifest.failure->stage << "\n";
        return out.str();
    }
    out << "status: " << rec->status << "\n";
    out << "started: " << rec->started_at << "\nfinished: " << rec->finished_at << "\n";
    for (const auto& a : rec->artifacts) out << "artifact: " << a.path << " sha256:" << a.sha256.substr(0, 12) << "\n";
    if (manifest.failure && manifest.failure->stage == stage) {
        out << "failure: " << manifest.failure->error << " (" << manifest.failure->error_class
            << "): " << manifest.failure->message << "\n";
    }
    if (rec->status != "ok") {
        print_report(out, dir / (std::string(stage) + ".report.json"));
        return out.str();
    }

    if (stage == "ingest") {
        const Json j = read_json(dir / "ingest.json");
        out << "title: " << j.value("title", "") << "\nrows: " << j.value("row_count", 0) << "\ncolumns: ";
        for (const auto& c : j["columns"]) out << c.get<std::string>() << " ";
        out << "\n";
    } else if (stage == "description") {
        out << "description: " << read_json(dir / "description.json").value("Description", "") << "\n";
        print_report(out, dir / "description.report.json");
    } else if (stage == "analyst") {
        const Json j = read_json(dir / "analyst.json");
        out << "visualization type: " << j.value("Visualization_Type", "") << "\ninsights:\n";
        for (const auto& i : j["Insights"]) {
            out << "  - " << i.value("insight", "") << " [";
            for (std::size_t k = 0; k < i["type"].size(); ++k) out << (k ? ", " : "") << i["type"][k].get<std::string>();
            out << "]\n";
        }
        out << "narration: " << j.value("Narration", "") << "\n";
        print_report(out, dir / "analyst.report.json");
    } else if (stage == "render_base" || stage == "render_annotated") {
        const SvgDoc doc = parse_svg(read_file(dir / (stage == "render_base" ? "base.svg" : "annotated.svg")));
        std::size_t marks = 0;
        for (const auto& el : doc.elements()) {
            if (el.has_class(mark_group_class)) marks += el.children.size();
        }
        out << "elements: " << doc.size() << "\nmark elements: " << marks << "\n";
    } else if (stage == "designer") {
        const Json j = read_json(dir / "designer.json");
        const Json report = read_json(dir / "designer.report.json");
        Json bindings;
        if (fs::is_regular_file(dir / "bindings.json")) bindings = read_json(dir / "bindings.json");
        out << pad("#", 4) << pad("animation", 32) << pad("category", 10) << pad("segment", 48) << "targets\n";
        const Json& items = j["Annotated_Narration_for_Animation"];
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto name = items[i].value("animation", "");
            const Json& ids = bindings.is_object() ? bindings["directive_targets"][i]["elements"] : report["base_targets"][i];
            std::string id_text;
            for (const auto& id : ids) id_text += (id_text.empty() ? "" : ",") + id.get<std::string>();
            out << pad(std::to_string(i), 4) << pad(name, 32) << pad(std::string(to_string(classify_animation(name))), 10)
                << pad("\"" + items[i].value("narration", "") + "\"", 48) << id_text << "\n";
        }
        out << "annotations:\n";
        for (const auto& a : j["Annotated_Narration_for_Annotation"]) {
            out << "  - " << a.value("description", "") << " @ \"" << a.value("nar", "") << "\"\n";
        }
        print_report(out, dir / "designer.report.json");
    } else if (stage == "binding") {
        const Json j = read_json(dir / "bindings.json");
        out << "indexed elements: " << j["marks"].size() << "\nannotation elements: " << j["annotations"].size() << "\n";
        for (const auto& a : j["annotation_assignment"]) {
            out << "  \"" << a.value("nar", "") << "\": " << a["elements"].size() << " element(s)\n";
        }
        print_report(out, dir / "bindings.json");
        const Json& r = j["report"];
        out << "advisories: " << r["advisories"].size() << "\n";
    } else if (stage == "tts") {
        const Json j = read_json(dir / "word_timings.json");
        out << "audio: " << j.value("audio", "") << "\nduration: " << j.value("duration", 0.0)
            << " s\nwords: " << j["words"].size() << "\n";
    } else if (stage == "timeline") {
        const Timeline tl = timeline_from_json(read_json(dir / "timeline.json"));
        std::size_t keyframes = 0;
        for (const auto& [id, track] : tl.tracks) keyframes += track.size();
        out << "duration: " << tl.duration << " s\ntracks: " << tl.tracks.size() << "\nkeyframes: " << keyframes
            << "\nhidden initially: ";
        for (const auto& [id, v] : tl.initial_visibility) {
            if (v == Visibility::hidden) out << id << " ";
        }
        out << "\n";
        print_report(out, dir / "timeline.report.json");
    } else if (stage == "export") {
        if (fs::is_regular_file(dir / "video_manifest.json")) {
            const Json j = read_json(dir / "video_manifest.json");
            out << "video manifest: " << j.value("frame_count", 0) << " frames at " << j.value("fps", 0) << " fps\n";
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Validation of persisted artifacts

ValidationReport validate_project(const fs::path& dir) {
    const ProjectManifest manifest = load_manifest(dir);
    ValidationReport report;
    auto absorb = [&](const std::string& artifact, const ValidationReport& r) {
        for (auto v : r.violations) {
            v.path = artifact + ":" + v.path;
            report.violations.push_back(std::move(v));
        }
        for (auto v : r.advisories) {
            v.path = artifact + ":" + v.path;
            report.advisories.push_back(std::move(v));
        }
    };
    auto guarded = [&](const std::string& artifact, auto&& check) {
        try {
            check();
        } catch (const Error& e) {
            report.fail(std::string(errc_name(e.code())), artifact, e.detail());
        } catch (const std::exception& e) {
            report.fail("unreadable", artifact, e.what());
        }
    };

    std::size_t order = 0;
    for (const auto& s : manifest.stages) {
        const auto it = std::find(pipeline_stages.begin() + static_cast<std::ptrdiff_t>(order), pipeline_stages.end(), s.name);
        if (it == pipeline_stages.end()) report.fail("stage-order", "manifest.json", "unexpected stage " + s.name);
        else order = static_cast<std::size_t>(it - pipeline_stages.begin()) + 1;
        for (const auto& a : s.artifacts) {
            if (!fs::is_regular_file(dir / a.path)) {
                report.fail("missing-artifact", a.path, "listed in the manifest but absent");
            } else if (sha256_file(dir / a.path) != a.sha256) {
                report.fail("hash-mismatch", a.path, "contents differ from the recorded hash");
            }
        }
    }
    auto ran = [&](std::string_view stage) {
        const auto* s = manifest.stage(stage);
        return s && s->status == "ok";
    };

    DataTable table;
    if (ran("ingest")) {
        guarded("table.csv", [&] {
            table = parse_csv(read_file(dir / "table.csv"), read_json(dir / "ingest.json").value("title", ""));
        });
    }
    if (ran("description")) {
        guarded("description.json", [&] { parse_description_response(read_file(dir / "description.json")); });
    }
    std::optional<AnalystOutput> analyst;
    if (ran("analyst")) {
        guarded("analyst.json", [&] {
            auto checked = check_analyst_reply(read_file(dir / "analyst.json"), table);
            absorb("analyst.json", checked.report);
            analyst = std::move(checked.value);
        });
    }
    std::optional<MarkIndex> base_index;
    if (ran("render_base") && analyst) {
        guarded("base.svg", [&] {
            base_index = index_marks(parse_svg(read_file(dir / "base.svg")), analyst->visualization, table);
        });
    }
    if (ran("designer") && analyst && base_index) {
        guarded("designer.json", [&] {
            const TargetResolver resolver = [&](const AnimationDirective& d) { return resolve_targets(d, *base_index); };
            auto checked = check_designer_reply(read_file(dir / "designer.json"), analyst->visualization,
                                                analyst->narration, table, resolver);
            absorb("designer.json", checked.report);
        });
    }
    if (ran("render_annotated")) {
        guarded("annotated.svg", [&] {
            const SvgDoc annotated = parse_svg(read_file(dir / "annotated.svg"));
            const SvgDoc canvas = parse_svg(read_file(dir / "canvas.svg"));
            if (annotated.size() != canvas.size()) report.fail("canvas-mismatch", "canvas.svg", "element count differs");
        });
    }
    std::optional<double> audio_duration;
    if (ran("tts") && analyst) {
        guarded("word_timings.json", [&] {
            const Json j = read_json(dir / "word_timings.json");
            absorb("word_timings.json", check_word_timings(word_timings_from_json(j.at("words")), analyst->narration));
            audio_duration = j.at("duration").get<double>();
        });
    }
    if (ran("timeline")) {
        guarded("timeline.json", [&] {
            const Timeline tl = timeline_from_json(read_json(dir / "timeline.json"));
            absorb("timeline.json", check_timeline(tl));
            if (audio_duration && tl.duration != *audio_duration) {
                report.fail("duration-mismatch", "timeline.json", "duration differs from the audio duration");
            }
        });
    }
    return report;
}

}  // namespace datavideo
