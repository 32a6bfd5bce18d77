#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "datavideo/pipeline.hpp"

namespace fs = std::filesystem;
using namespace datavideo;

namespace {

int exit_code(const Error& e) {
    switch (e.error_class()) {
        case ErrorClass::precondition: return 2;
        case ErrorClass::agent_contract: return 3;
        case ErrorClass::adapter: return 4;
    }
    return 1;
}

void print_report(const ValidationReport& report) {
    for (const auto& v : report.violations) std::cout << "violation [" << v.code << "] " << v.path << ": " << v.message << "\n";
    for (const auto& v : report.advisories) std::cout << "advisory [" << v.code << "] " << v.path << ": " << v.message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Turn a CSV table into a narrated, animated data video"};
    app.require_subcommand(1);

    std::string input, title, config_path, export_kind;
    bool mock = false, no_cache = false;
    auto* run = app.add_subcommand("run", "Run the whole pipeline");
    run->add_option("--input", input, "CSV file");
    run->add_option("--title", title, "Table title");
    run->add_option("--config", config_path, "Project config (JSON)");
    run->add_flag("--mock", mock, "Use scripted replies and mock adapters");
    run->add_flag("--no-cache", no_cache, "Do not read or write the response cache");
    run->add_option("--export", export_kind, "html, video or both")->check(CLI::IsMember({"html", "video", "both"}));

    std::string project, stage;
    auto* inspect = app.add_subcommand("inspect", "Summarize one stage of a project");
    inspect->add_option("--project", project, "Project directory")->required();
    inspect->add_option("--stage", stage, "Stage name")->required();

    auto* validate = app.add_subcommand("validate", "Re-check the persisted artifacts of a project");
    validate->add_option("--project", project, "Project directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            ProjectConfig config;
            if (!config_path.empty()) {
                config = load_config(config_path);
            } else {
                config.output_dir = fs::current_path() / "out";
            }
            if (!input.empty()) config.input_csv = fs::absolute(input);
            if (!title.empty()) config.title = title;
            if (mock) config.mock_mode = true;
            if (no_cache) config.cache_dir.reset();
            if (export_kind == "html") config.export_kind = ExportKind::html;
            if (export_kind == "video") config.export_kind = ExportKind::video;
            if (export_kind == "both") config.export_kind = ExportKind::both;
            const ProjectManifest manifest = run_pipeline(config);
            for (const auto& s : manifest.stages) {
                std::cout << s.name << ": " << s.status << " (" << s.artifacts.size() << " artifacts)\n";
            }
            std::cout << "project written to " << config.output_dir.string() << "\n";
        } else if (*inspect) {
            std::cout << inspect_stage(project, stage);
        } else if (*validate) {
            const ValidationReport report = validate_project(project);
            print_report(report);
            if (!report.passing()) {
                std::cout << "invalid: " << report.violations.size() << " violation(s)\n";
                return 3;
            }
            std::cout << "valid\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
