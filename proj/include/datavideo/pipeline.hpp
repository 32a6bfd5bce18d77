#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "datavideo/agent_runtime.hpp"
#include "datavideo/core_model.hpp"
#include "datavideo/error.hpp"
#include "datavideo/media.hpp"

namespace datavideo {

enum class AdapterKind { mock, command };

struct AdapterConfig {
    AdapterKind kind = AdapterKind::mock;
    std::string command;
    std::chrono::milliseconds timeout = default_adapter_timeout;
};

enum class ExportKind { html, video, both };

struct ProjectConfig {
    std::filesystem::path input_csv;
    std::string title;
    BackendConfig backend;
    // Scripted replies per agent role, used when the backend is a mock.
    std::filesystem::path description_transcript;
    std::filesystem::path analyst_transcript;
    std::filesystem::path designer_transcript;
    AdapterConfig renderer;
    AdapterConfig tts;
    AdapterConfig synth;
    int max_repair_attempts = default_max_attempts;
    std::optional<std::size_t> max_prompt_rows = default_prompt_rows;
    int fps = default_fps;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> cache_dir;
    // Replaces the chat backend and all three adapters with their mocks.
    bool mock_mode = false;
    ExportKind export_kind = ExportKind::both;

    // Throws InvalidConfig, or PreconditionError when the input is missing.
    void validate() const;
};

// Relative paths in the file are resolved against the file's directory.
ProjectConfig load_config(const std::filesystem::path& file);
ProjectConfig config_from_json(const Json& j, const std::filesystem::path& base_dir);

inline constexpr std::array<std::string_view, 10> pipeline_stages = {
    "ingest", "description", "analyst", "render_base", "designer", "render_annotated",
    "binding", "tts", "timeline", "export"};

struct ArtifactRecord {
    std::string path;  // relative to the project directory
    std::string sha256;
};

struct StageRecord {
    std::string name;
    std::string status;  // "ok" or "failed"
    std::string started_at;
    std::string finished_at;
    std::vector<ArtifactRecord> artifacts;
};

struct FailureRecord {
    std::string stage;
    std::string error;        // error code name
    std::string error_class;  // precondition, agent_contract or adapter
    std::string message;
};

struct ProjectManifest {
    std::vector<StageRecord> stages;
    std::optional<FailureRecord> failure;

    const StageRecord* stage(std::string_view name) const;
};

Json to_json(const ProjectManifest& m);
ProjectManifest manifest_from_json(const Json& j);
ProjectManifest load_manifest(const std::filesystem::path& project_dir);

// A stage failed; the partial manifest has been written.
class PipelineError : public Error {
public:
    PipelineError(const Error& cause, std::string stage, ProjectManifest manifest)
        : Error(cause.code(), "stage " + stage + ": " + cause.detail()),
          stage_(std::move(stage)),
          manifest_(std::move(manifest)) {}
    const std::string& stage() const { return stage_; }
    const ProjectManifest& manifest() const { return manifest_; }

private:
    std::string stage_;
    ProjectManifest manifest_;
};

// Runs every stage in order, persisting artifacts and manifest.json into the
// output directory. Throws PipelineError.
ProjectManifest run_pipeline(const ProjectConfig& config);

// Throws ManifestNotFound and UnknownStage.
std::string inspect_stage(const std::filesystem::path& project_dir, std::string_view stage);

// Re-runs the validators on the persisted artifacts and checks their hashes.
ValidationReport validate_project(const std::filesystem::path& project_dir);

}  // namespace datavideo
