#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace datavideo {

// Broad failure classes. These drive CLI exit codes.
enum class ErrorClass {
    precondition,    // bad input or configuration, detected before work starts
    agent_contract,  // an agent reply violated its output contract
    adapter,         // an external tool or backend failed
};

enum class Errc {
    // core_model
    unknown_animation,
    unknown_insight_type,
    unknown_visualization_type,
    unknown_annotation_type,
    invalid_table,
    // ingest
    empty_input,
    ragged_rows,
    duplicate_column,
    empty_column_name,
    empty_description,
    // prompts
    template_placeholder,
    // agent_runtime
    no_json_found,
    malformed_json,
    schema_error,
    backend_timeout,
    backend_http_error,
    transcript_exhausted,
    transcript_mismatch,
    repair_exhausted,
    invalid_config,
    // designer
    index_out_of_range,
    // svg_binding
    xml_parse_error,
    not_svg,
    unbound_mark,
    unresolved_target,
    // timeline
    segment_not_found,
    no_word_overlap,
    // media
    renderer_rejected_spec,
    renderer_crashed,
    metadata_missing,
    tts_failure,
    empty_narration,
    synth_failure,
    // pipeline
    precondition,
    unknown_stage,
    manifest_not_found,
    io_error,
};

std::string_view errc_name(Errc code);
ErrorClass errc_class(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code),
          detail_(std::move(message)) {}

    Errc code() const noexcept { return code_; }
    ErrorClass error_class() const noexcept { return errc_class(code_); }
    // Message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

}  // namespace datavideo
