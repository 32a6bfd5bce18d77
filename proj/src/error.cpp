#include "datavideo/error.hpp"

namespace datavideo {

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::unknown_animation: return "UnknownAnimation";
        case Errc::unknown_insight_type: return "UnknownInsightType";
        case Errc::unknown_visualization_type: return "UnknownVisualizationType";
        case Errc::unknown_annotation_type: return "UnknownAnnotationType";
        case Errc::invalid_table: return "InvalidTable";
        case Errc::empty_input: return "EmptyInput";
        case Errc::ragged_rows: return "RaggedRows";
        case Errc::duplicate_column: return "DuplicateColumn";
        case Errc::empty_column_name: return "EmptyColumnName";
        case Errc::empty_description: return "EmptyDescription";
        case Errc::template_placeholder: return "TemplatePlaceholder";
        case Errc::no_json_found: return "NoJsonFound";
        case Errc::malformed_json: return "MalformedJson";
        case Errc::schema_error: return "SchemaError";
        case Errc::backend_timeout: return "BackendTimeout";
        case Errc::backend_http_error: return "BackendHTTPError";
        case Errc::transcript_exhausted: return "TranscriptExhausted";
        case Errc::transcript_mismatch: return "TranscriptMismatch";
        case Errc::repair_exhausted: return "RepairExhausted";
        case Errc::invalid_config: return "InvalidConfig";
        case Errc::index_out_of_range: return "IndexOutOfRange";
        case Errc::xml_parse_error: return "XmlParseError";
        case Errc::not_svg: return "NotSvg";
        case Errc::unbound_mark: return "UnboundMark";
        case Errc::unresolved_target: return "UnresolvedTarget";
        case Errc::segment_not_found: return "SegmentNotFound";
        case Errc::no_word_overlap: return "NoWordOverlap";
        case Errc::renderer_rejected_spec: return "RendererRejectedSpec";
        case Errc::renderer_crashed: return "RendererCrashed";
        case Errc::metadata_missing: return "MetadataMissing";
        case Errc::tts_failure: return "TtsFailure";
        case Errc::empty_narration: return "EmptyNarration";
        case Errc::synth_failure: return "SynthFailure";
        case Errc::precondition: return "PreconditionError";
        case Errc::unknown_stage: return "UnknownStage";
        case Errc::manifest_not_found: return "ManifestNotFound";
        case Errc::io_error: return "IoError";
    }
    return "Unknown";
}

ErrorClass errc_class(Errc code) {
    switch (code) {
        case Errc::empty_input:
        case Errc::ragged_rows:
        case Errc::duplicate_column:
        case Errc::empty_column_name:
        case Errc::invalid_table:
        case Errc::invalid_config:
        case Errc::precondition:
        case Errc::unknown_stage:
        case Errc::manifest_not_found:
        case Errc::template_placeholder:
        case Errc::io_error:
            return ErrorClass::precondition;
        case Errc::backend_timeout:
        case Errc::backend_http_error:
        case Errc::transcript_exhausted:
        case Errc::transcript_mismatch:
        case Errc::xml_parse_error:
        case Errc::not_svg:
        case Errc::renderer_rejected_spec:
        case Errc::renderer_crashed:
        case Errc::metadata_missing:
        case Errc::unbound_mark:
        case Errc::tts_failure:
        case Errc::empty_narration:
        case Errc::synth_failure:
        case Errc::no_word_overlap:
            return ErrorClass::adapter;
        default:
            return ErrorClass::agent_contract;
    }
}

}  // namespace datavideo
