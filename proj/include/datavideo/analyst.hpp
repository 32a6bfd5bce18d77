#pragma once

#include "datavideo/agent_runtime.hpp"
#include "datavideo/core_model.hpp"
#include "datavideo/prompts.hpp"

namespace datavideo {

PromptText build_analyst_prompt(const DataDescription& description, const DataTable& table,
                                std::optional<std::size_t> max_prompt_rows = default_prompt_rows);

// Requires "Insights", "Visualization", "Visualization_Type" and "Narration".
// Throws SchemaError, UnknownInsightType, UnknownVisualizationType, or the
// extract_json errors.
AnalystOutput parse_analyst_response(std::string_view raw, const DataTable& table);

// Structural checks only; never throws. Violations: structure, layer
// placement, multi-view compositions, the "index" column in any encoding.
// Advisories: line chart without points, pie chart without a text layer,
// titles of 10 or more words, mark type not matching the declared type.
ValidationReport validate_visualization(const VisualizationSpec& spec);

// Mirrors the final output format keys of the analyst prompt.
Json analyst_output_to_json(const AnalystOutput& out);

struct AnalystResult {
    AnalystOutput output;
    ValidationReport report;
    RepairReport repair;
};

// One completion per attempt. Throws PreconditionError for an empty table
// and RepairExhausted when no reply passes.
AnalystResult run_analyst(ChatSession& session, const DataDescription& description, const DataTable& table,
                          const AgentConfig& config = {});

// Contract applied to each reply inside run_analyst.
Checked<AnalystOutput> check_analyst_reply(std::string_view raw, const DataTable& table);

}  // namespace datavideo
