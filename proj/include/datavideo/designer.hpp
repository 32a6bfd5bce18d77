#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "datavideo/agent_runtime.hpp"
#include "datavideo/core_model.hpp"
#include "datavideo/prompts.hpp"
#include "datavideo/timeline.hpp"

namespace datavideo {

PromptText build_designer_prompt(const VisualizationSpec& vis, std::string_view narration, const DataTable& table,
                                 std::optional<std::size_t> max_prompt_rows = default_prompt_rows);

// Throws SchemaError, UnknownAnimation, UnknownAnnotationType and
// IndexOutOfRange. Annotation items with an empty type list are dropped.
DesignerOutput parse_designer_response(std::string_view raw, const DataTable& table);

Json designer_output_to_json(const DesignerOutput& out);

// Maps a directive to the element ids it animates. Throws UnresolvedTarget.
using TargetResolver = std::function<std::set<std::string>(const AnimationDirective&)>;

// Resolver for use before any rendering exists: a directive stands for its
// normalized target text and each of its rows, so two directives share an
// element when they name the same target or a common row.
std::set<std::string> textual_targets(const AnimationDirective& directive);

// Locates segments in list order, each search starting at the previous
// segment's start and falling back to the beginning of the narration.
std::vector<std::optional<Span>> locate_segments(const std::vector<std::string>& segments,
                                                 std::string_view narration);

// Legality rules: Axes-fade-in only inside the first sentence; emphasis and
// exit only after the target's entrance; no emphasis after the target's
// exit; every segment verbatim in the narration.
ValidationReport validate_animation_sequence(const std::vector<AnimationDirective>& directives,
                                             std::string_view narration,
                                             const TargetResolver& resolve = textual_targets);

// Collapses repeated (animation, segment, target) directives, keeping the first.
std::vector<AnimationDirective> collapse_duplicates(const std::vector<AnimationDirective>& directives,
                                                    ValidationReport& report);

Checked<DesignerOutput> check_designer_reply(std::string_view raw, const VisualizationSpec& base,
                                             std::string_view narration, const DataTable& table,
                                             const TargetResolver& resolve = textual_targets);

struct DesignerResult {
    DesignerOutput output;
    ValidationReport report;
    RepairReport repair;
};

DesignerResult run_designer(ChatSession& session, const VisualizationSpec& vis, std::string_view narration,
                            const DataTable& table, const AgentConfig& config = {},
                            const TargetResolver& resolve = textual_targets);

}  // namespace datavideo
