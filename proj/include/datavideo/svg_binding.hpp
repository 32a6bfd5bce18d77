#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "datavideo/core_model.hpp"
#include "datavideo/svg.hpp"

namespace datavideo {

// Renderer contract: groups carry one of these classes; the direct children
// of a mark group are the mark items, each with data-row (0-based row
// indices joined by ';', empty for inline-data layers) and, when a color or
// detail field exists, data-series.
inline constexpr const char* mark_group_class = "role-mark";
inline constexpr const char* axis_group_class = "role-axis";
inline constexpr const char* legend_group_class = "role-legend";
inline constexpr const char* title_group_class = "role-title";

enum class Role { mark, axis, legend, title, annotation };
std::string_view to_string(Role r);

struct MarkEntry {
    std::set<Role> roles;
    std::set<std::size_t> data_rows;
    std::optional<std::string> series_key;
};

struct MarkIndex {
    std::map<std::string, MarkEntry> entries;
    std::vector<std::string> order;  // entry ids in document order

    std::vector<std::string> ids_with_role(Role r) const;
    bool contains(const std::string& id) const { return entries.contains(id); }
};

// Throws UnboundMark when a mark item has no readable data-row attribute or
// names a row outside the table.
MarkIndex index_marks(const SvgDoc& svg, const VisualizationSpec& spec, const DataTable& table);

// Re-labels the given elements as annotations; they stop being mark targets.
void mark_annotations(MarkIndex& index, const std::vector<std::string>& annotation_ids, const SvgDoc& svg);

// Rows named by the directive select intersecting marks; the target text
// selects axes, legend, title, all marks, or marks whose series key occurs in
// it. Both results are united. Throws UnresolvedTarget when nothing matches.
std::set<std::string> resolve_targets(const AnimationDirective& directive, const MarkIndex& index);

struct AnnotationDiff {
    std::vector<std::string> added;      // ids in the annotated document
    std::vector<std::string> unmatched;  // ids in the base document with no counterpart
};

// Multiset match on (tag, role path, geometry-free attributes, text).
std::vector<std::string> diff_annotations(const SvgDoc& base, const SvgDoc& annotated);
AnnotationDiff diff_annotations_detailed(const SvgDoc& base, const SvgDoc& annotated);

// Keeps the added elements that have no element children, i.e. the ones that
// are drawn rather than grouping others.
std::vector<std::string> annotation_leaves(const SvgDoc& annotated, const std::vector<std::string>& added);

struct AnnotationAssignment {
    std::vector<std::vector<std::string>> per_directive;  // parallel to the directive list
    ValidationReport report;
};

// Elements with data rows go to the directive sharing the most rows; others
// to the directive whose bound marks lie nearest; the rest to the first
// directive.
AnnotationAssignment match_annotation_directives(const std::vector<std::string>& annotation_ids,
                                                 const std::vector<AnnotationDirective>& directives,
                                                 const MarkIndex& index, const SvgDoc& annotated);

Json to_json(const MarkIndex& index);

}  // namespace datavideo
