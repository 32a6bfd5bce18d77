#pragma once

#include <functional>
#include <string>

#include "datavideo/core_model.hpp"

namespace datavideo::vega {

// "line" for both "mark": "line" and "mark": {"type": "line"}; empty if absent.
std::string mark_type(const Json& view);

// Visits every unit view (a view with a "mark"), descending through "layer"
// lists. path is a JSON-pointer-like location such as "/layer/1".
void for_each_unit_view(const Json& spec, const std::function<void(const Json&, const std::string&)>& visit);

// Field names referenced by an encoding object, including arrays of channel
// definitions (tooltip, detail).
std::vector<std::string> encoding_fields(const Json& encoding);

// Copy of spec whose top-level "data" holds the table rows, in row order, so
// renderer output can be bound back to row indices.
Json bind_table_data(const Json& spec, const DataTable& table);

// Title text, whether given as a string, a list of lines, or {"text": ...}.
std::string title_text(const Json& spec);

}  // namespace datavideo::vega
