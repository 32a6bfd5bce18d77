#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "datavideo/core_model.hpp"
#include "datavideo/prompts.hpp"

namespace datavideo {

// RFC 4180 CSV with a header row. Numeric-looking cells become numbers,
// empty cells become null, everything else stays text.
// Throws EmptyInput, RaggedRows (1-based data row number), DuplicateColumn,
// EmptyColumnName.
DataTable parse_csv(std::string_view raw, std::string title);

// Inverse of parse_csv for tables whose text cells do not look numeric.
std::string serialize_csv(const DataTable& table);

// "index | col | ..." header, then "<row> | v | ..." per row. When more than
// max_rows rows exist, the first max_rows are shown followed by
// "... (N more rows)". std::nullopt means unlimited.
std::string render_table_text(const DataTable& table, std::optional<std::size_t> max_rows = default_prompt_rows);

PromptText build_description_prompt(const DataTable& table,
                                    std::optional<std::size_t> max_rows = default_prompt_rows);

// Reads the "Description" key from the agent reply. Throws SchemaError,
// EmptyDescription, or the extract_json errors.
DataDescription parse_description_response(std::string_view raw);

}  // namespace datavideo
