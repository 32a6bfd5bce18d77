#include "datavideo/ingest.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <vector>

#include "datavideo/agent_runtime.hpp"
#include "datavideo/error.hpp"

namespace datavideo {

namespace {

using Record = std::vector<std::string>;

struct Records {
    std::vector<Record> rows;
    std::vector<bool> blank;  // the line held no characters at all, not even quotes
};

Records read_records(std::string_view raw) {
    Records records;
    Record current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool touched = false;

    auto end_field = [&] {
        current.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        const bool blank = !touched && current.empty() && field.empty();
        end_field();
        records.rows.push_back(std::move(current));
        records.blank.push_back(blank);
        current.clear();
        touched = false;
    };

    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char c = raw[i];
        if (c != '\r' && c != '\n') touched = true;
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < raw.size() && raw[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field_started && field.empty()) {
                    in_quotes = true;
                    field_started = true;
                } else {
                    field.push_back(c);
                }
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
                end_record();
                break;
            case '\n':
                end_record();
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (field_started || !field.empty() || !current.empty()) end_record();
    return records;
}

Cell type_cell(std::string text) {
    if (text.empty()) return std::monostate{};
    const auto t = trim(text);
    if (!t.empty()) {
        double value = 0.0;
        const char* first = t.data();
        const char* last = t.data() + t.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec == std::errc{} && ptr == last && std::isfinite(value)) {
            // from_chars accepts "inf"/"nan" spellings; only plain decimals count.
            const char lead = *first == '-' ? (t.size() > 1 ? first[1] : '\0') : *first;
            if ((lead >= '0' && lead <= '9') || lead == '.') return value;
        }
    }
    return text;
}

bool needs_quotes(std::string_view s) {
    return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_field(std::string& out, std::string_view s) {
    if (!needs_quotes(s)) {
        out.append(s);
        return;
    }
    out.push_back('"');
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

}  // namespace

DataTable parse_csv(std::string_view raw, std::string title) {
    if (trim(raw).empty()) throw Error(Errc::empty_input, "CSV input is empty");
    auto [records, blank] = read_records(raw);
    // A final line terminator must not become an extra empty row; a quoted
    // empty field ("") still counts as a row.
    while (!records.empty() && blank[records.size() - 1]) records.pop_back();
    if (records.empty()) throw Error(Errc::empty_input, "CSV input has no header row");

    const Record& header = records.front();
    std::set<std::string> seen;
    std::vector<Column> columns;
    columns.reserve(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].empty()) {
            throw Error(Errc::empty_column_name, "header field " + std::to_string(i + 1) + " is empty");
        }
        if (!seen.insert(header[i]).second) throw Error(Errc::duplicate_column, "'" + header[i] + "'");
        columns.push_back(Column{header[i], {}});
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != header.size()) {
            throw Error(Errc::ragged_rows, "row " + std::to_string(r) + " has " +
                                               std::to_string(records[r].size()) + " fields, header has " +
                                               std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < header.size(); ++c) {
            columns[c].values.push_back(type_cell(std::move(records[r][c])));
        }
    }
    return DataTable(std::move(title), std::move(columns));
}

std::string serialize_csv(const DataTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        if (c) out.push_back(',');
        write_field(out, table.columns()[c].name);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        for (std::size_t c = 0; c < table.column_count(); ++c) {
            if (c) out.push_back(',');
            write_field(out, cell_text(table.at(r, c)));
        }
        // a lone empty field would otherwise read back as a blank line
        if (table.column_count() == 1 && is_null(table.at(r, 0))) out += "\"\"";
        out.push_back('\n');
    }
    return out;
}

std::string render_table_text(const DataTable& table, std::optional<std::size_t> max_rows) {
    std::string out = "index";
    for (const auto& col : table.columns()) {
        out += " | ";
        out += col.name;
    }
    const std::size_t shown = max_rows ? std::min(*max_rows, table.row_count()) : table.row_count();
    for (std::size_t r = 0; r < shown; ++r) {
        out += '\n';
        out += std::to_string(r);
        for (std::size_t c = 0; c < table.column_count(); ++c) {
            out += " | ";
            out += cell_text(table.at(r, c));
        }
    }
    if (shown < table.row_count()) {
        out += "\n... (" + std::to_string(table.row_count() - shown) + " more rows)";
    }
    return out;
}

PromptText build_description_prompt(const DataTable& table, std::optional<std::size_t> max_rows) {
    return render_prompt(TemplateId::description,
                         {{"table", render_table_text(table, max_rows)}, {"title", table.title()}});
}

DataDescription parse_description_response(std::string_view raw) {
    const Json reply = extract_json(raw);
    if (!reply.is_object()) throw Error(Errc::schema_error, "\"Description\": reply is not a JSON object");
    if (!reply.contains("Description")) throw Error(Errc::schema_error, "\"Description\": missing key");
    const Json& value = reply["Description"];
    if (!value.is_string()) throw Error(Errc::schema_error, "\"Description\": value is not a string");
    auto text = value.get<std::string>();
    if (trim(text).empty()) throw Error(Errc::empty_description, "description is blank");
    return DataDescription{std::move(text)};
}

}  // namespace datavideo
