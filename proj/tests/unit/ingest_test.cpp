#include <gtest/gtest.h>

#include <map>
#include <set>

#include "datavideo/error.hpp"
#include "datavideo/ingest.hpp"
#include "datavideo/prompts.hpp"
#include "test_support.hpp"

using namespace datavideo;
using testing_support::Rng;

namespace {

Errc error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return Errc::io_error;
}

// Reference reader written as an explicit state machine over RFC 4180.
std::vector<std::vector<std::string>> reference_csv(const std::string& s) {
    enum class St { field_start, unquoted, quoted, quote_in_quoted };
    std::vector<std::vector<std::string>> rows(1);
    std::string field;
    St st = St::field_start;
    auto push_field = [&] {
        rows.back().push_back(field);
        field.clear();
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char ch = s[i];
        switch (st) {
            case St::field_start:
            case St::unquoted:
                if (st == St::field_start && ch == '"') {
                    st = St::quoted;
                } else if (ch == ',') {
                    push_field();
                    st = St::field_start;
                } else if (ch == '\n' || (ch == '\r' && i + 1 < s.size() && s[i + 1] == '\n')) {
                    if (ch == '\r') ++i;
                    push_field();
                    rows.emplace_back();
                    st = St::field_start;
                } else {
                    field += ch;
                    st = St::unquoted;
                }
                break;
            case St::quoted:
                if (ch == '"') {
                    st = St::quote_in_quoted;
                } else {
                    field += ch;
                }
                break;
            case St::quote_in_quoted:
                if (ch == '"') {
                    field += '"';
                    st = St::quoted;
                } else {
                    --i;  // the quote closed the field; reprocess
                    st = St::unquoted;
                }
                break;
        }
    }
    if (st != St::field_start || !field.empty() || !rows.back().empty()) push_field();
    if (rows.back().empty()) rows.pop_back();
    return rows;
}

}  // namespace

TEST(ParseCsv, ReadsTypedCells) {
    const DataTable t = parse_csv("date,price\n2023-01-03,125.07", "Stocks");
    ASSERT_EQ(t.row_count(), 1u);
    ASSERT_EQ(t.column_count(), 2u);
    EXPECT_EQ(std::get<std::string>(t.at(0, 0)), "2023-01-03");
    ASSERT_TRUE(is_number(t.at(0, 1)));
    EXPECT_EQ(std::get<double>(t.at(0, 1)), 125.07);
    EXPECT_EQ(t.title(), "Stocks");
}

TEST(ParseCsv, EmptyFieldIsNull) {
    const DataTable t = parse_csv("a,b\n,2\n", "t");
    EXPECT_TRUE(is_null(t.at(0, 0)));
    EXPECT_EQ(cell_text(t.at(0, 0)), "");
}

TEST(ParseCsv, NumbersOnlyForPlainDecimals) {
    const DataTable t = parse_csv("v\n1e3\ninf\nnan\n-2.5\n.5\n0x10\n", "t");
    EXPECT_TRUE(is_number(t.at(0, 0)));
    EXPECT_FALSE(is_number(t.at(1, 0)));
    EXPECT_FALSE(is_number(t.at(2, 0)));
    EXPECT_EQ(std::get<double>(t.at(3, 0)), -2.5);
    EXPECT_EQ(std::get<double>(t.at(4, 0)), 0.5);
    EXPECT_FALSE(is_number(t.at(5, 0)));
}

TEST(ParseCsv, Errors) {
    EXPECT_EQ(error_of([] { parse_csv("a,b\n1,2\n3", "t"); }), Errc::ragged_rows);
    EXPECT_EQ(error_of([] { parse_csv("", "t"); }), Errc::empty_input);
    EXPECT_EQ(error_of([] { parse_csv(" \n\n", "t"); }), Errc::empty_input);
    EXPECT_EQ(error_of([] { parse_csv("a,a\n1,2", "t"); }), Errc::duplicate_column);
    EXPECT_EQ(error_of([] { parse_csv("a,\n1,2", "t"); }), Errc::empty_column_name);
    try {
        parse_csv("a,b\n1,2\n3", "t");
    } catch (const Error& e) {
        EXPECT_NE(e.detail().find("row 2"), std::string::npos) << e.detail();
        EXPECT_EQ(e.error_class(), ErrorClass::precondition);
    }
}

TEST(ParseCsv, QuotingCorpusMatchesReferenceReader) {
    const std::vector<std::string> corpus = {
        "a\n\"x,y\"",
        "a,b\n\"he said \"\"hi\"\"\",z",
        "a,b\n\"\",x",
        "a\n\"line1\nline2\"",
        "a,b\r\nfoo,bar\r\n",
        "a,b\nfoo,\"bar\"\n",
        "\"col,1\",col2\nv,w",
        "a\n\"\"\"\"",
        "a,b\n\"x\"\"\",\"\"\"y\"",
        "a,b,c\nx,\"y,z\",w\n",
        "a\n\"trailing space \"",
        "a,b\n\" lead\",\"tail \"",
        "a,b\nx\"y,z",
        "a\n\"multi\r\nline\"\n",
        "a,b\n\"a,b,c\",\"d\"\"e\"\n",
        "h1,h2\n\",\",\",\"",
        "a\n\"\n\"",
        "x,y\n\"q\"\"\"\"\",r",
        "one,two\nalpha,\"beta \"\"gamma\"\" delta\"\n",
        "a,b\n\"\",\"\"\n\"s\",\"t\"",
    };
    ASSERT_EQ(corpus.size(), 20u);
    for (const auto& text : corpus) {
        const auto expected = reference_csv(text);
        const DataTable t = parse_csv(text, "t");
        ASSERT_EQ(t.column_count(), expected.front().size()) << text;
        for (std::size_t c = 0; c < t.column_count(); ++c) EXPECT_EQ(t.columns()[c].name, expected[0][c]) << text;
        ASSERT_EQ(t.row_count() + 1, expected.size()) << text;
        for (std::size_t r = 0; r < t.row_count(); ++r) {
            for (std::size_t c = 0; c < t.column_count(); ++c) {
                EXPECT_EQ(cell_text(t.at(r, c)), expected[r + 1][c]) << text;
            }
        }
    }
}

TEST(ParseCsv, SerializeRoundTripProperty) {
    Rng rng(17);
    const std::string letters = "abcXYZ ,\"'-_";
    for (int iter = 0; iter < 200; ++iter) {
        const int cols = rng.uniform(1, 5);
        const int rows = rng.uniform(0, 8);
        std::vector<Column> columns;
        for (int c = 0; c < cols; ++c) {
            Column col{"c" + std::to_string(c) + (rng.chance(0.3) ? ",\"q\"" : ""), {}};
            const bool numeric = rng.chance(0.5);
            for (int r = 0; r < rows; ++r) {
                if (rng.chance(0.1)) {
                    col.values.push_back(std::monostate{});
                } else if (numeric) {
                    col.values.push_back(rng.uniform(-100000, 100000) / 100.0);
                } else {
                    std::string s = "s";
                    const int n = rng.uniform(0, 8);
                    for (int k = 0; k < n; ++k) s += letters[rng.index(letters.size())];
                    col.values.push_back(s);
                }
            }
            columns.push_back(std::move(col));
        }
        const DataTable table("random", std::move(columns));
        EXPECT_EQ(parse_csv(serialize_csv(table), "random"), table) << serialize_csv(table);
    }
}

TEST(RenderTableText, Format) {
    const DataTable t = parse_csv("date,price\n2023-01-03,125.07", "Stocks");
    EXPECT_EQ(render_table_text(t), "index | date | price\n0 | 2023-01-03 | 125.07");
    const DataTable empty = parse_csv("date,price\n", "Stocks");
    EXPECT_EQ(render_table_text(empty), "index | date | price");
}

TEST(RenderTableText, Truncation) {
    std::string csv = "n\n";
    for (int i = 0; i < 100; ++i) csv += std::to_string(i) + "\n";
    const DataTable t = parse_csv(csv, "t");
    const std::string text = render_table_text(t, 10);
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n';
    EXPECT_EQ(lines, 11u);  // header, 10 rows, marker
    EXPECT_TRUE(text.ends_with("\n... (90 more rows)"));
    EXPECT_EQ(render_table_text(t, std::nullopt).find("more rows"), std::string::npos);
}

TEST(RenderTableText, InjectiveOnDistinctTables) {
    Rng rng(23);
    std::map<std::string, std::string> seen;  // rendering -> csv
    for (int i = 0; i < 300; ++i) {
        std::string csv = "a,b\n";
        const int rows = rng.uniform(0, 3);
        for (int r = 0; r < rows; ++r) csv += std::to_string(rng.uniform(0, 3)) + ",x" + std::to_string(rng.uniform(0, 3)) + "\n";
        const DataTable t = parse_csv(csv, "t");
        const std::string text = render_table_text(t);
        auto [it, inserted] = seen.emplace(text, csv);
        if (!inserted) {
            EXPECT_EQ(parse_csv(it->second, "t"), t) << "two tables share a rendering";
        }
    }
}

TEST(DescriptionPrompt, ContainsListingLines) {
    const DataTable t = parse_csv("date,price\n2023-01-03,125.07", "Stock Prices");
    const std::string p = build_description_prompt(t).text;
    EXPECT_TRUE(p.starts_with("Give a short and consistent description of the following data table and columns:"));
    EXPECT_NE(p.find("The title of the data table is: Stock Prices"), std::string::npos);
    EXPECT_NE(p.find("\"Description\""), std::string::npos);
    EXPECT_NE(p.find("index | date | price\n0 | 2023-01-03 | 125.07"), std::string::npos);
}

TEST(DescriptionReply, Contract) {
    EXPECT_EQ(parse_description_response(R"({"Description": "Daily closing prices of four IT stocks."})").text,
              "Daily closing prices of four IT stocks.");
    EXPECT_EQ(parse_description_response("```json\n{\"Description\": \"x\"}\n```").text, "x");
    EXPECT_EQ(error_of([] { parse_description_response(R"({"description": "..."})"); }), Errc::schema_error);
}
