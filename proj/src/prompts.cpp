#include "datavideo/prompts.hpp"

#include <set>

#include "datavideo/error.hpp"

namespace datavideo {

// Defined in the build-generated prompt_templates.cpp.
namespace embedded {
extern const char* const description_prompt;
extern const char* const analyst_prompt;
extern const char* const designer_prompt;
}  // namespace embedded

std::string_view to_string(TemplateId id) {
    switch (id) {
        case TemplateId::description: return "description";
        case TemplateId::analyst: return "analyst";
        case TemplateId::designer: return "designer";
    }
    return {};
}

std::string_view template_text(TemplateId id) {
    switch (id) {
        case TemplateId::description: return embedded::description_prompt;
        case TemplateId::analyst: return embedded::analyst_prompt;
        case TemplateId::designer: return embedded::designer_prompt;
    }
    return {};
}

namespace {

bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

std::string substitute_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::set<std::string> used;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        bool is_marker = close != std::string_view::npos && close > open + 2;
        if (is_marker) {
            for (auto i = open + 2; i < close; ++i) is_marker = is_marker && is_name_char(tmpl[i]);
        }
        if (!is_marker) {
            throw Error(Errc::template_placeholder,
                        "stray '{{' at offset " + std::to_string(open) + " is not a placeholder marker");
        }
        const std::string name(tmpl.substr(open + 2, close - open - 2));
        const auto it = values.find(name);
        if (it == values.end()) {
            throw Error(Errc::template_placeholder, "no value for placeholder {{" + name + "}}");
        }
        out.append(tmpl.substr(pos, open - pos));
        out.append(it->second);
        used.insert(name);
        pos = close + 2;
    }
    for (const auto& [name, value] : values) {
        if (!used.contains(name)) {
            throw Error(Errc::template_placeholder, "template has no placeholder {{" + name + "}}");
        }
    }
    return out;
}

PromptText render_prompt(TemplateId id, const std::map<std::string, std::string>& values) {
    return PromptText{substitute_placeholders(template_text(id), values), id};
}

}  // namespace datavideo
