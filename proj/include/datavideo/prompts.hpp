#pragma once

#include <map>
#include <string>
#include <string_view>

namespace datavideo {

enum class TemplateId { description, analyst, designer };

std::string_view to_string(TemplateId id);

// The stored template, with {{name}} placeholder markers.
std::string_view template_text(TemplateId id);

struct PromptText {
    std::string text;
    TemplateId template_id = TemplateId::description;
};

// Substitutes every {{name}} marker in a single pass; substituted values are
// never rescanned. Throws TemplatePlaceholder if a marker has no value or a
// value is supplied for a marker the template does not contain.
PromptText render_prompt(TemplateId id, const std::map<std::string, std::string>& values);

// Same substitution over arbitrary template text.
std::string substitute_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace datavideo
