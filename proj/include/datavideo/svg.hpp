#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace datavideo {

struct SvgElement {
    std::string id;  // original id, or a synthesized "e<k>"
    bool synthesized_id = false;
    std::string tag;
    std::vector<std::pair<std::string, std::string>> attributes;  // document order, without "id"
    std::string text;                                            // concatenated direct character data
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;

    std::optional<std::string> attr(std::string_view name) const;
    std::vector<std::string> classes() const;
    bool has_class(std::string_view cls) const;
};

// Elements are stored in document (pre-order) sequence; index 0 is the root.
class SvgDoc {
public:
    const std::vector<SvgElement>& elements() const { return elements_; }
    const SvgElement& root() const { return elements_.front(); }
    const SvgElement& at(std::size_t i) const { return elements_[i]; }
    std::size_t size() const { return elements_.size(); }
    std::optional<std::size_t> find(std::string_view id) const;

    // Ancestor indices from the parent up to the root.
    std::vector<std::size_t> ancestors(std::size_t i) const;

private:
    friend SvgDoc parse_svg(std::string_view raw);
    std::vector<SvgElement> elements_;
};

// Elements without an id (or repeating an earlier id) get "e0", "e1", ... in
// document order, skipping names already taken. Throws XmlParseError with the
// byte offset of the failure and NotSvg when the root is not <svg>.
SvgDoc parse_svg(std::string_view raw);

// Writes every element with its (possibly synthesized) id attribute so the
// output can be addressed by timeline element ids.
std::string serialize_svg(const SvgDoc& doc);

// Extra markup per element: attribute text (leading space included) and
// child elements written before the original children.
struct SvgDecorator {
    std::function<std::string(const SvgElement&)> attributes;
    std::function<std::string(const SvgElement&)> children;
};
std::string serialize_svg(const SvgDoc& doc, const SvgDecorator& decorate);

std::string xml_escape(std::string_view text);

}  // namespace datavideo
