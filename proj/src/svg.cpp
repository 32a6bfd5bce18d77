#include "datavideo/svg.hpp"

#include <boost/property_tree/detail/rapidxml.hpp>
#include <set>
#include <sstream>

#include "datavideo/error.hpp"

namespace datavideo {

namespace rx = boost::property_tree::detail::rapidxml;

std::optional<std::string> SvgElement::attr(std::string_view name) const {
    for (const auto& [k, v] : attributes) {
        if (k == name) return v;
    }
    return std::nullopt;
}

std::vector<std::string> SvgElement::classes() const {
    std::vector<std::string> out;
    std::istringstream in(attr("class").value_or(""));
    for (std::string c; in >> c;) out.push_back(c);
    return out;
}

bool SvgElement::has_class(std::string_view cls) const {
    for (const auto& c : classes()) {
        if (c == cls) return true;
    }
    return false;
}

std::optional<std::size_t> SvgDoc::find(std::string_view id) const {
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (elements_[i].id == id) return i;
    }
    return std::nullopt;
}

std::vector<std::size_t> SvgDoc::ancestors(std::size_t i) const {
    std::vector<std::size_t> out;
    for (auto p = elements_[i].parent; p; p = elements_[*p].parent) out.push_back(*p);
    return out;
}

namespace {

constexpr int parse_flags = rx::parse_validate_closing_tags;

void collect(const rx::xml_node<char>* node, std::optional<std::size_t> parent, std::vector<SvgElement>& out) {
    const std::size_t self = out.size();
    SvgElement el;
    el.tag.assign(node->name(), node->name_size());
    el.parent = parent;
    for (auto* a = node->first_attribute(); a; a = a->next_attribute()) {
        std::string name(a->name(), a->name_size());
        std::string value(a->value(), a->value_size());
        if (name == "id") {
            el.id = std::move(value);
        } else {
            el.attributes.emplace_back(std::move(name), std::move(value));
        }
    }
    for (auto* c = node->first_node(); c; c = c->next_sibling()) {
        if (c->type() == rx::node_data || c->type() == rx::node_cdata) el.text.append(c->value(), c->value_size());
    }
    if (el.text.find_first_not_of(" \t\r\n") == std::string::npos) el.text.clear();
    out.push_back(std::move(el));
    if (parent) out[*parent].children.push_back(self);
    for (auto* c = node->first_node(); c; c = c->next_sibling()) {
        if (c->type() == rx::node_element) collect(c, self, out);
    }
}

}  // namespace

SvgDoc parse_svg(std::string_view raw) {
    std::vector<char> buffer(raw.begin(), raw.end());
    buffer.push_back('\0');
    rx::xml_document<char> xml;
    try {
        xml.parse<parse_flags>(buffer.data());
    } catch (const rx::parse_error& e) {
        const auto offset = e.where<char>() - buffer.data();
        throw Error(Errc::xml_parse_error, std::string(e.what()) + " at byte " + std::to_string(offset));
    }

    const rx::xml_node<char>* root = nullptr;
    for (auto* n = xml.first_node(); n; n = n->next_sibling()) {
        if (n->type() != rx::node_element) continue;
        if (root) throw Error(Errc::xml_parse_error, "more than one root element");
        root = n;
    }
    if (!root) throw Error(Errc::xml_parse_error, "no root element");
    const std::string_view root_name(root->name(), root->name_size());
    if (root_name != "svg" && root_name != "svg:svg") {
        throw Error(Errc::not_svg, "root element is <" + std::string(root_name) + ">");
    }

    SvgDoc doc;
    collect(root, std::nullopt, doc.elements_);

    std::set<std::string> taken;
    for (auto& el : doc.elements_) {
        if (!el.id.empty()) taken.insert(el.id);
    }
    std::set<std::string> seen;
    std::size_t counter = 0;
    for (auto& el : doc.elements_) {
        if (!el.id.empty() && seen.insert(el.id).second) continue;
        std::string id;
        do {
            id = "e" + std::to_string(counter++);
        } while (taken.contains(id));
        taken.insert(id);
        seen.insert(id);
        el.id = std::move(id);
        el.synthesized_id = true;
    }
    return doc;
}

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

namespace {

void write_element(const SvgDoc& doc, std::size_t i, std::string& out, int depth, const SvgDecorator& decorate) {
    const SvgElement& el = doc.at(i);
    const std::string extra_children = decorate.children ? decorate.children(el) : std::string{};
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "<" + el.tag + " id=\"" + xml_escape(el.id) + "\"";
    for (const auto& [k, v] : el.attributes) out += " " + k + "=\"" + xml_escape(v) + "\"";
    if (decorate.attributes) out += decorate.attributes(el);
    if (el.children.empty() && el.text.empty() && extra_children.empty()) {
        out += "/>\n";
        return;
    }
    out += ">";
    out += extra_children;
    out += xml_escape(el.text);
    if (!el.children.empty()) {
        out += "\n";
        for (auto c : el.children) write_element(doc, c, out, depth + 1, decorate);
        out.append(static_cast<std::size_t>(depth) * 2, ' ');
    }
    out += "</" + el.tag + ">\n";
}

}  // namespace

std::string serialize_svg(const SvgDoc& doc) { return serialize_svg(doc, SvgDecorator{}); }

std::string serialize_svg(const SvgDoc& doc, const SvgDecorator& decorate) {
    std::string out;
    write_element(doc, 0, out, 0, decorate);
    return out;
}

}  // namespace datavideo
