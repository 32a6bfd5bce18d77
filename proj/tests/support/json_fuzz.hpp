#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "test_support.hpp"

namespace testing_support {

inline std::string random_string(Rng& rng, bool brackets = true) {
    const std::string alphabet = brackets ? "abcXYZ 019{}[]\"\\:,\n\t" : "abcXYZ 019\"\\:,\n\t";
    std::string s;
    const int n = rng.uniform(0, 12);
    for (int i = 0; i < n; ++i) s += alphabet[rng.index(alphabet.size())];
    return s;
}

inline nlohmann::json random_json_value(Rng& rng, int depth, bool brackets = true) {
    const int kind = rng.uniform(0, depth > 0 ? 6 : 4);
    switch (kind) {
        case 0: return nullptr;
        case 1: return rng.chance(0.5);
        case 2: return rng.uniform(-1000, 1000);
        case 3: return rng.real(-1e3, 1e3);
        case 4: return random_string(rng, brackets);
        case 5: {
            nlohmann::json a = nlohmann::json::array();
            const int n = rng.uniform(0, 4);
            for (int i = 0; i < n; ++i) a.push_back(random_json_value(rng, depth - 1, brackets));
            return a;
        }
        default: {
            nlohmann::json o = nlohmann::json::object();
            const int n = rng.uniform(0, 4);
            for (int i = 0; i < n; ++i) o[random_string(rng, brackets)] = random_json_value(rng, depth - 1, brackets);
            return o;
        }
    }
}

// A top-level object or array.
inline nlohmann::json random_json_document(Rng& rng, bool brackets = true) {
    nlohmann::json doc = rng.chance(0.7) ? nlohmann::json::object() : nlohmann::json::array();
    const int n = rng.uniform(1, 4);
    for (int i = 0; i < n; ++i) {
        if (doc.is_object()) {
            doc["k" + std::to_string(i)] = random_json_value(rng, 3, brackets);
        } else {
            doc.push_back(random_json_value(rng, 3, brackets));
        }
    }
    return doc;
}

struct FuzzReply {
    std::string text;
    std::string embedded;  // the JSON text placed in the reply, possibly damaged
};

// Wraps a document in prose and/or a code fence; prose never contains
// brackets, so the embedded text is the only candidate.
inline FuzzReply random_reply(Rng& rng) {
    static const std::vector<std::string> before = {"", "Here is the result:\n", "Sure. ", "Answer follows.\n\n"};
    static const std::vector<std::string> after = {"", "\nLet me know if you need more.", " Done.", "\n"};
    // damaged documents keep brackets out of strings so every bracket is
    // structural
    const bool damaged = rng.chance(0.2);
    const auto doc = random_json_document(rng, !damaged);
    FuzzReply r;
    r.embedded = doc.dump(rng.chance(0.5) ? -1 : 2);
    if (damaged) r.embedded = r.embedded.substr(0, r.embedded.size() - 1);  // drop the closer
    std::string body = r.embedded;
    switch (rng.uniform(0, 2)) {
        case 0: break;
        case 1: body = "```json\n" + body + "\n```"; break;
        default: body = "```\n" + body + "\n```"; break;
    }
    r.text = rng.pick(before) + body + rng.pick(after);
    return r;
}

// Reference extraction by brute force: the first opener (in reading order)
// from which some substring is accepted by the reference parser, taking the
// shortest such substring. nullopt when nothing parses.
inline std::optional<nlohmann::json> brute_force_extract(const std::string& text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{' && text[i] != '[') continue;
        for (std::size_t j = i + 1; j < text.size(); ++j) {
            if (text[j] != '}' && text[j] != ']') continue;
            const std::string candidate = text.substr(i, j - i + 1);
            if (nlohmann::json::accept(candidate)) return nlohmann::json::parse(candidate);
        }
    }
    return std::nullopt;
}

}  // namespace testing_support
