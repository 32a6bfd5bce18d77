#include "datavideo/agent_runtime.hpp"

#include <filesystem>

#include "datavideo/hashing.hpp"

namespace datavideo {

std::string_view to_string(ChatRole role) {
    switch (role) {
        case ChatRole::system: return "system";
        case ChatRole::user: return "user";
        case ChatRole::assistant: return "assistant";
    }
    return {};
}

std::string ChatSession::complete(std::string user_message) {
    messages_.push_back({ChatRole::user, std::move(user_message)});
    std::string reply;
    try {
        reply = backend_->complete(messages_);
    } catch (...) {
        messages_.pop_back();
        throw;
    }
    messages_.push_back({ChatRole::assistant, reply});
    return reply;
}

// ---------------------------------------------------------------------------

std::vector<ScriptedReply> MockBackend::parse_transcript(const Json& transcript) {
    if (!transcript.is_array()) throw Error(Errc::invalid_config, "transcript must be a JSON list");
    std::vector<ScriptedReply> out;
    for (std::size_t i = 0; i < transcript.size(); ++i) {
        const Json& item = transcript[i];
        if (!item.is_object() || !item.contains("reply") || !item["reply"].is_string()) {
            throw Error(Errc::invalid_config, "transcript entry " + std::to_string(i) + " needs a string \"reply\"");
        }
        ScriptedReply entry;
        entry.reply = item["reply"].get<std::string>();
        if (item.contains("match") && !item["match"].is_null()) {
            if (!item["match"].is_string()) {
                throw Error(Errc::invalid_config, "transcript entry " + std::to_string(i) + ": \"match\" must be text");
            }
            entry.match = item["match"].get<std::string>();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<ScriptedReply> MockBackend::load_transcript(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw Error(Errc::invalid_config, "transcript " + path.string() + ": " + e.what());
    }
    return parse_transcript(j);
}

std::string MockBackend::complete(std::span<const ChatMessage> history) {
    if (next_ >= script_.size()) {
        throw Error(Errc::transcript_exhausted, "no scripted reply left after " + std::to_string(next_) + " calls");
    }
    const ScriptedReply& entry = script_[next_];
    if (entry.match) {
        const std::string_view outgoing = history.empty() ? std::string_view{} : history.back().content;
        if (outgoing.find(*entry.match) == std::string_view::npos) {
            throw Error(Errc::transcript_mismatch, "reply " + std::to_string(next_) +
                                                       " expects the outgoing message to contain '" + *entry.match +
                                                       "'");
        }
    }
    ++next_;
    return entry.reply;
}

void BackendConfig::validate() const {
    if (kind == BackendKind::live) {
        if (endpoint.empty()) throw Error(Errc::invalid_config, "live backend requires \"endpoint\"");
        if (api_key_env.empty()) throw Error(Errc::invalid_config, "live backend requires \"api_key_env\"");
    } else if (transcript_path.empty()) {
        throw Error(Errc::invalid_config, "mock backend requires a transcript path");
    }
    if (max_http_retries < 0) throw Error(Errc::invalid_config, "max_http_retries must be non-negative");
}

// ---------------------------------------------------------------------------

std::string CachingBackend::cache_key(std::string_view model, std::span<const ChatMessage> history) {
    Json messages = Json::array();
    for (const auto& m : history) {
        messages.push_back(Json{{"role", to_string(m.role)}, {"content", m.content}});
    }
    return sha256_hex(std::string(model) + "\n" + messages.dump());
}

std::string CachingBackend::complete(std::span<const ChatMessage> history) {
    const auto path = dir_ / (cache_key(inner_->model_name(), history) + ".json");
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
        try {
            const Json cached = Json::parse(read_file(path));
            if (cached.contains("reply") && cached["reply"].is_string()) {
                ++hits_;
                return cached["reply"].get<std::string>();
            }
        } catch (const std::exception&) {
            // unreadable entries fall through to the backend and are replaced
        }
    }
    ++misses_;
    std::string reply = inner_->complete(history);
    Json entry{{"model", inner_->model_name()}, {"reply", reply}};
    write_file_atomic(path, entry.dump(2) + "\n");
    return reply;
}

std::shared_ptr<ChatBackend> make_backend(const BackendConfig& config,
                                          const std::optional<std::filesystem::path>& cache_dir) {
    config.validate();
    if (config.kind == BackendKind::mock) {
        return std::make_shared<MockBackend>(MockBackend::load_transcript(config.transcript_path));
    }
    std::shared_ptr<ChatBackend> live = std::make_shared<LiveBackend>(config);
    if (cache_dir) return std::make_shared<CachingBackend>(std::move(live), *cache_dir);
    return live;
}

// ---------------------------------------------------------------------------

namespace {

struct ScanResult {
    std::optional<Json> value;
    std::optional<std::size_t> first_failure;  // offset of the first opener that did not parse
    bool saw_opener = false;
};

// End offset (inclusive) of the balanced value starting at `start`, or npos
// when it never balances or closes with the wrong delimiter.
std::size_t balanced_end(std::string_view text, std::size_t start) {
    std::string expected;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        switch (c) {
            case '"': in_string = true; break;
            case '{': expected.push_back('}'); break;
            case '[': expected.push_back(']'); break;
            case '}':
            case ']':
                if (expected.empty() || expected.back() != c) return std::string_view::npos;
                expected.pop_back();
                if (expected.empty()) return i;
                break;
            default: break;
        }
    }
    return std::string_view::npos;
}

ScanResult scan(std::string_view text, std::size_t base_offset) {
    ScanResult result;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c != '{' && c != '[') {
            ++i;
            continue;
        }
        result.saw_opener = true;
        const auto end = balanced_end(text, i);
        if (end == std::string_view::npos) {
            if (!result.first_failure) result.first_failure = base_offset + i;
            ++i;
            continue;
        }
        try {
            result.value = Json::parse(text.substr(i, end - i + 1));
            return result;
        } catch (const Json::parse_error&) {
            if (!result.first_failure) result.first_failure = base_offset + i;
            // a balanced but invalid region is skipped whole, so fragments
            // of a broken reply are never returned
            i = end + 1;
        }
    }
    return result;
}

struct Fence {
    std::size_t offset;
    std::string_view body;
};

std::vector<Fence> fenced_blocks(std::string_view raw) {
    std::vector<Fence> out;
    std::size_t pos = 0;
    while (true) {
        const auto open = raw.find("```", pos);
        if (open == std::string_view::npos) break;
        const auto line_end = raw.find('\n', open + 3);
        if (line_end == std::string_view::npos) break;
        const auto close = raw.find("```", line_end + 1);
        if (close == std::string_view::npos) break;
        out.push_back({line_end + 1, raw.substr(line_end + 1, close - line_end - 1)});
        pos = close + 3;
    }
    return out;
}

}  // namespace

Json extract_json(std::string_view raw) {
    if (trim(raw).empty()) throw Error(Errc::no_json_found, "reply is empty");
    std::optional<std::size_t> failure;
    bool saw_opener = false;
    for (const Fence& fence : fenced_blocks(raw)) {
        auto r = scan(fence.body, fence.offset);
        if (r.value) return std::move(*r.value);
        saw_opener = saw_opener || r.saw_opener;
    }
    auto r = scan(raw, 0);
    if (r.value) return std::move(*r.value);
    saw_opener = saw_opener || r.saw_opener;
    failure = r.first_failure;
    if (!saw_opener) throw Error(Errc::no_json_found, "reply contains no JSON object or array");
    throw Error(Errc::malformed_json, "position " + std::to_string(failure.value_or(0)));
}

// ---------------------------------------------------------------------------

Json to_json(const RepairReport& r) {
    Json out = Json::object();
    out["attempts"] = r.attempts;
    out["final_status"] = r.final_status == RepairStatus::ok ? "ok" : "exhausted";
    out["violations_per_attempt"] = Json::array();
    for (const auto& list : r.violations_per_attempt) {
        Json items = Json::array();
        for (const auto& v : list) items.push_back(to_json(v));
        out["violations_per_attempt"].push_back(std::move(items));
    }
    return out;
}

RepairReport repair_report_from_json(const Json& j) {
    RepairReport r;
    r.attempts = j.value("attempts", 0);
    r.final_status = j.value("final_status", "ok") == "ok" ? RepairStatus::ok : RepairStatus::exhausted;
    if (j.contains("violations_per_attempt")) {
        for (const auto& list : j["violations_per_attempt"]) {
            std::vector<Violation> items;
            for (const auto& v : list) items.push_back({v.value("code", ""), v.value("path", ""), v.value("message", "")});
            r.violations_per_attempt.push_back(std::move(items));
        }
    }
    return r;
}

std::string RepairExhausted::describe(const RepairReport& r) {
    std::string out = "no valid reply after " + std::to_string(r.attempts) + " attempt(s)";
    if (!r.violations_per_attempt.empty() && !r.violations_per_attempt.back().empty()) {
        const auto& v = r.violations_per_attempt.back().front();
        out += "; last violation: [" + v.code + "] " + v.message;
    }
    return out;
}

std::string build_repair_message(const std::vector<Violation>& violations) {
    std::string out = "Your previous reply does not satisfy the required output contract. Violations:\n";
    for (const auto& v : violations) {
        out += "- [" + v.code + "]";
        if (!v.path.empty()) out += " " + v.path;
        out += ": " + v.message + "\n";
    }
    out += "Please fix these problems and output the complete corrected JSON object in the final output JSON "
           "format.";
    return out;
}

Violation violation_from_error(const Error& e) {
    return Violation{std::string(errc_name(e.code())), "", e.detail()};
}

}  // namespace datavideo
