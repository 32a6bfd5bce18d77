#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "datavideo/core_model.hpp"
#include "datavideo/error.hpp"
#include "datavideo/prompts.hpp"

namespace datavideo {

// ---------------------------------------------------------------------------
// Chat sessions

enum class ChatRole { system, user, assistant };
std::string_view to_string(ChatRole role);

struct ChatMessage {
    ChatRole role = ChatRole::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    // history ends with the outgoing user message.
    virtual std::string complete(std::span<const ChatMessage> history) = 0;
    virtual std::string model_name() const = 0;
};

class ChatSession {
public:
    explicit ChatSession(std::shared_ptr<ChatBackend> backend) : backend_(std::move(backend)) {}

    const std::vector<ChatMessage>& messages() const { return messages_; }
    ChatBackend& backend() const { return *backend_; }

    // Appends the user message and the reply. On backend failure the session
    // is left unchanged and the error propagates.
    std::string complete(std::string user_message);

private:
    std::shared_ptr<ChatBackend> backend_;
    std::vector<ChatMessage> messages_;
};

inline std::string complete(ChatSession& session, std::string user_message) {
    return session.complete(std::move(user_message));
}

// ---------------------------------------------------------------------------
// Backends

struct ScriptedReply {
    std::optional<std::string> match;  // substring the outgoing message must contain
    std::string reply;
};

// Replays replies in order. Throws TranscriptExhausted past the end and
// TranscriptMismatch when a match substring is absent from the outgoing message.
class MockBackend : public ChatBackend {
public:
    explicit MockBackend(std::vector<ScriptedReply> script) : script_(std::move(script)) {}

    // Transcript file: JSON list of {"match": optional text, "reply": text}.
    static std::vector<ScriptedReply> load_transcript(const std::filesystem::path& path);
    static std::vector<ScriptedReply> parse_transcript(const Json& transcript);

    std::string complete(std::span<const ChatMessage> history) override;
    std::string model_name() const override { return "mock"; }

    std::size_t calls() const { return next_; }
    std::size_t remaining() const { return script_.size() - next_; }

private:
    std::vector<ScriptedReply> script_;
    std::size_t next_ = 0;
};

enum class BackendKind { live, mock };

struct BackendConfig {
    BackendKind kind = BackendKind::mock;
    std::string endpoint;
    std::string model_name = "gpt-4";
    double temperature = 0.0;
    std::chrono::milliseconds timeout{60'000};
    std::string api_key_env;
    std::filesystem::path transcript_path;
    int max_http_retries = 2;
    std::chrono::milliseconds retry_backoff{1'000};

    // Throws InvalidConfig when required fields for the kind are missing.
    void validate() const;
};

// Chat-completion client for the common messages/choices JSON shape.
// Retries 429 and 5xx responses max_http_retries times before throwing
// BackendHTTPError(status); throws BackendTimeout on timeouts.
class LiveBackend : public ChatBackend {
public:
    explicit LiveBackend(BackendConfig config);

    std::string complete(std::span<const ChatMessage> history) override;
    std::string model_name() const override { return config_.model_name; }

    static Json request_body(const BackendConfig& config, std::span<const ChatMessage> history);
    static std::string reply_from_body(std::string_view body);

private:
    BackendConfig config_;
    std::string api_key_;
};

// Write-once disk cache in front of another backend, keyed by the SHA-256 of
// the model name and the full message history.
class CachingBackend : public ChatBackend {
public:
    CachingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path dir)
        : inner_(std::move(inner)), dir_(std::move(dir)) {}

    std::string complete(std::span<const ChatMessage> history) override;
    std::string model_name() const override { return inner_->model_name(); }

    static std::string cache_key(std::string_view model, std::span<const ChatMessage> history);

    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }

private:
    std::shared_ptr<ChatBackend> inner_;
    std::filesystem::path dir_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

// Live backends are wrapped in the disk cache when cache_dir is set.
std::shared_ptr<ChatBackend> make_backend(const BackendConfig& config,
                                          const std::optional<std::filesystem::path>& cache_dir);

// ---------------------------------------------------------------------------
// JSON extraction

// Returns the first syntactically complete top-level object or array in an
// agent reply. Fenced Markdown blocks are searched before the surrounding
// prose; braces inside JSON strings are ignored.
// Throws NoJsonFound when no candidate opener exists and MalformedJson when
// none of the candidates parses.
Json extract_json(std::string_view raw);

// ---------------------------------------------------------------------------
// Validate-repair loop

inline constexpr int default_max_attempts = 3;

// Per-role settings shared by the analyst and designer agents.
struct AgentConfig {
    int max_attempts = default_max_attempts;
    std::optional<std::size_t> max_prompt_rows = default_prompt_rows;
};

enum class RepairStatus { ok, exhausted };

struct RepairReport {
    int attempts = 0;
    std::vector<std::vector<Violation>> violations_per_attempt;
    RepairStatus final_status = RepairStatus::ok;
};

Json to_json(const RepairReport& r);
RepairReport repair_report_from_json(const Json& j);

class RepairExhausted : public Error {
public:
    RepairExhausted(RepairReport report, ValidationReport last)
        : Error(Errc::repair_exhausted, describe(report)), report_(std::move(report)), last_(std::move(last)) {}

    const RepairReport& report() const { return report_; }
    const ValidationReport& last_report() const { return last_; }

private:
    static std::string describe(const RepairReport& r);
    RepairReport report_;
    ValidationReport last_;
};

// Result of a contract function: a value exactly when the report passes.
template <typename T>
struct Checked {
    std::optional<T> value;
    ValidationReport report;
};

template <typename T>
struct RepairOutcome {
    T value;
    ValidationReport report;
    RepairReport repair;
};

// Follow-up message quoting the violations of the previous reply.
std::string build_repair_message(const std::vector<Violation>& violations);

// Agent-contract errors thrown while parsing become a single violation.
Violation violation_from_error(const Error& e);

template <typename T, typename Contract>
RepairOutcome<T> repair_loop(ChatSession& session, const PromptText& prompt, Contract&& contract,
                             int max_attempts = default_max_attempts) {
    if (max_attempts < 1) throw Error(Errc::invalid_config, "max_attempts must be at least 1");
    RepairReport repair;
    ValidationReport last;
    std::string message = prompt.text;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        const std::string reply = session.complete(message);
        repair.attempts = attempt;
        Checked<T> checked;
        try {
            checked = contract(reply);
        } catch (const Error& e) {
            if (e.error_class() != ErrorClass::agent_contract) throw;
            checked.value.reset();
            checked.report = ValidationReport{};
            checked.report.violations.push_back(violation_from_error(e));
        }
        repair.violations_per_attempt.push_back(checked.report.violations);
        last = checked.report;
        if (checked.report.passing() && checked.value) {
            repair.final_status = RepairStatus::ok;
            return RepairOutcome<T>{std::move(*checked.value), std::move(checked.report), std::move(repair)};
        }
        message = build_repair_message(checked.report.violations);
    }
    repair.final_status = RepairStatus::exhausted;
    throw RepairExhausted(std::move(repair), std::move(last));
}

}  // namespace datavideo
