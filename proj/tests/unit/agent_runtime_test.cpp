#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "datavideo/agent_runtime.hpp"
#include "json_fuzz.hpp"
#include "test_support.hpp"

using namespace datavideo;
using testing_support::Rng;
using testing_support::TempDir;

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

class CountingBackend : public ChatBackend {
public:
    std::string complete(std::span<const ChatMessage> history) override {
        ++calls;
        return "reply " + std::to_string(calls) + " to " + history.back().content;
    }
    std::string model_name() const override { return "counting"; }
    int calls = 0;
};

// A local HTTP server answering every POST with a fixed status and body.
class StubServer {
public:
    StubServer(int status, std::string body) {
        server_.Post("/v1/chat", [this, status, body](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            last_body = req.body;
            last_auth = req.get_header_value("Authorization");
            res.status = status;
            res.set_content(body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat"; }

    std::atomic<int> hits{0};
    std::string last_body;
    std::string last_auth;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

BackendConfig live_config(const std::string& endpoint) {
    BackendConfig c;
    c.kind = BackendKind::live;
    c.endpoint = endpoint;
    c.api_key_env = "DATAVIDEO_TEST_KEY";
    c.retry_backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(5000);
    return c;
}

}  // namespace

TEST(ExtractJson, Examples) {
    EXPECT_EQ(extract_json("Here you go:\n```json\n{\"a\": 1}\n```\nThanks"), Json::parse(R"({"a":1})"));
    EXPECT_EQ(extract_json("I think [1, 2, 3] works"), Json::parse("[1,2,3]"));
    EXPECT_EQ(extract_json(R"({"s": "a } b { c"})"), Json::parse(R"({"s": "a } b { c"})"));
    EXPECT_EQ(error_of([] { extract_json("no json here"); }), Errc::no_json_found);
    EXPECT_EQ(error_of([] { extract_json("{\"a\": 1"); }), Errc::malformed_json);
    EXPECT_EQ(error_of([] { extract_json("{\"a\" 1}"); }), Errc::malformed_json);
}

TEST(ExtractJson, FencedBlockWinsOverEarlierProse) {
    EXPECT_EQ(extract_json("See {\"prose\": true}.\n```json\n{\"fenced\": true}\n```"),
              Json::parse(R"({"fenced": true})"));
}

TEST(ExtractJson, RoundTripsRandomDocumentsInProse) {
    Rng rng(41);
    for (int i = 0; i < 300; ++i) {
        const auto doc = testing_support::random_json_document(rng);
        const std::string text = "Result: " + doc.dump(rng.chance(0.5) ? -1 : 2) + " end";
        EXPECT_EQ(extract_json(text).dump(), Json::parse(doc.dump()).dump()) << text;
    }
}

TEST(ExtractJson, AgreesWithBruteForceReference) {
    Rng rng(43);
    for (int i = 0; i < 300; ++i) {
        const auto reply = testing_support::random_reply(rng);
        const auto expected = testing_support::brute_force_extract(reply.text);
        if (expected) {
            EXPECT_EQ(extract_json(reply.text).dump(), Json::parse(expected->dump()).dump()) << reply.text;
        } else {
            EXPECT_THROW(extract_json(reply.text), Error) << reply.text;
        }
    }
}

TEST(MockBackend, ReplaysInOrderAndChecksMatches) {
    auto backend = std::make_shared<MockBackend>(
        std::vector<ScriptedReply>{{"hello", "first"}, {std::nullopt, "second"}, {"needle", "third"}});
    ChatSession session(backend);
    EXPECT_EQ(session.complete("hello there"), "first");
    EXPECT_EQ(session.complete("anything"), "second");
    EXPECT_EQ(error_of([&] { session.complete("haystack"); }), Errc::transcript_mismatch);
    EXPECT_EQ(session.messages().size(), 4u);  // the failed call left no trace
    EXPECT_EQ(session.complete("a needle"), "third");
    EXPECT_EQ(error_of([&] { session.complete("more"); }), Errc::transcript_exhausted);
    EXPECT_EQ(backend->calls(), 3u);
    EXPECT_EQ(backend->remaining(), 0u);
}

TEST(MockBackend, TranscriptParsing) {
    const auto script = MockBackend::parse_transcript(Json::parse(R"([{"match": "x", "reply": "r"}, {"reply": "s"}])"));
    ASSERT_EQ(script.size(), 2u);
    EXPECT_EQ(script[0].match, "x");
    EXPECT_FALSE(script[1].match.has_value());
    EXPECT_EQ(error_of([] { MockBackend::parse_transcript(Json::parse(R"({"reply": "r"})")); }), Errc::invalid_config);
    EXPECT_EQ(error_of([] { MockBackend::parse_transcript(Json::parse(R"([{"match": "x"}])")); }), Errc::invalid_config);
}

TEST(ChatSession, RecordsAlternatingHistory) {
    ChatSession session(std::make_shared<CountingBackend>());
    session.complete("one");
    session.complete("two");
    const auto& m = session.messages();
    ASSERT_EQ(m.size(), 4u);
    EXPECT_EQ(m[0], (ChatMessage{ChatRole::user, "one"}));
    EXPECT_EQ(m[1], (ChatMessage{ChatRole::assistant, "reply 1 to one"}));
    EXPECT_EQ(m[3].role, ChatRole::assistant);
}

TEST(RepairLoop, SucceedsOnFirstPassingReply) {
    auto backend = std::make_shared<MockBackend>(std::vector<ScriptedReply>{{"", "bad"}, {"", "bad"}, {"", "good"}});
    ChatSession session(backend);
    auto contract = [](std::string_view reply) {
        Checked<std::string> c;
        if (reply == "good") {
            c.value = std::string(reply);
        } else {
            c.report.fail("not-good", "", "reply was " + std::string(reply));
        }
        return c;
    };
    const auto out = repair_loop<std::string>(session, PromptText{"prompt"}, contract, 3);
    EXPECT_EQ(out.value, "good");
    EXPECT_EQ(out.repair.attempts, 3);
    EXPECT_EQ(out.repair.final_status, RepairStatus::ok);
    ASSERT_EQ(out.repair.violations_per_attempt.size(), 3u);
    EXPECT_EQ(out.repair.violations_per_attempt[0].size(), 1u);
    EXPECT_TRUE(out.repair.violations_per_attempt[2].empty());
    EXPECT_EQ(session.messages().size(), 6u);
    EXPECT_EQ(session.messages()[2].content, build_repair_message(out.repair.violations_per_attempt[0]));
    EXPECT_NE(session.messages()[2].content.find("[not-good]"), std::string::npos);
}

TEST(RepairLoop, ExhaustionReportsEveryAttempt) {
    for (int attempts = 1; attempts <= 4; ++attempts) {
        std::vector<ScriptedReply> script(static_cast<std::size_t>(attempts), ScriptedReply{std::nullopt, "{\"x\": 1"});
        ChatSession session(std::make_shared<MockBackend>(script));
        auto contract = [](std::string_view reply) {
            extract_json(reply);
            return Checked<int>{1, {}};
        };
        try {
            repair_loop<int>(session, PromptText{"p"}, contract, attempts);
            FAIL();
        } catch (const RepairExhausted& e) {
            EXPECT_EQ(e.report().attempts, attempts);
            EXPECT_EQ(e.report().final_status, RepairStatus::exhausted);
            EXPECT_EQ(e.report().violations_per_attempt.size(), static_cast<std::size_t>(attempts));
            EXPECT_EQ(e.last_report().violations.front().code, errc_name(Errc::malformed_json));
            EXPECT_EQ(session.messages().size(), static_cast<std::size_t>(2 * attempts));
            const RepairReport back = repair_report_from_json(to_json(e.report()));
            EXPECT_EQ(back.attempts, attempts);
            EXPECT_EQ(back.violations_per_attempt, e.report().violations_per_attempt);
        }
    }
}

TEST(RepairLoop, AdapterErrorsPropagate) {
    ChatSession session(std::make_shared<MockBackend>(std::vector<ScriptedReply>{}));
    auto contract = [](std::string_view) { return Checked<int>{1, {}}; };
    EXPECT_EQ(error_of([&] { repair_loop<int>(session, PromptText{"p"}, contract, 2); }), Errc::transcript_exhausted);
    EXPECT_EQ(error_of([&] { repair_loop<int>(session, PromptText{"p"}, contract, 0); }), Errc::invalid_config);
}

TEST(CachingBackend, SecondIdenticalCallIsAHit) {
    TempDir dir;
    auto inner = std::make_shared<CountingBackend>();
    CachingBackend cache(inner, dir.path());
    const std::vector<ChatMessage> a{{ChatRole::user, "question"}};
    const std::vector<ChatMessage> b{{ChatRole::user, "other question"}};
    const std::string first = cache.complete(a);
    EXPECT_EQ(cache.complete(a), first);
    cache.complete(b);
    EXPECT_EQ(inner->calls, 2);
    EXPECT_EQ(cache.hits(), 1u);
    EXPECT_EQ(cache.misses(), 2u);

    // a fresh cache over the same directory serves from disk
    CachingBackend again(inner, dir.path());
    EXPECT_EQ(again.complete(a), first);
    EXPECT_EQ(inner->calls, 2);
}

TEST(CachingBackend, KeyDependsOnModelAndEveryMessage) {
    const std::vector<ChatMessage> h1{{ChatRole::user, "a"}, {ChatRole::assistant, "b"}};
    const std::vector<ChatMessage> h2{{ChatRole::user, "a"}, {ChatRole::user, "b"}};
    EXPECT_NE(CachingBackend::cache_key("m", h1), CachingBackend::cache_key("m", h2));
    EXPECT_NE(CachingBackend::cache_key("m", h1), CachingBackend::cache_key("n", h1));
    EXPECT_EQ(CachingBackend::cache_key("m", h1), CachingBackend::cache_key("m", h1));
    EXPECT_EQ(CachingBackend::cache_key("m", h1).size(), 64u);
}

TEST(LiveBackend, RequestAndReplyShapes) {
    BackendConfig c = live_config("http://localhost/x");
    c.model_name = "gpt-4";
    const std::vector<ChatMessage> history{{ChatRole::user, "hi"}};
    EXPECT_EQ(LiveBackend::request_body(c, history),
              Json::parse(R"({"model":"gpt-4","messages":[{"role":"user","content":"hi"}],"temperature":0.0})"));
    EXPECT_EQ(LiveBackend::reply_from_body(R"({"choices":[{"message":{"role":"assistant","content":"ok"}}]})"), "ok");
    EXPECT_EQ(error_of([] { LiveBackend::reply_from_body(R"({"choices":[]})"); }), Errc::backend_http_error);
}

TEST(LiveBackend, ConfigValidation) {
    BackendConfig c;
    c.kind = BackendKind::live;
    EXPECT_EQ(error_of([&] { c.validate(); }), Errc::invalid_config);
    c.endpoint = "http://x/";
    EXPECT_EQ(error_of([&] { c.validate(); }), Errc::invalid_config);
    c.api_key_env = "K";
    EXPECT_NO_THROW(c.validate());
    c.max_http_retries = -1;
    EXPECT_EQ(error_of([&] { c.validate(); }), Errc::invalid_config);
}

TEST(LiveBackend, PostsToEndpointAndReadsReply) {
    StubServer server(200, R"({"choices":[{"message":{"role":"assistant","content":"stub reply"}}]})");
    ::setenv("DATAVIDEO_TEST_KEY", "secret", 1);
    LiveBackend backend(live_config(server.endpoint()));
    ::unsetenv("DATAVIDEO_TEST_KEY");
    const std::vector<ChatMessage> history{{ChatRole::user, "hello"}};
    EXPECT_EQ(backend.complete(history), "stub reply");
    EXPECT_EQ(server.hits, 1);
    EXPECT_EQ(server.last_auth, "Bearer secret");
    EXPECT_EQ(Json::parse(server.last_body)["messages"][0]["content"], "hello");
}

TEST(LiveBackend, RateLimitIsRetriedThenReported) {
    StubServer server(429, R"({"error":"slow down"})");
    BackendConfig c = live_config(server.endpoint());
    c.max_http_retries = 2;
    LiveBackend backend(c);
    const std::vector<ChatMessage> history{{ChatRole::user, "hello"}};
    try {
        backend.complete(history);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::backend_http_error);
        EXPECT_NE(e.detail().find("429"), std::string::npos);
        EXPECT_EQ(e.error_class(), ErrorClass::adapter);
    }
    EXPECT_EQ(server.hits, 3);
}

TEST(LiveBackend, ClientErrorsAreNotRetried) {
    StubServer server(400, R"({"error":"bad"})");
    LiveBackend backend(live_config(server.endpoint()));
    const std::vector<ChatMessage> history{{ChatRole::user, "hello"}};
    EXPECT_EQ(error_of([&] { backend.complete(history); }), Errc::backend_http_error);
    EXPECT_EQ(server.hits, 1);
}
