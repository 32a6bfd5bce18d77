#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "datavideo/agent_runtime.hpp"

namespace datavideo {

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(Errc::invalid_config, "endpoint '" + url + "' has no scheme");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

LiveBackend::LiveBackend(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

Json LiveBackend::request_body(const BackendConfig& config, std::span<const ChatMessage> history) {
    Json messages = Json::array();
    for (const auto& m : history) {
        messages.push_back(Json{{"role", to_string(m.role)}, {"content", m.content}});
    }
    return Json{{"model", config.model_name}, {"messages", std::move(messages)}, {"temperature", config.temperature}};
}

std::string LiveBackend::reply_from_body(std::string_view body) {
    try {
        const Json j = Json::parse(body);
        const Json& content = j.at("choices").at(0).at("message").at("content");
        if (content.is_string()) return content.get<std::string>();
    } catch (const Json::exception&) {
    }
    throw Error(Errc::backend_http_error, "status 200: response has no choices[0].message.content text");
}

std::string LiveBackend::complete(std::span<const ChatMessage> history) {
    const Endpoint ep = split_url(config_.endpoint);
    httplib::Client client(ep.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    const std::string body = request_body(config_, history).dump();

    int last_status = 0;
    for (int attempt = 0; attempt <= config_.max_http_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(config_.retry_backoff * (1 << (attempt - 1)));
        auto res = client.Post(ep.path, headers, body, "application/json");
        if (!res) {
            const auto err = res.error();
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                err == httplib::Error::Write) {
                if (attempt == config_.max_http_retries) {
                    throw Error(Errc::backend_timeout, config_.endpoint + ": " + httplib::to_string(err));
                }
                continue;
            }
            throw Error(Errc::backend_http_error, "status 0: " + httplib::to_string(err));
        }
        last_status = res->status;
        if (res->status == 200) return reply_from_body(res->body);
        if (!retryable(res->status)) break;
    }
    throw Error(Errc::backend_http_error, "status " + std::to_string(last_status));
}

}  // namespace datavideo
