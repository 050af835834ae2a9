#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bemflow/llm_gateway.hpp"

namespace bemflow::llm {

using nlohmann::json;

namespace {

// Split "http://host:port/base" into client root and path prefix.
struct UrlParts {
    std::string root;  // scheme://host:port
    std::string path;  // /base (may be empty)
};

UrlParts split_url(const std::string& url) {
    UrlParts parts;
    const auto scheme_end = url.find("://");
    std::size_t path_start = std::string::npos;
    if (scheme_end != std::string::npos) path_start = url.find('/', scheme_end + 3);
    else path_start = url.find('/');
    if (path_start == std::string::npos) {
        parts.root = url;
    } else {
        parts.root = url.substr(0, path_start);
        parts.path = url.substr(path_start);
    }
    while (!parts.path.empty() && parts.path.back() == '/') parts.path.pop_back();
    return parts;
}

}  // namespace

std::string HttpChatBackend::complete(const ChatRequest& request) {
    const UrlParts url = split_url(config_.base_url);

    json body;
    body["model"] = request.model_id.empty() ? config_.model_id : request.model_id;
    body["temperature"] = request.temperature;
    body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
    if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!config_.credential.empty())
        headers.emplace("Authorization", "Bearer " + config_.credential);

    int backoff_ms = config_.initial_backoff_ms;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client client(url.root);
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
        auto res = client.Post(url.path + "/chat/completions", headers, payload,
                               "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            throw GatewayError(GatewayErrorKind::Auth,
                               "authentication rejected (HTTP " + std::to_string(res->status) + ")");
        if (res->status == 429) {
            last_error = "rate limited";
            if (attempt == config_.max_retries) {
                std::string retry_after = res->get_header_value("Retry-After");
                throw GatewayError(GatewayErrorKind::RateLimited,
                                   "rate limited" + (retry_after.empty()
                                                         ? std::string()
                                                         : "; retry after " + retry_after + "s"));
            }
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error (HTTP " + std::to_string(res->status) + ")";
            continue;
        }
        if (res->status != 200)
            throw GatewayError(GatewayErrorKind::Transport,
                               "unexpected HTTP status " + std::to_string(res->status) + ": " +
                                   res->body);
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty())
            throw GatewayError(GatewayErrorKind::Transport,
                               "malformed chat-completions response: " + res->body);
        const json& choice = parsed["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content"))
            return choice["message"]["content"].get<std::string>();
        if (choice.contains("text")) return choice["text"].get<std::string>();
        throw GatewayError(GatewayErrorKind::Transport,
                           "chat-completions response has no message content");
    }
    throw GatewayError(GatewayErrorKind::Transport,
                       "request failed after " + std::to_string(config_.max_retries + 1) +
                           " attempts: " + last_error);
}

std::vector<std::vector<double>> HttpEmbedBackend::embed(const std::vector<std::string>& texts) {
    const UrlParts url = split_url(config_.base_url);

    json body;
    body["model"] = config_.model_id;
    body["input"] = texts;

    httplib::Headers headers;
    if (!config_.credential.empty())
        headers.emplace("Authorization", "Bearer " + config_.credential);

    httplib::Client client(url.root);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    auto res = client.Post(url.path + "/embeddings", headers, body.dump(), "application/json");
    if (!res)
        throw GatewayError(GatewayErrorKind::Transport,
                           "transport failure: " + httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
        throw GatewayError(GatewayErrorKind::Auth,
                           "authentication rejected (HTTP " + std::to_string(res->status) + ")");
    if (res->status != 200)
        throw GatewayError(GatewayErrorKind::Transport,
                           "unexpected HTTP status " + std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("data"))
        throw GatewayError(GatewayErrorKind::Transport, "malformed embeddings response");
    std::vector<std::vector<double>> out;
    for (const auto& item : parsed["data"])
        out.push_back(item["embedding"].get<std::vector<double>>());
    return out;
}

}  // namespace bemflow::llm
