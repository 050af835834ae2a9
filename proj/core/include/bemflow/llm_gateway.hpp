#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bemflow::llm {

struct ChatRequest {
    std::string prompt;  // system-or-full prompt, sent as a single message
    double temperature = 0.0;
    std::string model_id;
    std::optional<int> max_tokens;
    std::string request_tag;  // agent name + step, recorded in transcripts
};

/// Content hash of prompt + temperature + model; the replay lookup key.
std::string request_digest(const ChatRequest& request);
std::string embed_digest(const std::string& embedder_id, const std::vector<std::string>& texts);

struct TranscriptEntry {
    std::string kind;  // "chat" or "embed"
    std::string digest;
    std::string tag;
    std::string model;
    double temperature = 0.0;
    std::string prompt;                            // chat
    std::string response;                          // chat
    std::vector<std::string> texts;                // embed
    std::vector<std::vector<double>> vectors;      // embed
    std::string timestamp;                         // empty in deterministic transcripts
};

/// Line-delimited transcript: one JSON record per exchange. Appends are
/// serialized; duplicate digests keep the last record and log a warning.
class Transcript {
public:
    Transcript() = default;

    static Transcript load(const std::string& path);
    void save(const std::string& path) const;

    void append(TranscriptEntry entry);
    const TranscriptEntry* find(const std::string& digest) const;
    std::size_t size() const { return order_.size(); }
    const std::vector<TranscriptEntry>& entries() const { return order_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::vector<TranscriptEntry> order_;
    std::map<std::string, std::size_t> by_digest_;
    std::vector<std::string> warnings_;
};

enum class GatewayErrorKind {
    Transport,
    Auth,
    RateLimited,
    ReplayMiss,
    DimensionMismatch,
    EmbedderMismatch
};

class GatewayError : public std::runtime_error {
public:
    GatewayError(GatewayErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    GatewayErrorKind kind() const { return kind_; }

private:
    GatewayErrorKind kind_;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    /// True when the backend can reach a network; replay/stub backends are
    /// offline by construction.
    virtual bool is_offline() const = 0;
};

class EmbedBackend {
public:
    virtual ~EmbedBackend() = default;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
    virtual std::string embedder_id() const = 0;
};

/// Replays recorded exchanges; any unseen digest is a hard miss.
class ReplayBackend final : public ChatBackend, public EmbedBackend {
public:
    explicit ReplayBackend(Transcript transcript, std::string embedder_id = "replay")
        : transcript_(std::move(transcript)), embedder_id_(std::move(embedder_id)) {}

    std::string complete(const ChatRequest& request) override;
    bool is_offline() const override { return true; }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string embedder_id() const override { return embedder_id_; }

    const Transcript& transcript() const { return transcript_; }

private:
    Transcript transcript_;
    std::string embedder_id_;
};

/// Wraps a live (or scripted) backend, appending every exchange to a
/// transcript file as it happens.
class RecordingBackend final : public ChatBackend, public EmbedBackend {
public:
    RecordingBackend(ChatBackend* chat, EmbedBackend* embed, std::string path,
                     bool with_timestamps = true);
    ~RecordingBackend();

    std::string complete(const ChatRequest& request) override;
    bool is_offline() const override { return chat_ ? chat_->is_offline() : true; }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string embedder_id() const override;

    const Transcript& transcript() const { return transcript_; }
    void flush();

private:
    ChatBackend* chat_;
    EmbedBackend* embed_;
    std::string path_;
    bool with_timestamps_;
    Transcript transcript_;
    std::mutex mutex_;
};

/// Deterministic embedder: hashes the normalized token set of each text
/// into a fixed-dimension vector. Stable across runs and platforms.
class StubEmbedBackend final : public EmbedBackend {
public:
    explicit StubEmbedBackend(std::size_t dimension = 256, std::uint64_t seed = 0)
        : dimension_(dimension), seed_(seed) {}

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string embedder_id() const override;
    std::size_t dimension() const { return dimension_; }

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

struct HttpBackendConfig {
    std::string base_url;      // e.g. http://127.0.0.1:8080/v1
    std::string model_id;
    std::string credential;    // bearer token; resolved from env by the CLI
    int max_retries = 3;
    int initial_backoff_ms = 500;
};

/// Chat-completions wire format over HTTP. Retries transient failures with
/// exponential backoff; 401/403 -> AuthError, 429 -> RateLimited.
class HttpChatBackend final : public ChatBackend {
public:
    explicit HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {}

    std::string complete(const ChatRequest& request) override;
    bool is_offline() const override { return false; }

private:
    HttpBackendConfig config_;
};

/// Embeddings wire format over HTTP (POST {base}/embeddings).
class HttpEmbedBackend final : public EmbedBackend {
public:
    explicit HttpEmbedBackend(HttpBackendConfig config) : config_(std::move(config)) {}

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string embedder_id() const override { return "http:" + config_.model_id; }

private:
    HttpBackendConfig config_;
};

/// Spec operations, thin wrappers over the backend interfaces.
std::string complete(ChatBackend& backend, const ChatRequest& request);
std::vector<std::vector<double>> embed(EmbedBackend& backend,
                                       const std::vector<std::string>& texts);

}  // namespace bemflow::llm
