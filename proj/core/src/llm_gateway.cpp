#include "bemflow/llm_gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bemflow/text_util.hpp"

namespace bemflow::llm {

using nlohmann::json;

std::string request_digest(const ChatRequest& request) {
    std::string material = request.model_id;
    material.push_back('\x1f');
    material += text::format_double(request.temperature);
    material.push_back('\x1f');
    material += request.prompt;
    return text::to_hex(text::fnv1a64(material));
}

std::string embed_digest(const std::string& embedder_id, const std::vector<std::string>& texts) {
    std::string material = "embed\x1f" + embedder_id;
    for (const auto& t : texts) {
        material.push_back('\x1f');
        material += t;
    }
    return text::to_hex(text::fnv1a64(material));
}

namespace {

json entry_to_json(const TranscriptEntry& e) {
    json j;
    j["kind"] = e.kind;
    j["digest"] = e.digest;
    j["tag"] = e.tag;
    j["model"] = e.model;
    j["temperature"] = e.temperature;
    if (e.kind == "chat") {
        j["prompt"] = e.prompt;
        j["response"] = e.response;
    } else {
        j["texts"] = e.texts;
        j["vectors"] = e.vectors;
    }
    if (!e.timestamp.empty()) j["ts"] = e.timestamp;
    return j;
}

TranscriptEntry entry_from_json(const json& j) {
    TranscriptEntry e;
    e.kind = j.value("kind", "chat");
    e.digest = j.value("digest", "");
    e.tag = j.value("tag", "");
    e.model = j.value("model", "");
    e.temperature = j.value("temperature", 0.0);
    e.prompt = j.value("prompt", "");
    e.response = j.value("response", "");
    if (j.contains("texts")) e.texts = j["texts"].get<std::vector<std::string>>();
    if (j.contains("vectors")) e.vectors = j["vectors"].get<std::vector<std::vector<double>>>();
    e.timestamp = j.value("ts", "");
    return e;
}

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%FT%TZ", &tm_utc);
    return buf;
}

}  // namespace

Transcript Transcript::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw GatewayError(GatewayErrorKind::Transport,
                           "cannot open transcript file: " + path);
    Transcript t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw GatewayError(GatewayErrorKind::Transport,
                               "malformed transcript record at " + path + ":" +
                                   std::to_string(line_no));
        t.append(entry_from_json(j));
    }
    return t;
}

void Transcript::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw GatewayError(GatewayErrorKind::Transport, "cannot write transcript file: " + path);
    for (const auto& e : order_) out << entry_to_json(e).dump() << "\n";
}

void Transcript::append(TranscriptEntry entry) {
    auto it = by_digest_.find(entry.digest);
    if (it != by_digest_.end()) {
        warnings_.push_back("duplicate digest " + entry.digest + " (tag \"" + entry.tag +
                            "\"); last response wins");
        order_[it->second] = std::move(entry);
        return;
    }
    by_digest_[entry.digest] = order_.size();
    order_.push_back(std::move(entry));
}

const TranscriptEntry* Transcript::find(const std::string& digest) const {
    auto it = by_digest_.find(digest);
    if (it == by_digest_.end()) return nullptr;
    return &order_[it->second];
}

std::string ReplayBackend::complete(const ChatRequest& request) {
    const std::string digest = request_digest(request);
    const TranscriptEntry* entry = transcript_.find(digest);
    if (!entry || entry->kind != "chat")
        throw GatewayError(GatewayErrorKind::ReplayMiss,
                           "no recorded response for digest " + digest + " (request tag \"" +
                               request.request_tag + "\")");
    return entry->response;
}

std::vector<std::vector<double>> ReplayBackend::embed(const std::vector<std::string>& texts) {
    const std::string digest = embed_digest(embedder_id_, texts);
    const TranscriptEntry* entry = transcript_.find(digest);
    if (!entry || entry->kind != "embed")
        throw GatewayError(GatewayErrorKind::ReplayMiss,
                           "no recorded embedding for digest " + digest);
    return entry->vectors;
}

RecordingBackend::RecordingBackend(ChatBackend* chat, EmbedBackend* embed, std::string path,
                                   bool with_timestamps)
    : chat_(chat), embed_(embed), path_(std::move(path)), with_timestamps_(with_timestamps) {}

RecordingBackend::~RecordingBackend() {
    try {
        flush();
    } catch (...) {
        // Destructor must not throw; an explicit flush() reports failures.
    }
}

void RecordingBackend::flush() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!path_.empty()) transcript_.save(path_);
}

std::string RecordingBackend::complete(const ChatRequest& request) {
    if (!chat_) throw GatewayError(GatewayErrorKind::Transport, "no chat backend to record");
    std::string response = chat_->complete(request);
    TranscriptEntry e;
    e.kind = "chat";
    e.digest = request_digest(request);
    e.tag = request.request_tag;
    e.model = request.model_id;
    e.temperature = request.temperature;
    e.prompt = request.prompt;
    e.response = response;
    if (with_timestamps_) e.timestamp = now_iso8601();
    {
        std::lock_guard<std::mutex> lock(mutex_);
        transcript_.append(std::move(e));
    }
    return response;
}

std::vector<std::vector<double>> RecordingBackend::embed(const std::vector<std::string>& texts) {
    if (!embed_) throw GatewayError(GatewayErrorKind::Transport, "no embed backend to record");
    auto vectors = embed_->embed(texts);
    TranscriptEntry e;
    e.kind = "embed";
    e.digest = embed_digest(embed_->embedder_id(), texts);
    e.tag = "embed";
    e.model = embed_->embedder_id();
    e.texts = texts;
    e.vectors = vectors;
    if (with_timestamps_) e.timestamp = now_iso8601();
    {
        std::lock_guard<std::mutex> lock(mutex_);
        transcript_.append(std::move(e));
    }
    return vectors;
}

std::string RecordingBackend::embedder_id() const {
    return embed_ ? embed_->embedder_id() : "none";
}

std::vector<std::vector<double>> StubEmbedBackend::embed(const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        std::vector<double> v(dimension_, 0.0);
        // Unique, normalized tokens: lowercase alphanumeric runs.
        std::vector<std::string> tokens;
        std::string cur;
        for (char c : t) {
            if (std::isalnum(static_cast<unsigned char>(c))) {
                cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            } else if (!cur.empty()) {
                tokens.push_back(cur);
                cur.clear();
            }
        }
        if (!cur.empty()) tokens.push_back(cur);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (const auto& tok : tokens) {
            const std::uint64_t h = text::fnv1a64(tok, 14695981039346656037ull ^ seed_);
            const std::size_t idx = h % dimension_;
            const double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
            v[idx] += sign;
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        if (norm > 0) {
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
        }
        out.push_back(std::move(v));
    }
    for (const auto& v : out) {
        if (v.size() != dimension_)
            throw GatewayError(GatewayErrorKind::DimensionMismatch, "stub produced ragged vectors");
    }
    return out;
}

std::string StubEmbedBackend::embedder_id() const {
    return "stub:fnv1a:dim=" + std::to_string(dimension_) + ":seed=" + std::to_string(seed_);
}

std::string complete(ChatBackend& backend, const ChatRequest& request) {
    if (!(request.temperature >= 0.0 && request.temperature <= 1.0))
        throw GatewayError(GatewayErrorKind::Transport,
                           "temperature must be within [0, 1], got " +
                               text::format_double(request.temperature));
    return backend.complete(request);
}

std::vector<std::vector<double>> embed(EmbedBackend& backend,
                                       const std::vector<std::string>& texts) {
    if (texts.empty())
        throw GatewayError(GatewayErrorKind::Transport, "embed requires at least one text");
    auto vectors = backend.embed(texts);
    if (vectors.size() != texts.size())
        throw GatewayError(GatewayErrorKind::DimensionMismatch,
                           "backend returned " + std::to_string(vectors.size()) + " vectors for " +
                               std::to_string(texts.size()) + " texts");
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size())
            throw GatewayError(GatewayErrorKind::DimensionMismatch,
                               "backend returned ragged vectors");
    }
    return vectors;
}

}  // namespace bemflow::llm
