#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bemflow/llm_gateway.hpp"

namespace bemflow::rag {

struct Chunk {
    std::string id;      // source + ordinal, stable
    std::string source;  // URL or file path
    std::string text;
    std::vector<double> vector;  // present after indexing
};

struct VectorIndex {
    std::size_t dimension = 0;
    std::string embedder_id;
    std::vector<Chunk> chunks;

    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);
};

enum class RagErrorKind { EmbeddingFailed, DimensionMismatch, EmbedderMismatch, BadIndexFile };

class RagError : public std::runtime_error {
public:
    RagError(RagErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    RagErrorKind kind() const { return kind_; }

private:
    RagErrorKind kind_;
};

/// Split documents on blank-line paragraph boundaries; paragraphs over the
/// character budget are split again at sentence boundaries.
std::vector<Chunk> chunk_corpus(const std::vector<std::pair<std::string, std::string>>& documents,
                                std::size_t char_budget = 2000);

/// Embed all chunks and assemble the index. Deterministic given the backend.
VectorIndex build_index(std::vector<Chunk> chunks, llm::EmbedBackend& backend);

struct SearchHit {
    Chunk chunk;
    double score = 0.0;
};

/// Cosine similarity over every chunk, descending, ties broken by chunk id.
std::vector<SearchHit> search(const VectorIndex& index, const std::string& query, int k,
                              llm::EmbedBackend& backend);

struct Answer {
    std::string text;
    std::vector<std::string> cited_chunk_ids;
};

/// Retrieve top-k chunks as context, then ask the chat backend.
Answer answer(const VectorIndex& index, const std::string& question, int k,
              llm::EmbedBackend& embed_backend, llm::ChatBackend& chat_backend,
              const std::string& model_id);

/// Zero-norm safe: either zero vector scores 0, never NaN.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Minimal tag stripper for locally saved documentation pages.
std::string strip_html(std::string_view html);

}  // namespace bemflow::rag
