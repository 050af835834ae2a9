#include "bemflow/rag.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bemflow/text_util.hpp"

namespace bemflow::rag {

using nlohmann::json;
using text::trim;

void VectorIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RagError(RagErrorKind::BadIndexFile, "cannot write index file: " + path);
    json header;
    header["dimension"] = dimension;
    header["embedder_id"] = embedder_id;
    header["chunks"] = chunks.size();
    out << header.dump() << "\n";
    for (const auto& c : chunks) {
        json record;
        record["id"] = c.id;
        record["source"] = c.source;
        record["text"] = c.text;
        record["vector"] = c.vector;
        out << record.dump() << "\n";
    }
}

VectorIndex VectorIndex::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RagError(RagErrorKind::BadIndexFile, "cannot open index file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw RagError(RagErrorKind::BadIndexFile, "index file has no header: " + path);
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded())
        throw RagError(RagErrorKind::BadIndexFile, "malformed index header: " + path);
    VectorIndex index;
    index.dimension = header.value("dimension", 0u);
    index.embedder_id = header.value("embedder_id", "");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded())
            throw RagError(RagErrorKind::BadIndexFile,
                           "malformed index record at " + path + ":" + std::to_string(line_no));
        Chunk c;
        c.id = record.value("id", "");
        c.source = record.value("source", "");
        c.text = record.value("text", "");
        c.vector = record["vector"].get<std::vector<double>>();
        if (c.vector.size() != index.dimension)
            throw RagError(RagErrorKind::DimensionMismatch,
                           "chunk " + c.id + " has dimension " + std::to_string(c.vector.size()) +
                               ", index expects " + std::to_string(index.dimension));
        index.chunks.push_back(std::move(c));
    }
    return index;
}

namespace {

std::vector<std::string> split_paragraphs(const std::string& doc) {
    std::vector<std::string> paragraphs;
    std::string current;
    for (const auto& line : text::split_lines(doc)) {
        if (trim(line).empty()) {
            if (!trim(current).empty()) paragraphs.push_back(trim(current));
            current.clear();
        } else {
            if (!current.empty()) current += "\n";
            current += line;
        }
    }
    if (!trim(current).empty()) paragraphs.push_back(trim(current));
    return paragraphs;
}

std::vector<std::string> split_sentences(const std::string& paragraph, std::size_t budget) {
    std::vector<std::string> pieces;
    std::string current;
    std::size_t start = 0;
    auto flush_sentence = [&](std::string_view sentence) {
        std::string s = trim(sentence);
        if (s.empty()) return;
        if (!current.empty() && current.size() + 1 + s.size() > budget) {
            pieces.push_back(current);
            current.clear();
        }
        while (s.size() > budget) {
            pieces.push_back(s.substr(0, budget));
            s = trim(s.substr(budget));
        }
        if (current.empty()) current = s;
        else current += " " + s;
    };
    for (std::size_t i = 0; i < paragraph.size(); ++i) {
        const char c = paragraph[i];
        const bool boundary = (c == '.' || c == '?' || c == '!') &&
                              (i + 1 >= paragraph.size() ||
                               std::isspace(static_cast<unsigned char>(paragraph[i + 1])));
        if (boundary) {
            flush_sentence(std::string_view(paragraph).substr(start, i - start + 1));
            start = i + 1;
        }
    }
    flush_sentence(std::string_view(paragraph).substr(start));
    if (!current.empty()) pieces.push_back(current);
    return pieces;
}

}  // namespace

std::vector<Chunk> chunk_corpus(const std::vector<std::pair<std::string, std::string>>& documents,
                                std::size_t char_budget) {
    std::vector<Chunk> chunks;
    for (const auto& [source, doc_text] : documents) {
        std::size_t ordinal = 0;
        for (const auto& paragraph : split_paragraphs(doc_text)) {
            std::vector<std::string> pieces;
            if (paragraph.size() <= char_budget) pieces.push_back(paragraph);
            else pieces = split_sentences(paragraph, char_budget);
            for (auto& piece : pieces) {
                Chunk c;
                c.id = source + "#p" + std::to_string(ordinal++);
                c.source = source;
                c.text = std::move(piece);
                chunks.push_back(std::move(c));
            }
        }
    }
    return chunks;
}

VectorIndex build_index(std::vector<Chunk> chunks, llm::EmbedBackend& backend) {
    if (chunks.empty())
        throw RagError(RagErrorKind::EmbeddingFailed, "cannot index an empty chunk list");
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);

    std::vector<std::vector<double>> vectors;
    try {
        vectors = llm::embed(backend, texts);
    } catch (const llm::GatewayError& e) {
        if (e.kind() == llm::GatewayErrorKind::DimensionMismatch)
            throw RagError(RagErrorKind::DimensionMismatch, e.what());
        throw RagError(RagErrorKind::EmbeddingFailed, e.what());
    }

    VectorIndex index;
    index.embedder_id = backend.embedder_id();
    index.dimension = vectors.front().size();
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        chunks[i].vector = std::move(vectors[i]);
        if (chunks[i].vector.size() != index.dimension)
            throw RagError(RagErrorKind::DimensionMismatch, "backend returned ragged vectors");
    }
    index.chunks = std::move(chunks);
    return index;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        norm_a += a[i] * a[i];
        norm_b += b[i] * b[i];
    }
    for (std::size_t i = n; i < a.size(); ++i) norm_a += a[i] * a[i];
    for (std::size_t i = n; i < b.size(); ++i) norm_b += b[i] * b[i];
    if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

std::vector<SearchHit> search(const VectorIndex& index, const std::string& query, int k,
                              llm::EmbedBackend& backend) {
    if (backend.embedder_id() != index.embedder_id)
        throw RagError(RagErrorKind::EmbedderMismatch,
                       "index was built with \"" + index.embedder_id + "\" but the query uses \"" +
                           backend.embedder_id() + "\"");
    if (k < 1) k = 1;
    std::vector<std::vector<double>> q;
    try {
        q = llm::embed(backend, {query});
    } catch (const llm::GatewayError& e) {
        throw RagError(RagErrorKind::EmbeddingFailed, e.what());
    }

    std::vector<SearchHit> hits;
    hits.reserve(index.chunks.size());
    for (const auto& c : index.chunks)
        hits.push_back(SearchHit{c, cosine_similarity(q.front(), c.vector)});
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk.id < b.chunk.id;
    });
    if (hits.size() > static_cast<std::size_t>(k)) hits.resize(static_cast<std::size_t>(k));
    return hits;
}

Answer answer(const VectorIndex& index, const std::string& question, int k,
              llm::EmbedBackend& embed_backend, llm::ChatBackend& chat_backend,
              const std::string& model_id) {
    const auto hits = search(index, question, k, embed_backend);

    std::ostringstream prompt;
    prompt << "Answer the question using only the context passages below. If the context does "
              "not cover the question, say so.\n\n";
    prompt << "Question: " << question << "\n\nContext:\n";
    Answer result;
    for (const auto& hit : hits) {
        prompt << "[" << hit.chunk.id << "] " << hit.chunk.text << "\n\n";
        result.cited_chunk_ids.push_back(hit.chunk.id);
    }

    llm::ChatRequest request;
    request.prompt = prompt.str();
    request.temperature = 0.0;
    request.model_id = model_id;
    request.request_tag = "rag/answer";
    result.text = llm::complete(chat_backend, request);
    return result;
}

std::string strip_html(std::string_view html) {
    std::string out;
    out.reserve(html.size());
    bool in_tag = false;
    bool in_script = false;
    std::size_t i = 0;
    while (i < html.size()) {
        if (!in_tag && html[i] == '<') {
            if (text::starts_with_ci(html.substr(i), "<script") ||
                text::starts_with_ci(html.substr(i), "<style")) {
                in_script = true;
            }
            if (in_script && (text::starts_with_ci(html.substr(i), "</script") ||
                              text::starts_with_ci(html.substr(i), "</style"))) {
                in_script = false;
            }
            // Block-level closers become paragraph breaks.
            if (text::starts_with_ci(html.substr(i), "</p") ||
                text::starts_with_ci(html.substr(i), "</div") ||
                text::starts_with_ci(html.substr(i), "</h"))
                out += "\n\n";
            in_tag = true;
            ++i;
            continue;
        }
        if (in_tag) {
            if (html[i] == '>') in_tag = false;
            ++i;
            continue;
        }
        if (!in_script) out.push_back(html[i]);
        ++i;
    }
    // Decode the handful of entities documentation pages actually use.
    auto replace_all = [&](std::string_view from, std::string_view to) {
        std::size_t pos = 0;
        while ((pos = out.find(from, pos)) != std::string::npos) {
            out.replace(pos, from.size(), to);
            pos += to.size();
        }
    };
    replace_all("&amp;", "&");
    replace_all("&lt;", "<");
    replace_all("&gt;", ">");
    replace_all("&quot;", "\"");
    replace_all("&#39;", "'");
    replace_all("&nbsp;", " ");
    return out;
}

}  // namespace bemflow::rag
