#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "igmirag/df_index.hpp"
#include "igmirag/gateway.hpp"
#include "igmirag/hnsw.hpp"
#include "igmirag/hypergraph.hpp"
#include "igmirag/lexical_index.hpp"

namespace igmirag {

struct Document {
    std::string title;
    std::string text;
};

/// A directory of UTF-8 text files (title = file stem, sorted by name) or a
/// JSON-lines file of {title, text}.
std::vector<Document> load_corpus(const std::filesystem::path& path);

inline constexpr std::size_t kChunkOverflowSlack = 64;

/// Greedy sentence packing without overlap. A sentence longer than
/// chunk_tokens stays whole unless it exceeds the overflow slack, in which
/// case it is split at token boundaries. Concatenated texts equal `doc.text`.
std::vector<Chunk> chunk_document(const Document& doc, std::size_t chunk_tokens);

struct ExtractedEntity {
    std::string name;
    std::string description;
    std::vector<std::string> attributes;
};

struct ExtractedRelation {
    std::vector<std::string> members;  // entity display names
    std::string description;
    std::vector<std::string> attributes;
};

struct ExtractionResult {
    std::vector<ExtractedEntity> entities;
    std::vector<ExtractedRelation> pairs;
    std::vector<std::string> keywords;
    std::vector<ExtractedRelation> associations;
    std::vector<std::string> repairs;  // member-name repairs and drops
    TokenUsage usage;
};

/// Resolves a member name against stage-1 entity names: exact normalized
/// match, then containment (longest entity name, ties lexicographic).
/// Returns an empty string when nothing matches.
std::string repair_member(const std::string& member, const std::vector<ExtractedEntity>& entities);

/// Four-stage conversation: entities, pairs, high-level keywords, associations.
/// Throws extraction_failure (detail = raw reply) after `max_retries` bad replies.
ExtractionResult extract_knowledge(const Chunk& chunk, Gateway& gateway, int max_retries = 2);

struct BuildParams {
    std::size_t chunk_tokens = 780;
    std::size_t parallelism = 4;
    int max_retries = 2;
    AnnParams ann;
    Bm25Params bm25;
};

struct BuildStats {
    std::size_t entities = 0;
    std::size_t pairs = 0;
    std::size_t associations = 0;
    std::size_t chunks = 0;
    std::size_t corpus_tokens = 0;
    TokenUsage llm;
    std::vector<std::string> failed_chunks;

    bool operator==(const BuildStats&) const = default;
};

struct BuiltIndex {
    Hypergraph graph;
    DFIndex df;
    LexicalIndex lexical;
    BuildStats stats;
};

/// Vertex text used for the description embedding (name when empty).
std::string embedding_text(const Vertex& v);

/// Chunks, extracts and indexes `corpus`. Chunk failures are skipped and
/// reported; zero successful chunks throws build_failure.
BuiltIndex build_index(const std::vector<Document>& corpus, const BuildParams& params,
                       Gateway& gateway);

}  // namespace igmirag
