#include "igmirag/extraction.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "igmirag/error.hpp"
#include "igmirag/prompts.hpp"
#include "igmirag/text.hpp"

namespace igmirag {
namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// Sentences keep their trailing whitespace so concatenation is lossless.
std::vector<std::string_view> split_sentences(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        const bool terminal = c == '.' || c == '!' || c == '?';
        if ((terminal && (i + 1 == s.size() || is_space(s[i + 1]))) || c == '\n') {
            std::size_t j = i + 1;
            while (j < s.size() && is_space(s[j])) ++j;
            out.push_back(s.substr(start, j - start));
            start = j;
            i = j;
            continue;
        }
        ++i;
    }
    if (start < s.size()) out.push_back(s.substr(start));
    return out;
}

/// Cuts `s` after every `limit` tokens.
std::vector<std::string_view> hard_split(std::string_view s, std::size_t limit) {
    std::vector<std::string_view> out;
    const auto tokens = text::approx_tokens(s);
    std::size_t start = 0;
    for (std::size_t t = limit; t < tokens.size(); t += limit) {
        const auto cut = static_cast<std::size_t>(tokens[t].data() - s.data());
        out.push_back(s.substr(start, cut - start));
        start = cut;
    }
    out.push_back(s.substr(start));
    return out;
}

std::vector<std::string> string_list(const nlohmann::json& v) {
    std::vector<std::string> out;
    if (v.is_string()) {
        auto s = std::string(text::trim(v.get<std::string>()));
        if (!s.empty()) out.push_back(std::move(s));
    } else if (v.is_array()) {
        for (const auto& e : v) {
            if (!e.is_string()) continue;
            auto s = std::string(text::trim(e.get<std::string>()));
            if (!s.empty()) out.push_back(std::move(s));
        }
    }
    return out;
}

std::string string_field(const nlohmann::json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end() || !it->is_string()) return {};
    return std::string(text::trim(it->get<std::string>()));
}

std::vector<std::string> member_list(const nlohmann::json& v) {
    if (v.is_string()) {
        std::vector<std::string> out;
        for (const auto& p : text::split(v.get<std::string>(), ',')) {
            auto s = std::string(text::trim(p));
            if (!s.empty()) out.push_back(std::move(s));
        }
        return out;
    }
    return string_list(v);
}

/// Strips code fences and keeps the outermost {...} span.
std::optional<nlohmann::json> tolerant_object(std::string_view reply) {
    const auto open = reply.find('{');
    const auto close = reply.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        return std::nullopt;
    }
    auto doc = nlohmann::json::parse(reply.substr(open, close - open + 1), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    return doc;
}

struct Stage {
    const char* prompt;
    const char* format;
};

constexpr Stage kStages[] = {
    {"extract_entities", "format_entities"},
    {"extract_pairs", "format_pairs"},
    {"extract_keywords", "format_keywords"},
    {"extract_associations", "format_associations"},
};

std::vector<ExtractedRelation> relations(const nlohmann::json& doc, const char* list_field,
                                         const char* member_field) {
    std::vector<ExtractedRelation> out;
    auto it = doc.find(list_field);
    if (it == doc.end() || !it->is_array()) return out;
    for (const auto& item : *it) {
        if (!item.is_object() || !item.contains(member_field)) continue;
        ExtractedRelation r;
        r.members = member_list(item.at(member_field));
        r.description = string_field(item, "relationship_description");
        if (item.contains("attribute")) r.attributes = string_list(item.at("attribute"));
        out.push_back(std::move(r));
    }
    return out;
}

void repair_relations(std::vector<ExtractedRelation>& rels, std::size_t min_members,
                      std::size_t max_members, const std::vector<ExtractedEntity>& entities,
                      std::vector<std::string>& log, const char* kind) {
    std::vector<ExtractedRelation> kept;
    for (auto& r : rels) {
        std::vector<std::string> members;
        std::set<std::string> seen;
        for (const auto& m : r.members) {
            const auto fixed = repair_member(m, entities);
            if (fixed.empty()) {
                log.push_back(std::string(kind) + ": dropped member '" + m + "'");
                continue;
            }
            if (fixed != m) log.push_back(std::string(kind) + ": '" + m + "' -> '" + fixed + "'");
            if (seen.insert(normalize_name(fixed)).second) members.push_back(fixed);
        }
        if (members.size() < min_members || members.size() > max_members) {
            log.push_back(std::string(kind) + ": dropped relation with " +
                          std::to_string(members.size()) + " usable members");
            continue;
        }
        r.members = std::move(members);
        kept.push_back(std::move(r));
    }
    rels = std::move(kept);
}

}  // namespace

std::vector<Document> load_corpus(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw Error(ErrorCode::not_found, "corpus " + path.string());
    std::vector<Document> docs;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) docs.push_back(Document{f.stem().string(), read_file(f)});
        return docs;
    }
    std::istringstream lines(read_file(path));
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            docs.push_back(Document{j.at("title").get<std::string>(), j.at("text").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::invalid_argument,
                        path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return docs;
}

std::vector<Chunk> chunk_document(const Document& doc, std::size_t chunk_tokens) {
    if (chunk_tokens == 0) throw Error(ErrorCode::invalid_argument, "chunk_tokens must be positive");
    if (text::count_tokens(doc.text) == 0) {
        throw Error(ErrorCode::invalid_argument, "empty document '" + doc.title + "'");
    }
    std::vector<std::string_view> pieces;
    for (auto s : split_sentences(doc.text)) {
        if (text::count_tokens(s) > chunk_tokens + kChunkOverflowSlack) {
            for (auto p : hard_split(s, chunk_tokens)) pieces.push_back(p);
        } else {
            pieces.push_back(s);
        }
    }

    std::vector<Chunk> chunks;
    std::string current;
    std::size_t current_tokens = 0;
    auto flush = [&] {
        Chunk c;
        c.id = doc.title + "#" + std::to_string(chunks.size() + 1);
        c.source_title = doc.title;
        c.text = std::move(current);
        c.token_count = current_tokens;
        chunks.push_back(std::move(c));
        current.clear();
        current_tokens = 0;
    };
    for (auto p : pieces) {
        const auto n = text::count_tokens(p);
        if (current_tokens > 0 && current_tokens + n > chunk_tokens) flush();
        current += p;
        current_tokens += n;
    }
    if (current_tokens > 0) {
        flush();
    } else if (!current.empty()) {
        // Token-free tail (whitespace) belongs to the previous chunk.
        chunks.back().text += current;
    }
    return chunks;
}

std::string repair_member(const std::string& member, const std::vector<ExtractedEntity>& entities) {
    const auto norm = normalize_name(member);
    if (norm.empty()) return {};
    for (const auto& e : entities) {
        if (normalize_name(e.name) == norm) return e.name;
    }
    const ExtractedEntity* best = nullptr;
    std::string best_norm;
    for (const auto& e : entities) {
        const auto en = normalize_name(e.name);
        if (en.empty()) continue;
        if (en.find(norm) == std::string::npos && norm.find(en) == std::string::npos) continue;
        if (best == nullptr || en.size() > best_norm.size() ||
            (en.size() == best_norm.size() && en < best_norm)) {
            best = &e;
            best_norm = en;
        }
    }
    return best == nullptr ? std::string() : best->name;
}

ExtractionResult extract_knowledge(const Chunk& chunk, Gateway& gateway, int max_retries) {
    ExtractionResult result;
    std::vector<ChatMessage> conversation;
    ChatOptions opts;
    opts.ledger_tag = "extraction";

    for (std::size_t stage = 0; stage < std::size(kStages); ++stage) {
        std::string content = prompts::get(kStages[stage].prompt);
        content += "\n";
        content += prompts::get(kStages[stage].format);
        if (stage == 0) {
            content += "\n-Text-\nTitle: " + chunk.source_title + "\nText: " + chunk.text;
        }
        conversation.push_back(ChatMessage{"user", std::move(content)});

        std::vector<ChatMessage> attempt = conversation;
        std::optional<nlohmann::json> doc;
        std::string reply;
        for (int a = 0; a <= max_retries; ++a) {
            auto r = gateway.chat(attempt, opts);
            result.usage += r.usage;
            reply = std::move(r.text);
            doc = tolerant_object(reply);
            if (doc) break;
            attempt.push_back(ChatMessage{"assistant", reply});
            attempt.push_back(ChatMessage{"user", prompts::get("retry_notice")});
        }
        if (!doc) {
            throw Error(ErrorCode::extraction_failure,
                        "chunk '" + chunk.id + "' stage " + std::to_string(stage + 1) +
                            ": unparseable reply",
                        reply);
        }
        conversation.push_back(ChatMessage{"assistant", reply});

        switch (stage) {
            case 0:
                if (auto it = doc->find("entities"); it != doc->end() && it->is_array()) {
                    for (const auto& item : *it) {
                        if (!item.is_object()) continue;
                        ExtractedEntity e;
                        e.name = string_field(item, "entity_name");
                        if (e.name.empty()) continue;
                        e.description = string_field(item, "entity_description");
                        if (item.contains("attribute")) e.attributes = string_list(item.at("attribute"));
                        result.entities.push_back(std::move(e));
                    }
                }
                break;
            case 1: result.pairs = relations(*doc, "pairs", "entities_pair"); break;
            case 2:
                if (doc->contains("high_level_keywords")) {
                    result.keywords = string_list(doc->at("high_level_keywords"));
                }
                break;
            default: result.associations = relations(*doc, "associations", "entities_set"); break;
        }
    }

    repair_relations(result.pairs, 2, 2, result.entities, result.repairs, "pair");
    repair_relations(result.associations, 2, std::numeric_limits<std::size_t>::max(), result.entities,
                     result.repairs, "association");
    for (const auto& r : result.repairs) spdlog::debug("extraction [{}] {}", chunk.id, r);
    return result;
}

std::string embedding_text(const Vertex& v) {
    return v.description.empty() ? v.name : v.description;
}

BuiltIndex build_index(const std::vector<Document>& corpus, const BuildParams& params,
                       Gateway& gateway) {
    if (corpus.empty()) throw Error(ErrorCode::build_failure, "empty corpus");
    std::vector<Chunk> chunks;
    std::set<std::string> titles;
    for (const auto& doc : corpus) {
        if (!titles.insert(doc.title).second) {
            throw Error(ErrorCode::invalid_argument, "duplicate document title '" + doc.title + "'");
        }
        for (auto& c : chunk_document(doc, params.chunk_tokens)) chunks.push_back(std::move(c));
    }

    std::vector<std::optional<ExtractionResult>> results(chunks.size());
    std::vector<std::exception_ptr> errors(chunks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < chunks.size(); i = next++) {
            try {
                results[i] = extract_knowledge(chunks[i], gateway, params.max_retries);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t width = std::clamp<std::size_t>(params.parallelism, 1, std::max<std::size_t>(chunks.size(), 1));
    if (width == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < width; ++t) pool.emplace_back(worker);
    }

    BuiltIndex built;
    auto& g = built.graph;
    auto& stats = built.stats;
    std::size_t succeeded = 0;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        Chunk chunk = chunks[i];
        stats.corpus_tokens += chunk.token_count;
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::extraction_failure) throw;
                spdlog::warn("extraction failed for chunk '{}': {}", chunk.id, e.what());
                stats.failed_chunks.push_back(chunk.id);
                g.upsert_chunk(std::move(chunk));
                continue;
            }
        }
        auto& r = *results[i];
        ++succeeded;
        stats.llm += r.usage;
        chunk.keywords = r.keywords;
        const std::string id = chunk.id;
        g.upsert_chunk(std::move(chunk));
        for (const auto& e : r.entities) {
            g.upsert_vertex(make_entity(e.name, e.description, e.attributes, {id}));
        }
        for (const auto& p : r.pairs) {
            g.upsert_vertex(make_relation(Layer::pair_relation, p.members, p.description, p.attributes, {id}));
        }
        for (const auto& a : r.associations) {
            g.upsert_vertex(make_relation(Layer::multi_association, a.members, a.description,
                                          a.attributes, {id}));
        }
    }
    if (succeeded == 0) throw Error(ErrorCode::build_failure, "no chunk was extracted successfully");
    g.validate(true);
    if (g.vertex_count() == 0) throw Error(ErrorCode::build_failure, "extraction produced no vertices");

    std::vector<std::string> keys;
    std::vector<std::string> texts;
    std::map<std::string, Layer> layers;
    for (const auto& [key, v] : g.vertices()) {
        keys.push_back(key);
        texts.push_back(embedding_text(v));
        layers.emplace(key, v.layer);
    }
    EmbeddingTable table;
    constexpr std::size_t kBatch = 64;
    for (std::size_t i = 0; i < texts.size(); i += kBatch) {
        const std::size_t n = std::min(kBatch, texts.size() - i);
        auto vecs = gateway.embed(std::span<const std::string>(texts.data() + i, n));
        if (vecs.size() != n) throw Error(ErrorCode::gateway_error, "embedding count mismatch");
        for (std::size_t j = 0; j < n; ++j) table.insert(keys[i + j], std::move(vecs[j]));
    }
    built.df = DFIndex::build(std::move(table), layers, params.ann);
    built.lexical = LexicalIndex::build(g, params.bm25);

    stats.entities = g.count(Layer::entity);
    stats.pairs = g.count(Layer::pair_relation);
    stats.associations = g.count(Layer::multi_association);
    stats.chunks = g.chunk_count();
    return built;
}

}  // namespace igmirag
