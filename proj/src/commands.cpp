#include "igmirag/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "igmirag/evaluation.hpp"
#include "igmirag/text.hpp"

namespace igmirag {
namespace {

using json = nlohmann::json;

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string row(std::string_view label, const std::string& value, std::size_t width = 24) {
    std::string s(label);
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s + value + "\n";
}

void emit(const std::optional<std::string>& target, const std::string& content, std::ostream& out) {
    if (!target) return;
    if (target->empty()) {
        out << content;
        return;
    }
    std::ofstream f(*target, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::invalid_argument, "cannot write " + *target);
    f << content;
}

std::optional<Config> override_config(const std::optional<std::filesystem::path>& path) {
    if (!path) return std::nullopt;
    return load_config(*path);
}

bool store_exists(const std::filesystem::path& store) {
    const auto p = store_paths(store);
    return std::filesystem::exists(p.graph) && std::filesystem::exists(p.index) &&
           std::filesystem::exists(p.manifest);
}

json strategy_json(const Strategy& s) {
    json ke = json::array();
    for (const auto& k : s.key_entities) ke.push_back({{"canonical", k.canonical}, {"aliases", k.aliases}});
    return {{"question", s.question},
            {"rewrite_question", s.rewrite_question},
            {"key_entities", std::move(ke)},
            {"keywords", s.keywords},
            {"target_layer", layer_code(s.target_layer)},
            {"matching_score", s.matching_score},
            {"semantic_depth", s.semantic_depth},
            {"downgraded", s.downgraded},
            {"warnings", s.warnings}};
}

json ranked_json(const std::map<std::string, double>& m) {
    json a = json::array();
    for (const auto& [k, v] : ranked(m)) a.push_back({{"key", k}, {"score", v}});
    return a;
}

json query_json(const QueryResult& r) {
    json j{{"question", r.question},
           {"strategy", strategy_json(r.strategy)},
           {"df_ranking", r.retrieval.df_ranking},
           {"bm25_ranking", r.retrieval.bm25_ranking},
           {"anchors", ranked_json(r.retrieval.anchors)},
           {"initial_chunks", ranked_json(r.initial_chunks)},
           {"extended", ranked_json(r.extended)},
           {"final_chunks", ranked_json(r.final_chunks)},
           {"units", r.unit_keys},
           {"chunks", r.chunk_ids},
           {"budget", {{"top_ku", r.budget.top_ku}, {"top_kc", r.budget.top_kc}}},
           {"thought", r.answer.thought},
           {"answer", r.answer.answer},
           {"tokens",
            {{"prompt", r.usage.prompt_tokens},
             {"completion", r.usage.completion_tokens},
             {"total", r.usage.total()}}}};
    if (r.diffusion) {
        j["diffusion"] = {{"iterations", r.diffusion->iterations},
                          {"phase_pairs", r.diffusion->phase_pairs},
                          {"exit", to_string(r.diffusion->exit)}};
    }
    return j;
}

std::string token_line(const TokenUsage& u) {
    return "prompt=" + std::to_string(u.prompt_tokens) + " completion=" +
           std::to_string(u.completion_tokens) + " total=" + std::to_string(u.total());
}

}  // namespace

int exit_code_for(const Error& e) noexcept {
    switch (e.code()) {
        case ErrorCode::not_found: return exit_code::missing_path;
        case ErrorCode::gateway_error:
        case ErrorCode::fixture_missing: return exit_code::gateway;
        default: return exit_code::failure;
    }
}

void set_verbosity(int level) {
    static const spdlog::level::level_enum levels[] = {spdlog::level::err, spdlog::level::warn,
                                                       spdlog::level::info, spdlog::level::debug};
    spdlog::set_level(levels[std::clamp(level, 0, 3)]);
}

std::string format_stats(const BuildStats& s) {
    std::string out;
    out += row("Entities", std::to_string(s.entities));
    out += row("Pairwise Relations", std::to_string(s.pairs));
    out += row("Multiple Associations", std::to_string(s.associations));
    out += row("Chunks", std::to_string(s.chunks));
    out += row("Tokens", std::to_string(s.corpus_tokens));
    out += row("LLM tokens", token_line(s.llm));
    out += row("Failed chunks", std::to_string(s.failed_chunks.size()));
    return out;
}

int cmd_index(const IndexArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (!std::filesystem::exists(args.corpus)) {
            err << "error: corpus not found: " << args.corpus.string() << "\n";
            return exit_code::missing_path;
        }
        if (!std::filesystem::exists(args.config)) {
            err << "error: config not found: " << args.config.string() << "\n";
            return exit_code::missing_path;
        }
        const auto config = load_config(args.config);
        const auto corpus = load_corpus(args.corpus);
        std::filesystem::path prefix;
        if (args.output) {
            prefix = *args.output;
        } else {
            prefix = args.corpus;
            if (prefix.filename().empty()) prefix = prefix.parent_path();
            prefix.replace_extension();
        }
        Gateway gateway(config.gateway);
        const auto built = build_index(corpus, config.build, gateway);
        save_store(built, config, prefix);
        out << format_stats(built.stats);
        for (const auto& id : built.stats.failed_chunks) out << "  failed: " << id << "\n";
        out << row("Store", store_paths(prefix).graph.string());
        return exit_code::ok;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

int cmd_query(const QueryArgs& args, std::ostream& out, std::ostream& err) {
    QueryResult result;
    try {
        if (!store_exists(args.store)) {
            err << "error: store not found: " << args.store.string() << "\n";
            return exit_code::missing_path;
        }
        const auto cfg = override_config(args.config);
        const auto store = load_store(args.store, cfg ? &*cfg : nullptr);
        Gateway gateway(store.config.gateway);
        QueryOptions opts;
        opts.diffusion = !args.no_diffusion;
        if (args.mode) opts.mode = answer_mode_from_string(*args.mode);
        run_query(store, args.question, gateway, opts, result);
        if (args.json) {
            out << query_json(result).dump(1) << "\n";
        } else {
            out << "Thought: " << result.answer.thought << "\n";
            out << "Answer: " << result.answer.answer << "\n";
            out << "Strategy: target_layer=" << layer_code(result.strategy.target_layer)
                << " matching_score=" << result.strategy.matching_score
                << " semantic_depth=" << result.strategy.semantic_depth
                << (result.strategy.downgraded ? " (fallback)" : "") << "\n";
            out << "Tokens: " << token_line(result.usage) << "\n";
        }
        emit(args.dump_context, result.window.rendered, out);
        if (args.trace_diffusion && result.diffusion) emit(args.trace_diffusion, trace_jsonl(*result.diffusion), out);
        return exit_code::ok;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        if (args.trace_diffusion) {
            err << "partial trace:\n" << query_json(result).dump(1) << "\n";
            if (result.diffusion) err << trace_jsonl(*result.diffusion);
        }
        return exit_code_for(e);
    }
}

std::vector<QaRecord> load_qa(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "qa file " + path.string());
    std::vector<QaRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            QaRecord r;
            r.question = j.at("question").get<std::string>();
            const auto& a = j.at("answers");
            if (a.is_string()) {
                r.answers.push_back(a.get<std::string>());
            } else {
                r.answers = a.get<std::vector<std::string>>();
            }
            if (r.answers.empty()) throw Error(ErrorCode::invalid_argument, "no answers");
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::invalid_argument, path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

EvalReport evaluate(const Store& store, const std::vector<QaRecord>& qa, Gateway& gateway,
                    Gateway* judge, bool diffusion) {
    EvalReport report;
    report.judged = judge != nullptr;
    const auto pipeline_before = gateway.ledger().totals();
    const auto judge_before = judge != nullptr ? judge->ledger().totals() : TokenUsage{};
    std::map<int, std::size_t> depth_counts;
    double em_sum = 0.0;
    double f1_sum = 0.0;
    std::size_t scored = 0;
    QueryOptions opts;
    opts.diffusion = diffusion;
    for (const auto& item : qa) {
        EvalRecord rec;
        rec.question = item.question;
        rec.golds = item.answers;
        QueryResult r;
        try {
            run_query(store, item.question, gateway, opts, r);
        } catch (const Error& e) {
            rec.error = e.what();
            rec.tokens = r.usage.total();
            ++report.failures;
            report.records.push_back(std::move(rec));
            continue;
        }
        rec.predicted = r.answer.answer;
        rec.tokens = r.usage.total();
        rec.depth_used = r.strategy.semantic_depth;
        ++depth_counts[rec.depth_used];
        if (judge != nullptr) {
            try {
                const auto s = judge_score(item.question, text::join(item.answers, " | "), rec.predicted, *judge);
                rec.em = s.em;
                rec.f1 = s.f1;
                em_sum += s.em;
                f1_sum += s.f1;
                ++scored;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::judge_failure) throw;
                rec.judge_failed = true;
                ++report.judge_failures;
            }
        } else {
            const auto s = short_form_score(rec.predicted, item.answers);
            rec.em = s.em;
            rec.f1 = s.f1;
            em_sum += 100.0 * s.em;
            f1_sum += 100.0 * s.f1;
            ++scored;
        }
        report.records.push_back(std::move(rec));
    }
    report.queries = qa.size();
    if (scored > 0) {
        report.em = em_sum / static_cast<double>(scored);
        report.f1 = f1_sum / static_cast<double>(scored);
    }
    const auto after = gateway.ledger().totals();
    report.pipeline_tokens = TokenUsage{after.prompt_tokens - pipeline_before.prompt_tokens,
                                        after.completion_tokens - pipeline_before.completion_tokens};
    if (judge != nullptr) {
        const auto ja = judge->ledger().totals();
        report.judge_tokens = TokenUsage{ja.prompt_tokens - judge_before.prompt_tokens,
                                         ja.completion_tokens - judge_before.completion_tokens};
    }
    if (report.queries > 0) {
        report.avg_tokens = static_cast<double>(report.pipeline_tokens.total()) / static_cast<double>(report.queries);
    }
    const std::size_t answered = report.queries - report.failures;
    for (int d = 1; d <= 5; ++d) {
        const auto it = depth_counts.find(d);
        const double n = it == depth_counts.end() ? 0.0 : static_cast<double>(it->second);
        report.depth_histogram[d] = answered == 0 ? 0.0 : 100.0 * n / static_cast<double>(answered);
    }
    return report;
}

json to_json(const EvalReport& r) {
    json records = json::array();
    for (const auto& rec : r.records) {
        json j{{"question", rec.question},
               {"answers", rec.golds},
               {"predicted", rec.predicted},
               {"em", rec.em},
               {"f1", rec.f1},
               {"tokens", rec.tokens},
               {"depth_used", rec.depth_used}};
        if (!rec.error.empty()) j["error"] = rec.error;
        if (rec.judge_failed) j["judge_failure"] = true;
        records.push_back(std::move(j));
    }
    json hist = json::object();
    for (const auto& [d, pct] : r.depth_histogram) hist[std::to_string(d)] = pct;
    return {{"scorer", r.judged ? "judge" : "short_form"},
            {"queries", r.queries},
            {"failures", r.failures},
            {"judge_failures", r.judge_failures},
            {"em", r.em},
            {"f1", r.f1},
            {"avg_tokens", r.avg_tokens},
            {"pipeline_tokens", r.pipeline_tokens.total()},
            {"judge_tokens", r.judge_tokens.total()},
            {"depth_histogram", std::move(hist)},
            {"records", std::move(records)}};
}

std::string format_report(const EvalReport& r) {
    std::string out;
    out += row("Scorer", r.judged ? "judge" : "short_form");
    out += row("Queries", std::to_string(r.queries));
    out += row("Failures", std::to_string(r.failures));
    if (r.judged) out += row("Judge failures", std::to_string(r.judge_failures));
    out += row("EM (%)", fixed(r.em, 2));
    out += row("F1 (%)", fixed(r.f1, 2));
    out += row("Avg. Tokens", fixed(r.avg_tokens, 1));
    if (r.judged) out += row("Judge tokens", std::to_string(r.judge_tokens.total()));
    out += "Semantic depth distribution\n";
    for (const auto& [d, pct] : r.depth_histogram) {
        std::string bar(static_cast<std::size_t>(pct / 5.0 + 0.5), '#');
        out += "  d=" + std::to_string(d) + "  " + fixed(pct, 1) + "%  " + bar + "\n";
    }
    return out;
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (!store_exists(args.store)) {
            err << "error: store not found: " << args.store.string() << "\n";
            return exit_code::missing_path;
        }
        if (!std::filesystem::exists(args.qa)) {
            err << "error: qa file not found: " << args.qa.string() << "\n";
            return exit_code::missing_path;
        }
        const auto cfg = override_config(args.config);
        const auto store = load_store(args.store, cfg ? &*cfg : nullptr);
        const auto qa = load_qa(args.qa);
        Gateway gateway(store.config.gateway);
        std::optional<Gateway> judge;
        if (args.judge) judge.emplace(store.config.judge);
        const auto report = evaluate(store, qa, gateway, judge ? &*judge : nullptr, !args.no_diffusion);
        out << format_report(report);
        if (args.report) {
            std::ofstream f(*args.report, std::ios::binary | std::ios::trunc);
            if (!f) throw Error(ErrorCode::invalid_argument, "cannot write " + args.report->string());
            f << to_json(report).dump(1) << "\n";
        }
        return exit_code::ok;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

int cmd_inspect(const InspectArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (!store_exists(args.store)) {
            err << "error: store not found: " << args.store.string() << "\n";
            return exit_code::missing_path;
        }
        const auto store = load_store(args.store);
        const auto& g = store.graph;
        if (args.json) {
            out << json{{"stats", to_json(store.stats)},
                        {"vertices", g.vertex_count()},
                        {"fr_edges", g.fr_edge_count()},
                        {"lr_edges", g.lr_edges().size()},
                        {"hr_edges", g.hr_edges().size()},
                        {"embedding_dim", store.df.dim()}}
                       .dump(1)
                << "\n";
            return exit_code::ok;
        }
        out << format_stats(store.stats);
        out << row("LR edges", std::to_string(g.lr_edges().size()));
        out << row("HR edges", std::to_string(g.hr_edges().size()));
        out << row("FR edges", std::to_string(g.fr_edge_count()));
        out << row("Embedding dim", std::to_string(store.df.dim()));
        for (Layer layer : {Layer::entity, Layer::pair_relation, Layer::multi_association}) {
            out << "-*" << layer_label(layer) << "*-\n";
            for (const auto& [key, v] : g.vertices()) {
                if (v.layer == layer) out << "  " << v.name << "  [" << v.chunk_ids.size() << " chunk(s)]\n";
            }
        }
        out << "-*Passages*-\n";
        for (const auto& [id, c] : g.chunks()) {
            out << "  " << id << "  " << c.token_count << " tokens\n";
        }
        return exit_code::ok;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace igmirag
