#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "igmirag/commands.hpp"

int main(int argc, char** argv) {
    using namespace igmirag;
    CLI::App app{"Hypergraph retrieval-augmented generation: index, query, evaluate"};
    app.require_subcommand(1);
    int verbose = 0;
    app.add_flag("-v,--verbose", verbose, "Raise log verbosity (repeatable)");
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Only log errors");

    IndexArgs index;
    std::string index_out;
    auto* idx = app.add_subcommand("index", "Build a store from a corpus");
    idx->add_option("corpus", index.corpus, "Directory of text files or JSON-lines {title, text}")->required();
    idx->add_option("-c,--config", index.config, "Config JSON")->required();
    auto* idx_out = idx->add_option("-o,--output", index_out, "Store prefix (default: corpus path without extension)");

    QueryArgs query;
    std::string query_cfg;
    std::string dump_context;
    std::string trace;
    std::string mode;
    auto* qry = app.add_subcommand("query", "Answer one question against a store");
    qry->add_option("store", query.store, "Store prefix")->required();
    qry->add_option("question", query.question, "Question text")->required();
    auto* q_cfg = qry->add_option("-c,--config", query_cfg, "Override the store's config");
    qry->add_flag("--no-diffusion", query.no_diffusion, "Anchors and initial chunks only");
    auto* q_dump = qry->add_option("--dump-context", dump_context, "Write the rendered context (stdout when no file)")
                       ->expected(0, 1);
    auto* q_trace = qry->add_option("--trace-diffusion", trace, "Write the diffusion trace as JSON lines (stdout when no file)")
                        ->expected(0, 1);
    auto* q_mode = qry->add_option("--mode", mode, "Answer mode")->check(CLI::IsMember({"brief", "detailed"}));
    qry->add_flag("--json", query.json, "Print the full query result as JSON");

    EvalArgs eval;
    std::string eval_cfg;
    std::string eval_report;
    auto* evl = app.add_subcommand("eval", "Score a JSON-lines QA file {question, answers}");
    evl->add_option("store", eval.store, "Store prefix")->required();
    evl->add_option("qa", eval.qa, "QA file")->required();
    auto* e_cfg = evl->add_option("-c,--config", eval_cfg, "Override the store's config");
    evl->add_flag("--judge", eval.judge, "Score with the LLM rubric judge instead of EM/F1");
    evl->add_flag("--no-diffusion", eval.no_diffusion, "Anchors and initial chunks only");
    auto* e_report = evl->add_option("--report", eval_report, "Write the JSON report here");

    InspectArgs inspect;
    auto* ins = app.add_subcommand("inspect", "Print store statistics and contents");
    ins->add_option("store", inspect.store, "Store prefix")->required();
    ins->add_flag("--json", inspect.json, "JSON summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code::missing_path;
    }
    set_verbosity(quiet ? 0 : 1 + verbose);

    if (idx->parsed()) {
        if (idx_out->count() > 0) index.output = index_out;
        return cmd_index(index, std::cout, std::cerr);
    }
    if (qry->parsed()) {
        if (q_cfg->count() > 0) query.config = query_cfg;
        if (q_dump->count() > 0) query.dump_context = dump_context;
        if (q_trace->count() > 0) query.trace_diffusion = trace;
        if (q_mode->count() > 0) query.mode = mode;
        return cmd_query(query, std::cout, std::cerr);
    }
    if (evl->parsed()) {
        if (e_cfg->count() > 0) eval.config = eval_cfg;
        if (e_report->count() > 0) eval.report = eval_report;
        return cmd_eval(eval, std::cout, std::cerr);
    }
    return cmd_inspect(inspect, std::cout, std::cerr);
}
