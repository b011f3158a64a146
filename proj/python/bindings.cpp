#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "igmirag/anchors.hpp"
#include "igmirag/commands.hpp"
#include "igmirag/context.hpp"
#include "igmirag/df_index.hpp"
#include "igmirag/diffusion.hpp"
#include "igmirag/error.hpp"
#include "igmirag/evaluation.hpp"
#include "igmirag/extraction.hpp"
#include "igmirag/hypergraph.hpp"
#include "igmirag/pipeline.hpp"
#include "igmirag/text.hpp"

namespace py = pybind11;
using namespace igmirag;

namespace {

Layer to_layer(int code) { return layer_from_code(code); }

std::string query_store(const Store& store, const std::string& question, bool diffusion) {
    Gateway gateway(store.config.gateway);
    QueryOptions opts;
    opts.diffusion = diffusion;
    QueryResult r;
    {
        py::gil_scoped_release release;
        run_query(store, question, gateway, opts, r);
    }
    nlohmann::json units = nlohmann::json::array();
    for (const auto& k : r.unit_keys) units.push_back(k);
    nlohmann::json j{{"answer", r.answer.answer},
                     {"thought", r.answer.thought},
                     {"target_layer", layer_code(r.strategy.target_layer)},
                     {"matching_score", r.strategy.matching_score},
                     {"semantic_depth", r.strategy.semantic_depth},
                     {"anchors", r.retrieval.anchors},
                     {"units", units},
                     {"chunks", r.chunk_ids},
                     {"context", r.window.rendered},
                     {"prompt_tokens", r.usage.prompt_tokens},
                     {"completion_tokens", r.usage.completion_tokens}};
    if (r.diffusion) j["trace"] = trace_jsonl(*r.diffusion);
    return j.dump();
}

std::string build(const std::string& corpus, const std::string& config_path, const std::string& prefix) {
    const auto config = load_config(config_path);
    const auto docs = load_corpus(corpus);
    Gateway gateway(config.gateway);
    BuiltIndex built;
    {
        py::gil_scoped_release release;
        built = build_index(docs, config.build, gateway);
    }
    save_store(built, config, prefix);
    return to_json(built.stats).dump();
}

}  // namespace

PYBIND11_MODULE(_igmirag, m) {
    m.doc() = "Hypergraph retrieval core";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    m.def("canonical_key", [](int layer, const std::vector<std::string>& names) {
        return canonical_key(to_layer(layer), names);
    }, py::arg("layer"), py::arg("names"));

    m.def("quotas", [](int mscore, int k_b, int k_min, int k_max) {
        const auto q = quotas(mscore, k_b, k_min, k_max);
        return std::pair<int, int>(q.global, q.local);
    }, py::arg("m"), py::arg("k_b") = 12, py::arg("k_min") = 5, py::arg("k_max") = 20);

    m.def("rrf_fuse", &rrf_fuse, py::arg("rankings"), py::arg("k0") = 60);

    m.def("window_quotas", [](int d) {
        const auto b = window_quotas(d);
        return std::pair<std::size_t, std::size_t>(b.top_ku, b.top_kc);
    }, py::arg("d"));

    m.def("preference", &preference, py::arg("n"));
    m.def("normalize_answer", [](const std::string& s) { return normalize_answer(s); });
    m.def("short_form_score", [](const std::string& pred, const std::vector<std::string>& golds) {
        const auto s = short_form_score(pred, golds);
        return std::pair<double, double>(s.em, s.f1);
    }, py::arg("prediction"), py::arg("golds"));
    m.def("hashing_embedding", [](const std::string& input, std::size_t dim) {
        return hashing_embedding(input, dim);
    }, py::arg("text"), py::arg("dim") = 64);

    py::class_<Hypergraph>(m, "Hypergraph")
        .def(py::init<>())
        .def("add_chunk", [](Hypergraph& g, const std::string& id, const std::string& title, const std::string& body) {
            Chunk c;
            c.id = id;
            c.source_title = title;
            c.text = body;
            c.token_count = text::count_tokens(body);
            g.upsert_chunk(std::move(c));
        }, py::arg("id"), py::arg("title"), py::arg("text"))
        .def("add_entity", [](Hypergraph& g, const std::string& name, const std::string& description,
                              const std::set<std::string>& chunk_ids) {
            return g.upsert_vertex(make_entity(name, description, {}, chunk_ids));
        }, py::arg("name"), py::arg("description") = "", py::arg("chunk_ids") = std::set<std::string>{})
        .def("add_relation", [](Hypergraph& g, int layer, const std::vector<std::string>& members,
                                const std::string& description, const std::set<std::string>& chunk_ids) {
            return g.upsert_vertex(make_relation(to_layer(layer), members, description, {}, chunk_ids));
        }, py::arg("layer"), py::arg("members"), py::arg("description") = "",
           py::arg("chunk_ids") = std::set<std::string>{})
        .def("neighbors", [](const Hypergraph& g, const std::string& key, bool forward) {
            return g.layer_filtered_neighbors(key, forward ? Direction::forward : Direction::backward);
        }, py::arg("key"), py::arg("forward"))
        .def("layer", [](const Hypergraph& g, const std::string& key) { return layer_code(g.vertex_layer(key)); })
        .def("chunk_degree", &Hypergraph::chunk_degree)
        .def("__len__", &Hypergraph::vertex_count)
        .def("count", [](const Hypergraph& g, int layer) { return g.count(to_layer(layer)); })
        .def("keys", [](const Hypergraph& g) {
            std::vector<std::string> keys;
            for (const auto& [k, v] : g.vertices()) keys.push_back(k);
            return keys;
        })
        .def("to_json", [](const Hypergraph& g) { return to_json(g).dump(); });

    m.def("chunk_relevance", &chunk_relevance, py::arg("anchors"), py::arg("graph"));

    m.def("diffuse", [](const ScoreMap& anchors, int target_layer, int depth, const Hypergraph& g) {
        const auto r = diffuse(anchors, to_layer(target_layer), depth, g);
        return py::make_tuple(r.scores, trace_jsonl(r), std::string(to_string(r.exit)));
    }, py::arg("anchors"), py::arg("target_layer"), py::arg("depth"), py::arg("graph"));

    m.def("chunk_document", [](const std::string& title, const std::string& body, std::size_t chunk_tokens) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& c : chunk_document(Document{title, body}, chunk_tokens)) out.emplace_back(c.id, c.text);
        return out;
    }, py::arg("title"), py::arg("text"), py::arg("chunk_tokens") = 780);

    py::class_<Store>(m, "Store")
        .def_static("load", [](const std::string& path) { return load_store(path); }, py::arg("path"))
        .def_property_readonly("graph", [](const Store& s) { return s.graph; })
        .def_property_readonly("stats_json", [](const Store& s) { return to_json(s.stats).dump(); })
        .def("query_json", &query_store, py::arg("question"), py::arg("diffusion") = true);

    m.def("build_index_json", &build, py::arg("corpus"), py::arg("config"), py::arg("prefix"));
}
