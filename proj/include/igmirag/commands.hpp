#pragma once

#include <filesystem>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "igmirag/error.hpp"
#include "igmirag/pipeline.hpp"

namespace igmirag {

/// Process exit codes used by the command-line tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int missing_path = 2;
inline constexpr int gateway = 3;
}  // namespace exit_code

int exit_code_for(const Error& e) noexcept;

/// 0 = errors only, 1 = warnings (default), 2 = info, 3 = debug.
void set_verbosity(int level);

struct IndexArgs {
    std::filesystem::path corpus;
    std::filesystem::path config;
    std::optional<std::filesystem::path> output;  // store prefix
};

struct QueryArgs {
    std::filesystem::path store;
    std::string question;
    std::optional<std::filesystem::path> config;
    bool no_diffusion = false;
    std::optional<std::string> dump_context;     // "" = stdout
    std::optional<std::string> trace_diffusion;  // "" = stdout
    std::optional<std::string> mode;
    bool json = false;
};

struct EvalArgs {
    std::filesystem::path store;
    std::filesystem::path qa;
    std::optional<std::filesystem::path> config;
    bool judge = false;
    bool no_diffusion = false;
    std::optional<std::filesystem::path> report;
};

struct InspectArgs {
    std::filesystem::path store;
    bool json = false;
};

int cmd_index(const IndexArgs& args, std::ostream& out, std::ostream& err);
int cmd_query(const QueryArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_inspect(const InspectArgs& args, std::ostream& out, std::ostream& err);

struct QaRecord {
    std::string question;
    std::vector<std::string> answers;
};
std::vector<QaRecord> load_qa(const std::filesystem::path& path);

struct EvalRecord {
    std::string question;
    std::vector<std::string> golds;
    std::string predicted;
    double em = 0.0;  // 0/1 short-form, [0,100] judged
    double f1 = 0.0;  // [0,1] short-form, [0,100] judged
    std::uint64_t tokens = 0;
    int depth_used = 0;
    std::string error;  // nonempty when the query failed
    bool judge_failed = false;
};

struct EvalReport {
    std::vector<EvalRecord> records;
    std::size_t queries = 0;
    std::size_t failures = 0;
    std::size_t judge_failures = 0;
    double em = 0.0;  // percent
    double f1 = 0.0;  // percent
    double avg_tokens = 0.0;
    TokenUsage pipeline_tokens;
    TokenUsage judge_tokens;
    std::map<int, double> depth_histogram;  // depth -> percent of answered queries
    bool judged = false;
};

/// Runs every record sequentially; per-record failures are counted.
EvalReport evaluate(const Store& store, const std::vector<QaRecord>& qa, Gateway& gateway,
                    Gateway* judge, bool diffusion);

nlohmann::json to_json(const EvalReport& r);
std::string format_report(const EvalReport& r);
std::string format_stats(const BuildStats& s);

}  // namespace igmirag
