#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bemflow::app {

/// Process-level configuration, loadable from a key=value file and
/// overridable per flag. Credentials come only from the named environment
/// variable, never from the file itself.
struct AppConfig {
    std::string idd_path;
    std::string simulator_path;
    std::string weather_path;

    std::string llm_mode = "replay";  // live | replay | record
    std::string llm_base_url;
    std::string llm_model = "gpt-4-0613";
    std::string llm_credential_env = "BEMFLOW_API_KEY";
    std::string llm_transcript;

    std::string sim_mode = "mock";  // mock | external
    std::string mock_rules_path;

    int rag_k = 4;
    int rag_chunk_budget = 2000;

    int max_repair_iterations = 10;
    unsigned long long seed = 0;
    bool parallel_generation = false;
    std::string common_object_list;  // comma-separated; empty = built-in default

    std::string template_dir;
    std::string log_path;

    static AppConfig from_file(const std::string& path);
    void apply_line(const std::string& key, const std::string& value);
    /// Throws std::runtime_error on contradictory settings (e.g. replay
    /// mode without an existing transcript).
    void validate() const;
};

/// Exit codes: 0 success/Clean, 1 domain failure, 2 usage/config error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bemflow::app
