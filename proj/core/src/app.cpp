#include "bemflow/app.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "bemflow/agents.hpp"
#include "bemflow/idd_schema.hpp"
#include "bemflow/idf_core.hpp"
#include "bemflow/llm_gateway.hpp"
#include "bemflow/object_forge.hpp"
#include "bemflow/output_viz.hpp"
#include "bemflow/pipeline.hpp"
#include "bemflow/rag.hpp"
#include "bemflow/simulator_bridge.hpp"
#include "bemflow/text_util.hpp"

namespace bemflow::app {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

}  // namespace

AppConfig AppConfig::from_file(const std::string& path) {
    AppConfig config;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        const std::string trimmed = text::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line is not key = value: \"" + trimmed + "\"");
        config.apply_line(text::trim(trimmed.substr(0, eq)), text::trim(trimmed.substr(eq + 1)));
    }
    return config;
}

void AppConfig::apply_line(const std::string& key, const std::string& value) {
    if (key == "idd_path") idd_path = value;
    else if (key == "simulator_path") simulator_path = value;
    else if (key == "weather_path") weather_path = value;
    else if (key == "llm_mode") llm_mode = value;
    else if (key == "llm_base_url") llm_base_url = value;
    else if (key == "llm_model") llm_model = value;
    else if (key == "llm_credential_env") llm_credential_env = value;
    else if (key == "llm_transcript") llm_transcript = value;
    else if (key == "sim_mode") sim_mode = value;
    else if (key == "mock_rules_path") mock_rules_path = value;
    else if (key == "rag_k") rag_k = std::stoi(value);
    else if (key == "rag_chunk_budget") rag_chunk_budget = std::stoi(value);
    else if (key == "max_repair_iterations") max_repair_iterations = std::stoi(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "common_object_list") common_object_list = value;
    else if (key == "parallel_generation")
        parallel_generation = (value == "true" || value == "1" || value == "yes");
    else if (key == "template_dir") template_dir = value;
    else if (key == "log_path") log_path = value;
    else throw ConfigError("unknown config key \"" + key + "\"");
}

void AppConfig::validate() const {
    if (llm_mode != "live" && llm_mode != "replay" && llm_mode != "record")
        throw ConfigError("llm_mode must be live, replay, or record (got \"" + llm_mode + "\")");
    if (llm_mode == "replay") {
        if (llm_transcript.empty())
            throw ConfigError("replay mode requires llm_transcript");
        if (!fs::exists(llm_transcript))
            throw ConfigError("replay transcript does not exist: " + llm_transcript);
    }
    if ((llm_mode == "live" || llm_mode == "record") && llm_base_url.empty())
        throw ConfigError("live/record mode requires llm_base_url");
    if (llm_mode == "record" && llm_transcript.empty())
        throw ConfigError("record mode requires llm_transcript (the output path)");
    if (sim_mode != "mock" && sim_mode != "external")
        throw ConfigError("sim_mode must be mock or external (got \"" + sim_mode + "\")");
    if (sim_mode == "external" && simulator_path.empty())
        throw ConfigError("external sim_mode requires simulator_path");
    if (max_repair_iterations < 1) throw ConfigError("max_repair_iterations must be >= 1");
}

namespace {

struct Backends {
    std::unique_ptr<llm::Transcript> transcript_storage;
    std::unique_ptr<llm::ChatBackend> live_chat;
    std::unique_ptr<llm::EmbedBackend> live_embed;
    std::unique_ptr<llm::ReplayBackend> replay;
    std::unique_ptr<llm::RecordingBackend> recorder;
    std::unique_ptr<llm::StubEmbedBackend> stub_embed;

    llm::ChatBackend* chat = nullptr;
    llm::EmbedBackend* embed = nullptr;
};

Backends make_backends(const AppConfig& config) {
    Backends b;
    b.stub_embed = std::make_unique<llm::StubEmbedBackend>(256, 0);
    if (config.llm_mode == "replay") {
        auto transcript = llm::Transcript::load(config.llm_transcript);
        b.replay = std::make_unique<llm::ReplayBackend>(std::move(transcript),
                                                        b.stub_embed->embedder_id());
        b.chat = b.replay.get();
        b.embed = b.stub_embed.get();
        return b;
    }
    llm::HttpBackendConfig http;
    http.base_url = config.llm_base_url;
    http.model_id = config.llm_model;
    if (const char* cred = std::getenv(config.llm_credential_env.c_str())) http.credential = cred;
    b.live_chat = std::make_unique<llm::HttpChatBackend>(http);
    b.live_embed = std::make_unique<llm::HttpEmbedBackend>(http);
    if (config.llm_mode == "record") {
        b.recorder = std::make_unique<llm::RecordingBackend>(b.live_chat.get(),
                                                             b.live_embed.get(),
                                                             config.llm_transcript);
        b.chat = b.recorder.get();
        b.embed = b.recorder.get();
    } else {
        b.chat = b.live_chat.get();
        b.embed = b.live_embed.get();
    }
    return b;
}

struct Simulators {
    std::unique_ptr<sim::MockSimulator> mock;
    std::unique_ptr<sim::ExternalSimulator> external;
    sim::SimulatorRunner* runner = nullptr;
};

Simulators make_simulator(const AppConfig& config, const idd::IddSchema& schema) {
    Simulators s;
    if (config.sim_mode == "external") {
        s.external = std::make_unique<sim::ExternalSimulator>(config.simulator_path, &schema);
        s.runner = s.external.get();
        return s;
    }
    if (!config.mock_rules_path.empty()) {
        auto rules = sim::MockSimulator::parse_rules(read_file(config.mock_rules_path));
        s.mock = std::make_unique<sim::MockSimulator>(schema, std::move(rules));
    } else {
        s.mock = std::make_unique<sim::MockSimulator>(
            sim::MockSimulator::with_default_rules(schema));
    }
    s.runner = s.mock.get();
    return s;
}

idd::IddSchema load_schema(const AppConfig& config) {
    if (config.idd_path.empty()) throw ConfigError("idd_path is required for this command");
    return idd::parse_idd(read_file(config.idd_path));
}

pipe::PipelineConfig pipeline_config(const AppConfig& config) {
    pipe::PipelineConfig pc;
    pc.max_repair_iterations = config.max_repair_iterations;
    pc.parallel_generation = config.parallel_generation;
    pc.seed = config.seed;
    pc.model_id = config.llm_model;
    pc.weather_path = config.weather_path;
    if (!config.common_object_list.empty()) {
        pc.common_object_list.clear();
        std::istringstream in(config.common_object_list);
        std::string item;
        while (std::getline(in, item, ',')) {
            const std::string trimmed = text::trim(item);
            if (!trimmed.empty()) pc.common_object_list.push_back(trimmed);
        }
    }
    if (!config.template_dir.empty())
        pc.templates = agents::TemplateSet::from_dir(config.template_dir);
    return pc;
}

void write_log(const AppConfig& config, const pipe::RunLog& log, std::ostream& out) {
    if (!config.log_path.empty()) write_file(config.log_path, log.to_jsonl());
    out << "outcome: "
        << (log.outcome == pipe::Outcome::Clean ? "Clean"
            : log.outcome == pipe::Outcome::MaxIterationsExceeded ? "MaxIterationsExceeded"
                                                                  : "Aborted")
        << "; extraction items: " << log.extraction.size()
        << "; objects: " << log.per_object.size()
        << "; repair rounds: " << log.repair_rounds.size() << "\n";
    for (const auto& note : log.notes) out << "note: " << note << "\n";
}

std::vector<std::pair<std::string, std::string>> parse_assignments(
    const std::vector<std::string>& set_flags) {
    std::vector<std::pair<std::string, std::string>> assignments;
    for (const auto& flag : set_flags) {
        const std::size_t eq = flag.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects \"Field Name=value\", got \"" + flag + "\"");
        assignments.emplace_back(text::trim(flag.substr(0, eq)), text::trim(flag.substr(eq + 1)));
    }
    return assignments;
}

viz::PlotSpec window_spec(const std::string& start, const std::string& end) {
    viz::PlotSpec spec;
    std::tie(spec.window_start, spec.window_end) = viz::window_from_text(start, end);
    return spec;
}

std::vector<std::pair<std::string, std::string>> read_corpus_dir(const std::string& dir) {
    std::vector<std::pair<std::string, std::string>> documents;
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".txt" || ext == ".md" || ext == ".html" || ext == ".htm")
            paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& path : paths) {
        std::string content = read_file(path.string());
        const std::string ext = path.extension().string();
        if (ext == ".html" || ext == ".htm") content = rag::strip_html(content);
        documents.emplace_back(path.filename().string(), std::move(content));
    }
    return documents;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    // --config is honored before flag parsing so flags can override it.
    AppConfig config;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            try {
                config = AppConfig::from_file(args[i + 1]);
            } catch (const std::exception& e) {
                err << "config error: " << e.what() << "\n";
                return kExitUsage;
            }
        }
    }

    CLI::App cli{"Natural-language building descriptions to validated EnergyPlus input files,"
                 " with a documentation QA index and simulation-output plots"};
    cli.name("bemflow");
    std::string config_path;
    cli.add_option("--config", config_path, "Key=value configuration file");
    cli.add_option("--idd", config.idd_path, "IDD schema file");
    cli.add_option("--llm-mode", config.llm_mode, "live | replay | record");
    cli.add_option("--transcript", config.llm_transcript, "Transcript path (replay/record)");
    cli.add_option("--llm-base-url", config.llm_base_url, "Chat-completions endpoint base URL");
    cli.add_option("--llm-model", config.llm_model, "Model identifier");
    cli.add_option("--sim-mode", config.sim_mode, "mock | external");
    cli.add_option("--simulator", config.simulator_path, "Simulator executable (external mode)");
    cli.add_option("--weather", config.weather_path, "Weather file path");
    cli.add_option("--mock-rules", config.mock_rules_path, "Mock simulator rule table");
    cli.add_option("--template-dir", config.template_dir, "Prompt template override directory");
    cli.add_option("--log", config.log_path, "Structured run log output path (JSON lines)");
    cli.add_option("--seed", config.seed, "Placeholder RNG seed");
    cli.add_option("--max-repair-iterations", config.max_repair_iterations,
                   "Repair loop iteration cap");
    cli.add_option("--common-objects", config.common_object_list,
                   "Comma-separated object types the extraction agent may emit");
    cli.add_flag("--parallel", config.parallel_generation, "Generate objects concurrently");
    cli.require_subcommand(1);

    // gen-object
    auto* gen_object = cli.add_subcommand(
        "gen-object", "Generate a single object from field assignments and print the summary");
    std::string go_class;
    std::vector<std::string> go_sets;
    std::string go_request;
    std::string go_out;
    bool go_no_defaults = false;
    gen_object->add_option("--class", go_class, "Object class name")->required();
    gen_object->add_option("--set", go_sets, "Field assignment \"Field Name=value\" (repeatable)");
    gen_object->add_option("--request", go_request, "Free-text request kept for the audit trail");
    gen_object->add_option("--out", go_out, "Write the object text here instead of stdout");
    gen_object->add_flag("--no-defaults", go_no_defaults,
                         "Leave optional unassigned fields blank instead of filling IDD defaults");

    // gen-idf
    auto* gen_idf = cli.add_subcommand(
        "gen-idf", "Run the planning workflow: description -> objects -> merge -> repair loop");
    std::string gi_description;
    std::string gi_initial;
    std::string gi_out;
    gen_idf->add_option("--description", gi_description, "Building description text file")
        ->required();
    gen_idf->add_option("--initial", gi_initial, "Initial IDF (geometry + mandatory objects)")
        ->required();
    gen_idf->add_option("--out", gi_out, "Final IDF output path")->required();

    // modify-idf
    auto* modify_idf = cli.add_subcommand(
        "modify-idf", "Run the modification workflow on an existing IDF");
    std::string mi_idf;
    std::string mi_request;
    std::string mi_out;
    modify_idf->add_option("--idf", mi_idf, "IDF file to modify")->required();
    modify_idf->add_option("--request", mi_request, "Modification request text")->required();
    modify_idf->add_option("--out", mi_out, "Modified IDF output path")->required();

    // validate
    auto* validate = cli.add_subcommand("validate", "Audit object references and placeholders");
    std::string v_idf;
    validate->add_option("idf", v_idf, "IDF file to audit")->required();

    // repair
    auto* repair = cli.add_subcommand("repair", "Run only the simulate/repair loop on an IDF");
    std::string r_idf;
    std::string r_out;
    repair->add_option("--idf", r_idf, "IDF file to repair")->required();
    repair->add_option("--out", r_out, "Repaired IDF output path")->required();

    // viz
    auto* viz_cmd = cli.add_subcommand("viz", "Plot simulation output CSV");
    auto* viz_enduse = viz_cmd->add_subcommand("enduse", "Stacked area chart of end uses");
    auto* viz_weather = viz_cmd->add_subcommand("weather", "Per-variable weather panels");
    std::string vz_csv;
    std::string vz_start;
    std::string vz_end;
    std::string vz_out;
    for (auto* sub : {viz_enduse, viz_weather}) {
        sub->add_option("--csv", vz_csv, "EnergyPlus output CSV")->required();
        sub->add_option("--start", vz_start, "Window start, MM/DD[ HH:MM:SS]")->required();
        sub->add_option("--end", vz_end, "Window end, MM/DD[ HH:MM:SS]")->required();
        sub->add_option("--out", vz_out, "SVG output path")->required();
    }
    viz_cmd->require_subcommand(1);

    // rag-index
    auto* rag_index = cli.add_subcommand("rag-index", "Chunk and embed a documentation corpus");
    std::string ri_corpus;
    std::string ri_index;
    int ri_budget = -1;
    rag_index->add_option("corpus", ri_corpus, "Corpus directory (.txt/.md/.html)")->required();
    rag_index->add_option("index", ri_index, "Index output path")->required();
    rag_index->add_option("--chunk-budget", ri_budget, "Character budget per chunk");

    // rag-query
    auto* rag_query = cli.add_subcommand("rag-query", "Search the index, optionally answer");
    std::string rq_index;
    std::string rq_question;
    int rq_k = -1;
    bool rq_answer = false;
    rag_query->add_option("index", rq_index, "Index path")->required();
    rag_query->add_option("question", rq_question, "Question text")->required();
    rag_query->add_option("--k", rq_k, "Number of chunks to retrieve");
    rag_query->add_flag("--answer", rq_answer, "Ask the chat backend with retrieved context");

    std::vector<const char*> argv;
    argv.push_back("bemflow");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        cli.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << cli.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << cli.help();
            return kExitOk;
        }
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (gen_object->parsed()) {
            const idd::IddSchema schema = load_schema(config);
            const auto assignments = parse_assignments(go_sets);
            const forge::GenerationSpec spec =
                forge::GenerationSpec::checked(schema, go_class, assignments, go_request);
            forge::PlaceholderSource placeholders(config.seed);
            const forge::ForgeResult result = forge::forge_object(
                schema, spec, placeholders,
                go_no_defaults ? forge::DefaultsPolicy::LeaveBlank
                               : forge::DefaultsPolicy::FillDefaults);
            idf::IdfDocument doc;
            doc.objects.push_back(result.object);
            const std::string object_text = idf::serialize(doc);
            if (!go_out.empty()) write_file(go_out, object_text);
            else out << object_text << "\n";
            out << "Here's a summary:\n" << forge::summary_text(result.report);
            return kExitOk;
        }

        if (validate->parsed()) {
            const idd::IddSchema schema = load_schema(config);
            const idf::IdfDocument doc = idf::parse_idf(read_file(v_idf));
            const idf::ReferenceAudit audit = idf::reference_audit(doc, schema);
            for (const auto& w : audit.warnings) out << "warning: " << w << "\n";
            for (const auto& d : audit.dangling) {
                const idf::IdfObject& obj = doc.objects[d.object_index];
                out << "dangling: (" << obj.class_name << ", " << obj.name_or_empty()
                    << ") field " << d.field_ordinal << " -> \"" << d.referenced_name
                    << "\" not registered under " << d.expected_list << "\n";
            }
            for (const auto& p : audit.placeholders) {
                const idf::IdfObject& obj = doc.objects[p.object_index];
                out << "placeholder: (" << obj.class_name << ", " << obj.name_or_empty()
                    << ") field " << p.field_ordinal << " = " << p.token << "\n";
            }
            out << "audit: " << audit.dangling.size() << " dangling, "
                << audit.placeholders.size() << " placeholders\n";
            return audit.clean() ? kExitOk : kExitDomain;
        }

        if (viz_enduse->parsed() || viz_weather->parsed()) {
            const viz::OutputTable table = viz::parse_output_csv(read_file(vz_csv));
            viz::PlotSpec spec = window_spec(vz_start, vz_end);
            std::string svg;
            if (viz_enduse->parsed()) {
                spec.kind = viz::PlotSpec::Kind::EnduseStack;
                svg = viz::enduse_stack_plot(table, spec);
            } else {
                spec.kind = viz::PlotSpec::Kind::WeatherPanels;
                svg = viz::weather_panels(table, spec);
            }
            write_file(vz_out, svg);
            out << "wrote " << vz_out << "\n";
            return kExitOk;
        }

        if (rag_index->parsed()) {
            const auto documents = read_corpus_dir(ri_corpus);
            const std::size_t budget = ri_budget > 0 ? static_cast<std::size_t>(ri_budget)
                                                     : static_cast<std::size_t>(config.rag_chunk_budget);
            auto chunks = rag::chunk_corpus(documents, budget);
            llm::StubEmbedBackend embedder(256, 0);
            const rag::VectorIndex index = rag::build_index(std::move(chunks), embedder);
            index.save(ri_index);
            out << "indexed " << index.chunks.size() << " chunks (dimension " << index.dimension
                << ", embedder " << index.embedder_id << ")\n";
            return kExitOk;
        }

        if (rag_query->parsed()) {
            const rag::VectorIndex index = rag::VectorIndex::load(rq_index);
            llm::StubEmbedBackend embedder(256, 0);
            const int k = rq_k > 0 ? rq_k : config.rag_k;
            const auto hits = rag::search(index, rq_question, k, embedder);
            for (std::size_t i = 0; i < hits.size(); ++i)
                out << (i + 1) << ". [" << hits[i].chunk.id << "] score "
                    << text::format_double(hits[i].score) << "\n   " << hits[i].chunk.text << "\n";
            if (rq_answer) {
                config.validate();
                Backends backends = make_backends(config);
                const rag::Answer answer = rag::answer(index, rq_question, k, embedder,
                                                       *backends.chat, config.llm_model);
                out << "\nanswer:\n" << answer.text << "\ncited:";
                for (const auto& id : answer.cited_chunk_ids) out << " " << id;
                out << "\n";
            }
            return kExitOk;
        }

        // The remaining subcommands need the full pipeline stack.
        config.validate();
        const idd::IddSchema schema = load_schema(config);
        Backends backends = make_backends(config);
        Simulators simulators = make_simulator(config, schema);
        pipe::Pipeline pipeline(schema, *backends.chat, *simulators.runner,
                                pipeline_config(config));

        if (gen_idf->parsed()) {
            const idf::IdfDocument initial = idf::parse_idf(read_file(gi_initial));
            const pipe::PipelineResult result =
                pipeline.generate_idf(read_file(gi_description), initial);
            write_file(gi_out, idf::serialize(result.document, schema));
            write_log(config, result.log, out);
            return result.log.outcome == pipe::Outcome::Clean ? kExitOk : kExitDomain;
        }
        if (modify_idf->parsed()) {
            const idf::IdfDocument doc = idf::parse_idf(read_file(mi_idf));
            const pipe::PipelineResult result = pipeline.modify_idf(doc, mi_request);
            write_file(mi_out, idf::serialize(result.document, schema));
            write_log(config, result.log, out);
            return result.log.outcome == pipe::Outcome::Clean ? kExitOk : kExitDomain;
        }
        if (repair->parsed()) {
            const idf::IdfDocument doc = idf::parse_idf(read_file(r_idf));
            pipe::RunLog log;
            auto [repaired, rounds] = pipeline.debug_loop(doc, &log);
            log.repair_rounds = rounds;
            write_file(r_out, idf::serialize(repaired, schema));
            write_log(config, log, out);
            return log.outcome == pipe::Outcome::Clean ? kExitOk : kExitDomain;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }

    err << "usage error: no subcommand\n";
    return kExitUsage;
}

}  // namespace bemflow::app
