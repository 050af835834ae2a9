#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bemflow/agents.hpp"
#include "bemflow/idd_schema.hpp"
#include "bemflow/idf_core.hpp"
#include "bemflow/llm_gateway.hpp"
#include "bemflow/object_forge.hpp"
#include "bemflow/simulator_bridge.hpp"

namespace bemflow::pipe {

/// The object types the extraction prompt suggests by default: envelope
/// materials, internal loads, and the HVAC templates.
std::vector<std::string> standard_common_object_list();

struct PipelineConfig {
    int max_repair_iterations = 10;
    bool parallel_generation = false;
    std::uint64_t seed = 0;
    std::string model_id = "gpt-4-0613";
    std::string weather_path;
    std::vector<std::string> common_object_list = standard_common_object_list();
    agents::TemplateSet templates = agents::TemplateSet::builtin();

    /// The repair contract caps at 10 objects per round; lowering is
    /// allowed, raising is not.
    int max_objects_per_repair() const { return max_objects_per_repair_; }
    void set_max_objects_per_repair(int n) {
        max_objects_per_repair_ = n < 1 ? 1 : (n > 10 ? 10 : n);
    }

private:
    int max_objects_per_repair_ = 10;
};

enum class Outcome { Clean, MaxIterationsExceeded, Aborted };

struct ObjectAttempt {
    agents::ExtractionItem item;
    std::string prompt_digest;
    int attempts = 0;
    bool ok = false;
    std::vector<forge::Violation> violations;  // from the last attempt
    forge::FieldReport report;                 // when ok
};

struct RepairRound {
    int severe_count = 0;
    int fatal_count = 0;
    std::vector<std::pair<std::string, std::string>> targets;
    int replaced = 0;
    int added = 0;  // targets that were not present; applied as additions
    std::string diff;
};

struct RunLog {
    std::vector<agents::ExtractionItem> extraction;
    std::vector<ObjectAttempt> per_object;
    std::vector<RepairRound> repair_rounds;
    Outcome outcome = Outcome::Aborted;
    std::vector<std::string> notes;

    /// One JSON record per line; timestamps deliberately excluded.
    std::string to_jsonl() const;
};

struct PipelineResult {
    idf::IdfDocument document;
    RunLog log;
};

enum class PipelineErrorKind {
    ExtractionFailed,
    GenerationFailed,
    PlanFailed,
    RepairParseFailed,
    RepairExhausted
};

class PipelineError : public std::runtime_error {
public:
    PipelineError(PipelineErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    PipelineErrorKind kind() const { return kind_; }

private:
    PipelineErrorKind kind_;
};

class Pipeline {
public:
    Pipeline(const idd::IddSchema& schema, llm::ChatBackend& chat, sim::SimulatorRunner& simulator,
             PipelineConfig config)
        : schema_(&schema), chat_(&chat), simulator_(&simulator), config_(std::move(config)) {
        if (config_.max_repair_iterations < 1) config_.max_repair_iterations = 1;
    }

    /// The planning workflow: extract items from the description, generate
    /// one object per item, merge onto the initial file, then run the debug
    /// loop until the simulation is clean.
    PipelineResult generate_idf(const std::string& description, const idf::IdfDocument& initial);

    /// The modification workflow: central plan, per-entry create/modify
    /// dispatch, aggregation, reference audit with one repair round.
    PipelineResult modify_idf(const idf::IdfDocument& doc, const std::string& request);

    /// Simulate -> digest severe/fatal -> repair prompt -> apply, bounded by
    /// max_repair_iterations. Returns the repaired document and the rounds.
    std::pair<idf::IdfDocument, std::vector<RepairRound>> debug_loop(idf::IdfDocument doc,
                                                                     RunLog* log = nullptr);

    const PipelineConfig& config() const { return config_; }

private:
    struct GenerationOutcome {
        idf::IdfObject object;
        ObjectAttempt attempt;
    };
    GenerationOutcome generate_one(const agents::ExtractionItem& item);
    agents::RepairSet request_repair(const std::string& digest_text, const std::string& idf_text,
                                     int round);
    /// When exactly one document object populates the expected object-list
    /// of a placeholder field, substitute it without an LLM call.
    int resolve_unambiguous_placeholders(idf::IdfDocument& doc, RunLog* log);

    const idd::IddSchema* schema_;
    llm::ChatBackend* chat_;
    sim::SimulatorRunner* simulator_;
    PipelineConfig config_;
};

/// Mock-style error text for audit findings, used when the modification
/// workflow needs a repair prompt without running a simulator.
std::string audit_digest_text(const idf::ReferenceAudit& audit, const idf::IdfDocument& doc,
                              const idd::IddSchema& schema);

}  // namespace bemflow::pipe
