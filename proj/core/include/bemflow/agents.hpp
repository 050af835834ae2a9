#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bemflow/idf_core.hpp"

namespace bemflow::agents {

/// One row of the extraction agent's output table.
struct ExtractionItem {
    std::string object_type;
    std::string object_name;
    std::string description;
};

struct ExtractionParse {
    std::vector<ExtractionItem> items;
    std::vector<std::string> rejected;  // per-row diagnostics
};

/// The repair agent's parsed output: corrected objects plus the tuple list
/// naming what was touched. Both sides are capped at 10 entries.
struct RepairSet {
    std::vector<idf::IdfObject> corrected_objects;
    std::vector<std::pair<std::string, std::string>> targets;  // (type, name)
};

struct PlanEntry {
    std::string class_name;
    std::string object_name;
    std::string sub_request;
};

enum class AgentErrorKind {
    EmptyExcerpt,
    EmptyRequest,
    EmptyDescription,
    EmptyErrors,
    EmptyIdf,
    NoTableFound,
    AllRowsInvalid,
    MissingObjectBlock,
    MissingTupleBlock,
    CountExceeded,
    TupleObjectMismatch,
    NoPlanFound
};

class AgentError : public std::runtime_error {
public:
    AgentError(AgentErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    AgentErrorKind kind() const { return kind_; }

private:
    AgentErrorKind kind_;
};

/// The four prompt templates. Defaults are the built-in texts; a template
/// directory with files generation.txt / extraction.txt / repair.txt /
/// central.txt (same placeholder names) can override them.
struct TemplateSet {
    std::string generation;
    std::string extraction;
    std::string repair;
    std::string central;

    static TemplateSet builtin();
    static TemplateSet from_dir(const std::string& dir);
};

std::string render_generation_prompt(std::string_view idd_excerpt, std::string_view user_request,
                                     const TemplateSet& templates = TemplateSet::builtin());
std::string render_extraction_prompt(std::string_view description,
                                     const std::vector<std::string>& common_object_list,
                                     const TemplateSet& templates = TemplateSet::builtin());
std::string render_repair_prompt(std::string_view severe_and_fatal, std::string_view current_idf,
                                 const TemplateSet& templates = TemplateSet::builtin());
std::string render_central_prompt(std::string_view user_request,
                                  const TemplateSet& templates = TemplateSet::builtin());

/// Parse the extraction agent's keyed map. Tolerant of surrounding prose;
/// rows violating the item invariants are rejected individually with
/// diagnostics. `allowed_types`, when non-empty, restricts object types.
ExtractionParse parse_extraction(std::string_view response,
                                 const std::vector<std::string>& allowed_types = {});

RepairSet parse_repair(std::string_view response);

std::vector<PlanEntry> parse_central_plan(std::string_view response);

/// Pull IDF object text out of a chatty response: fenced blocks win, then a
/// class-anchored scan. Returns all parsed objects.
std::vector<idf::IdfObject> extract_objects(std::string_view response,
                                            std::string_view expected_class = {});

}  // namespace bemflow::agents
