#include "bemflow/pipeline.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bemflow/text_util.hpp"

namespace bemflow::pipe {

using nlohmann::json;
using text::normalize_key;

std::vector<std::string> standard_common_object_list() {
    return {"Material",
            "Material:NoMass",
            "WindowMaterial:SimpleGlazingSystem",
            "Construction",
            "Schedule:Compact",
            "People",
            "Lights",
            "ElectricEquipment",
            "ZoneInfiltration:DesignFlowRate",
            "HVACTemplate:Thermostat",
            "HVACTemplate:Zone:PTAC"};
}

std::string RunLog::to_jsonl() const {
    std::ostringstream out;
    for (const auto& item : extraction) {
        json j;
        j["event"] = "extraction_item";
        j["type"] = item.object_type;
        j["name"] = item.object_name;
        j["description"] = item.description;
        out << j.dump() << "\n";
    }
    for (const auto& attempt : per_object) {
        json j;
        j["event"] = "object_attempt";
        j["type"] = attempt.item.object_type;
        j["name"] = attempt.item.object_name;
        j["digest"] = attempt.prompt_digest;
        j["attempts"] = attempt.attempts;
        j["ok"] = attempt.ok;
        if (!attempt.violations.empty()) {
            json v = json::array();
            for (const auto& violation : attempt.violations)
                v.push_back({{"field", violation.field},
                             {"expected", violation.expected_rule},
                             {"found", violation.found}});
            j["violations"] = v;
        }
        out << j.dump() << "\n";
    }
    for (std::size_t i = 0; i < repair_rounds.size(); ++i) {
        const RepairRound& r = repair_rounds[i];
        json j;
        j["event"] = "repair_round";
        j["round"] = i + 1;
        j["severe"] = r.severe_count;
        j["fatal"] = r.fatal_count;
        json targets = json::array();
        for (const auto& [cls, name] : r.targets) targets.push_back({cls, name});
        j["targets"] = targets;
        j["replaced"] = r.replaced;
        j["added"] = r.added;
        j["diff"] = r.diff;
        out << j.dump() << "\n";
    }
    for (const auto& note : notes) {
        json j;
        j["event"] = "note";
        j["text"] = note;
        out << j.dump() << "\n";
    }
    {
        json j;
        j["event"] = "outcome";
        j["outcome"] = outcome == Outcome::Clean ? "Clean"
                       : outcome == Outcome::MaxIterationsExceeded ? "MaxIterationsExceeded"
                                                                   : "Aborted";
        out << j.dump() << "\n";
    }
    return out.str();
}

namespace {

std::string item_request(const agents::ExtractionItem& item) {
    return "Generate a \"" + item.object_type + "\" object named \"" + item.object_name +
           "\". Requirements: " + item.description;
}

std::string violations_note(const std::vector<forge::Violation>& violations) {
    std::ostringstream out;
    out << "\nThe previously generated object violated these rules:\n";
    for (const auto& v : violations)
        out << "- " << v.field << ": expected " << v.expected_rule << ", found " << v.found << "\n";
    out << "Regenerate the object and follow the rules exactly.\n";
    return out.str();
}

}  // namespace

std::string audit_digest_text(const idf::ReferenceAudit& audit, const idf::IdfDocument& doc,
                              const idd::IddSchema& schema) {
    std::ostringstream out;
    bool first = true;
    auto sep = [&]() {
        if (!first) out << "\n\n";
        first = false;
    };
    for (const auto& d : audit.dangling) {
        const idf::IdfObject& obj = doc.objects[d.object_index];
        const idd::ObjectDef* def = schema.find(obj.class_name);
        const std::string field = def ? def->display_name_at(d.field_ordinal)
                                      : "field " + std::to_string(d.field_ordinal);
        sep();
        out << obj.class_name << "=\"" << obj.name_or_empty() << "\", invalid " << field << "=\""
            << d.referenced_name << "\" - no object found registered under " << d.expected_list
            << ".";
    }
    for (const auto& p : audit.placeholders) {
        const idf::IdfObject& obj = doc.objects[p.object_index];
        const idd::ObjectDef* def = schema.find(obj.class_name);
        const std::string field = def ? def->display_name_at(p.field_ordinal)
                                      : "field " + std::to_string(p.field_ordinal);
        sep();
        out << obj.class_name << "=\"" << obj.name_or_empty() << "\", field " << field
            << " contains unresolved placeholder \"" << p.token << "\".";
    }
    return out.str();
}

Pipeline::GenerationOutcome Pipeline::generate_one(const agents::ExtractionItem& item) {
    const std::string excerpt = idd::idd_excerpt(*schema_, item.object_type);
    const std::string base_prompt =
        agents::render_generation_prompt(excerpt, item_request(item), config_.templates);

    GenerationOutcome outcome;
    outcome.attempt.item = item;

    std::string prompt = base_prompt;
    for (int attempt = 1; attempt <= 2; ++attempt) {
        llm::ChatRequest request;
        request.prompt = prompt;
        request.temperature = 0.0;
        request.model_id = config_.model_id;
        request.request_tag = "agent2/" + item.object_name + (attempt > 1 ? "/retry" : "");
        if (attempt == 1) outcome.attempt.prompt_digest = llm::request_digest(request);
        outcome.attempt.attempts = attempt;

        const std::string response = llm::complete(*chat_, request);
        auto objects = agents::extract_objects(response, item.object_type);
        if (objects.empty()) {
            outcome.attempt.violations = {
                {"(object)", "one \"" + item.object_type + "\" object in the response", "none"}};
            prompt = base_prompt + violations_note(outcome.attempt.violations);
            continue;
        }

        forge::GenerationSpec spec;
        spec.class_name = item.object_type;
        spec.free_text = item.description;
        forge::ValidationResult validation =
            forge::validate_generated(*schema_, objects.front(), spec);
        if (validation.ok()) {
            outcome.object = std::move(objects.front());
            outcome.attempt.ok = true;
            outcome.attempt.report = validation.report;
            outcome.attempt.violations.clear();
            return outcome;
        }
        outcome.attempt.violations = validation.violations;
        prompt = base_prompt + violations_note(validation.violations);
    }
    return outcome;  // ok == false; caller decides
}

agents::RepairSet Pipeline::request_repair(const std::string& digest_text,
                                           const std::string& idf_text, int round) {
    const std::string prompt =
        agents::render_repair_prompt(digest_text, idf_text, config_.templates);
    std::string current = prompt;
    std::string last_error;
    for (int attempt = 1; attempt <= 2; ++attempt) {
        llm::ChatRequest request;
        request.prompt = current;
        request.temperature = 0.0;
        request.model_id = config_.model_id;
        request.request_tag =
            "agent3/round" + std::to_string(round) + (attempt > 1 ? "/retry" : "");
        const std::string response = llm::complete(*chat_, request);
        try {
            return agents::parse_repair(response);
        } catch (const agents::AgentError& e) {
            last_error = e.what();
            current = prompt + "\nThe previous response could not be used: " + e.what() +
                      "\nFollow the output format exactly.\n";
        }
    }
    throw PipelineError(PipelineErrorKind::RepairParseFailed,
                        "repair response unusable after retry: " + last_error);
}

int Pipeline::resolve_unambiguous_placeholders(idf::IdfDocument& doc, RunLog* log) {
    const idf::ReferenceAudit audit = idf::reference_audit(doc, *schema_);
    int resolved = 0;
    for (const auto& p : audit.placeholders) {
        idf::IdfObject& obj = doc.objects[p.object_index];
        const idd::ObjectDef* def = schema_->find(obj.class_name);
        if (!def) continue;
        const idd::FieldDef* field = def->field_at(p.field_ordinal);
        if (!field || field->referenced_lists.empty()) continue;

        // Candidates: every name registered under the expected lists.
        std::set<std::string> candidates;
        std::string candidate_text;
        for (const auto& list : field->referenced_lists) {
            for (const auto& other : doc.objects) {
                const idd::ObjectDef* other_def = schema_->find(other.class_name);
                if (!other_def) continue;
                for (std::size_t i = 0;
                     i < other.values.size() &&
                     i < static_cast<std::size_t>(other_def->fields.size());
                     ++i) {
                    const idd::FieldDef& fd = other_def->fields[i];
                    if (std::find(fd.reference_lists.begin(), fd.reference_lists.end(), list) ==
                        fd.reference_lists.end())
                        continue;
                    if (other.values[i].kind != idf::FieldValue::Kind::Literal) continue;
                    if (candidates.insert(normalize_key(other.values[i].text)).second)
                        candidate_text = other.values[i].text;
                }
            }
        }
        if (candidates.size() == 1) {
            std::string comment = obj.values[p.field_ordinal - 1].comment;
            obj.values[static_cast<std::size_t>(p.field_ordinal - 1)] =
                idf::FieldValue::literal(candidate_text);
            obj.values[static_cast<std::size_t>(p.field_ordinal - 1)].comment = comment;
            ++resolved;
            if (log)
                log->notes.push_back("placeholder " + p.token + " in (" + obj.class_name + ", " +
                                     obj.name_or_empty() + ") resolved to \"" + candidate_text +
                                     "\" (single candidate)");
        }
    }
    return resolved;
}

std::pair<idf::IdfDocument, std::vector<RepairRound>> Pipeline::debug_loop(idf::IdfDocument doc,
                                                                           RunLog* log) {
    std::vector<RepairRound> rounds;

    RunLog scratch_log;
    resolve_unambiguous_placeholders(doc, log ? log : &scratch_log);

    for (int round = 1; round <= config_.max_repair_iterations; ++round) {
        const sim::SimulationReport report =
            sim::run_simulation(*simulator_, doc, config_.weather_path);
        if (report.clean()) {
            if (log) log->outcome = Outcome::Clean;
            return {std::move(doc), std::move(rounds)};
        }

        RepairRound round_log;
        round_log.severe_count = report.count(sim::Severity::Severe);
        round_log.fatal_count = report.count(sim::Severity::Fatal);

        const std::string digest_text = sim::severe_fatal_digest(report.entries);
        const std::string before_text = idf::serialize(doc, *schema_);
        const agents::RepairSet repair = request_repair(digest_text, before_text, round);

        if (static_cast<int>(repair.targets.size()) > config_.max_objects_per_repair())
            throw PipelineError(PipelineErrorKind::RepairParseFailed,
                                "repair set exceeds the per-round object cap");

        std::vector<idf::Repair> replacements;
        std::vector<idf::IdfObject> additions;
        for (const auto& obj : repair.corrected_objects) {
            const auto hits = doc.find(obj.class_name, obj.name_or_empty());
            if (hits.empty()) {
                additions.push_back(obj);
            } else {
                replacements.push_back(idf::Repair{obj.class_name, obj.name_or_empty(), obj});
            }
        }
        idf::IdfDocument next = idf::replace_objects(doc, replacements);
        if (!additions.empty()) {
            auto merged = idf::merge(std::move(next), additions);
            next = std::move(merged.document);
            if (log)
                for (const auto& w : merged.warnings) log->notes.push_back(w);
        }

        round_log.targets = repair.targets;
        round_log.replaced = static_cast<int>(replacements.size());
        round_log.added = static_cast<int>(additions.size());
        if (log && round_log.added > 0)
            log->notes.push_back("repair round " + std::to_string(round) + " added " +
                                 std::to_string(round_log.added) +
                                 " new object(s) not present in the document");
        round_log.diff = text::unified_diff(before_text, idf::serialize(next, *schema_),
                                            "round" + std::to_string(round) + "/before",
                                            "round" + std::to_string(round) + "/after");
        rounds.push_back(std::move(round_log));
        doc = std::move(next);

        if (log) log->repair_rounds = rounds;
    }

    const sim::SimulationReport final_report =
        sim::run_simulation(*simulator_, doc, config_.weather_path);
    if (final_report.clean()) {
        if (log) log->outcome = Outcome::Clean;
        return {std::move(doc), std::move(rounds)};
    }
    if (log) log->outcome = Outcome::MaxIterationsExceeded;
    return {std::move(doc), std::move(rounds)};
}

PipelineResult Pipeline::generate_idf(const std::string& description,
                                      const idf::IdfDocument& initial) {
    PipelineResult result;
    RunLog& log = result.log;

    // Agent 1: extraction, with one re-prompt on parse failure.
    const std::string extraction_prompt = agents::render_extraction_prompt(
        description, config_.common_object_list, config_.templates);
    agents::ExtractionParse extraction;
    std::string prompt = extraction_prompt;
    bool extracted = false;
    std::string last_error;
    for (int attempt = 1; attempt <= 2 && !extracted; ++attempt) {
        llm::ChatRequest request;
        request.prompt = prompt;
        request.temperature = 0.0;
        request.model_id = config_.model_id;
        request.request_tag = std::string("agent1") + (attempt > 1 ? "/retry" : "");
        const std::string response = llm::complete(*chat_, request);
        try {
            extraction = agents::parse_extraction(response, config_.common_object_list);
            extracted = true;
        } catch (const agents::AgentError& e) {
            last_error = e.what();
            prompt = extraction_prompt +
                     "\nThe previous response could not be parsed: " + std::string(e.what()) +
                     "\nRespond with exactly one dictionary in the requested format.\n";
        }
    }
    if (!extracted)
        throw PipelineError(PipelineErrorKind::ExtractionFailed,
                            "extraction failed after retry: " + last_error);

    log.extraction = extraction.items;
    for (const auto& r : extraction.rejected) log.notes.push_back("extraction: " + r);

    if (extraction.items.empty()) {
        result.document = initial;
        log.outcome = Outcome::Clean;
        return result;
    }

    // Agent 2: one object per item, optionally in parallel; merge order is
    // extraction order either way.
    std::vector<GenerationOutcome> outcomes(extraction.items.size());
    if (config_.parallel_generation) {
        std::vector<std::future<GenerationOutcome>> futures;
        futures.reserve(extraction.items.size());
        for (const auto& item : extraction.items)
            futures.push_back(std::async(std::launch::async,
                                         [this, &item]() { return generate_one(item); }));
        for (std::size_t i = 0; i < futures.size(); ++i) outcomes[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < extraction.items.size(); ++i)
            outcomes[i] = generate_one(extraction.items[i]);
    }

    std::vector<idf::IdfObject> additions;
    for (auto& outcome : outcomes) {
        log.per_object.push_back(outcome.attempt);
        if (!outcome.attempt.ok) {
            std::ostringstream msg;
            msg << "generation failed for (" << outcome.attempt.item.object_type << ", "
                << outcome.attempt.item.object_name << ") after re-prompt";
            throw PipelineError(PipelineErrorKind::GenerationFailed, msg.str());
        }
        additions.push_back(std::move(outcome.object));
    }

    auto merged = idf::merge(initial, std::move(additions));
    for (const auto& w : merged.warnings) log.notes.push_back(w);

    // Agent 3: the debug loop.
    auto [repaired, rounds] = debug_loop(std::move(merged.document), &log);
    result.document = std::move(repaired);
    log.repair_rounds = std::move(rounds);
    return result;
}

PipelineResult Pipeline::modify_idf(const idf::IdfDocument& doc, const std::string& request_text) {
    PipelineResult result;
    RunLog& log = result.log;

    const std::string central_prompt =
        agents::render_central_prompt(request_text, config_.templates);
    std::vector<agents::PlanEntry> plan;
    std::string prompt = central_prompt;
    bool planned = false;
    std::string last_error;
    for (int attempt = 1; attempt <= 2 && !planned; ++attempt) {
        llm::ChatRequest request;
        request.prompt = prompt;
        request.temperature = 0.0;
        request.model_id = config_.model_id;
        request.request_tag = std::string("central") + (attempt > 1 ? "/retry" : "");
        const std::string response = llm::complete(*chat_, request);
        try {
            plan = agents::parse_central_plan(response);
            planned = true;
        } catch (const agents::AgentError& e) {
            last_error = e.what();
            prompt = central_prompt +
                     "\nThe previous response could not be parsed: " + std::string(e.what()) +
                     "\nRespond with exactly one dictionary in the requested format.\n";
        }
    }
    if (!planned)
        throw PipelineError(PipelineErrorKind::PlanFailed,
                            "central plan failed after retry: " + last_error);

    if (plan.empty()) {
        result.document = doc;
        log.outcome = Outcome::Clean;
        return result;
    }

    idf::IdfDocument current = doc;
    for (const auto& entry : plan) {
        agents::ExtractionItem as_item{entry.class_name, entry.object_name, entry.sub_request};
        log.extraction.push_back(as_item);

        const auto hits = current.find(entry.class_name, entry.object_name);
        std::string user_request;
        if (hits.size() == 1) {
            const std::string object_text =
                idf::serialize_object(current.objects[hits.front()], *schema_);
            user_request = entry.sub_request + "\nHere is the current object:\n" + object_text +
                           "\nReturn the full corrected object.";
        } else if (hits.size() > 1) {
            log.notes.push_back("plan entry (" + entry.class_name + ", " + entry.object_name +
                                ") matches several objects; skipped");
            continue;
        } else {
            user_request = item_request(as_item);
        }

        ObjectAttempt attempt_log;
        attempt_log.item = as_item;
        try {
            const std::string excerpt = idd::idd_excerpt(*schema_, entry.class_name);
            const std::string task_prompt =
                agents::render_generation_prompt(excerpt, user_request, config_.templates);
            llm::ChatRequest request;
            request.prompt = task_prompt;
            request.temperature = 0.0;
            request.model_id = config_.model_id;
            request.request_tag = "task/" + entry.object_name;
            attempt_log.prompt_digest = llm::request_digest(request);
            attempt_log.attempts = 1;
            const std::string response = llm::complete(*chat_, request);

            auto objects = agents::extract_objects(response, entry.class_name);
            if (objects.empty())
                throw PipelineError(PipelineErrorKind::GenerationFailed,
                                    "task agent returned no parseable object");
            for (const auto& obj : objects) {
                const auto existing = current.find(obj.class_name, obj.name_or_empty());
                if (existing.size() == 1) {
                    current = idf::replace_objects(
                        current, {idf::Repair{obj.class_name, obj.name_or_empty(), obj}});
                } else if (existing.empty()) {
                    auto merged = idf::merge(std::move(current), {obj});
                    current = std::move(merged.document);
                } else {
                    throw idf::IdfError(idf::IdfErrorKind::AmbiguousTarget,
                                        "several objects match (" + obj.class_name + ", " +
                                            obj.name_or_empty() + ")");
                }
            }
            attempt_log.ok = true;
        } catch (const std::exception& e) {
            attempt_log.ok = false;
            log.notes.push_back("plan entry (" + entry.class_name + ", " + entry.object_name +
                                ") failed: " + e.what());
        }
        log.per_object.push_back(std::move(attempt_log));
    }

    // Aggregation check: dangling references (or leftover placeholders)
    // trigger exactly one repair round.
    idf::ReferenceAudit audit = idf::reference_audit(current, *schema_);
    if (!audit.clean()) {
        resolve_unambiguous_placeholders(current, &log);
        audit = idf::reference_audit(current, *schema_);
    }
    if (!audit.clean()) {
        RepairRound round_log;
        round_log.severe_count = static_cast<int>(audit.dangling.size() + audit.placeholders.size());
        const std::string digest_text = audit_digest_text(audit, current, *schema_);
        const std::string before_text = idf::serialize(current, *schema_);
        try {
            const agents::RepairSet repair = request_repair(digest_text, before_text, 1);
            std::vector<idf::Repair> replacements;
            std::vector<idf::IdfObject> additions;
            for (const auto& obj : repair.corrected_objects) {
                if (current.find(obj.class_name, obj.name_or_empty()).empty())
                    additions.push_back(obj);
                else
                    replacements.push_back(idf::Repair{obj.class_name, obj.name_or_empty(), obj});
            }
            current = idf::replace_objects(current, replacements);
            if (!additions.empty()) {
                auto merged = idf::merge(std::move(current), additions);
                current = std::move(merged.document);
            }
            round_log.targets = repair.targets;
            round_log.replaced = static_cast<int>(replacements.size());
            round_log.added = static_cast<int>(additions.size());
            round_log.diff = text::unified_diff(before_text, idf::serialize(current, *schema_),
                                                "audit/before", "audit/after");
        } catch (const std::exception& e) {
            log.notes.push_back(std::string("audit repair failed: ") + e.what());
        }
        log.repair_rounds.push_back(std::move(round_log));
        audit = idf::reference_audit(current, *schema_);
    }

    result.document = std::move(current);
    log.outcome = audit.clean() ? Outcome::Clean : Outcome::Aborted;
    return result;
}

}  // namespace bemflow::pipe
