#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bemflow/idd_schema.hpp"
#include "bemflow/idf_core.hpp"

namespace bemflow::forge {

/// What the user asked for: a class plus explicit field assignments.
/// Assignments are keyed by field display name; free_text keeps the raw
/// natural-language request for audit (and drives lenient validation when
/// no explicit assignments exist).
struct GenerationSpec {
    std::string class_name;
    std::vector<std::pair<std::string, std::string>> assignments;  // ordered
    std::string free_text;

    /// Validates every assignment key against the class's field names.
    static GenerationSpec checked(const idd::IddSchema& schema, std::string class_name,
                                  std::vector<std::pair<std::string, std::string>> assignments,
                                  std::string free_text = {});
};

/// Four-way partition of an emitted object's fields.
struct FieldReport {
    std::vector<std::string> user_set;
    std::vector<std::string> mandatory_undefined;
    std::vector<std::string> defaulted;
    std::vector<std::string> left_blank;

    bool operator==(const FieldReport&) const = default;
};

/// Seedable source of TBD tokens; never repeats a token it handed out.
class PlaceholderSource {
public:
    explicit PlaceholderSource(std::uint64_t seed = 0) : rng_(seed) {}
    std::string next();

private:
    std::mt19937_64 rng_;
    std::unordered_set<std::string> used_;
};

struct ForgeResult {
    idf::IdfObject object;
    FieldReport report;
};

/// What happens to an optional, unassigned field that has an IDD default.
/// FillDefaults is the observed behavior of the worked example (defaults are
/// written out and reported); LeaveBlank is the stricter reading of the rule
/// text, where undefined non-mandatory fields stay empty.
enum class DefaultsPolicy { FillDefaults, LeaveBlank };

struct Violation {
    std::string field;
    std::string expected_rule;
    std::string found;
};

struct ValidationResult {
    FieldReport report;
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

enum class ForgeErrorKind {
    UnknownClass,
    UnknownField,
    AssignmentOutOfBounds,
    ChoiceMismatch,
    NegativeMagnitude
};

class ForgeError : public std::runtime_error {
public:
    ForgeError(ForgeErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    ForgeErrorKind kind() const { return kind_; }

private:
    ForgeErrorKind kind_;
};

/// Deterministic object generation. Field rules, in priority order:
/// user-assigned value; required-but-unassigned -> placeholder; IDD default
/// (per policy); blank. All fields of the class are emitted and each value
/// carries a rationale comment.
ForgeResult forge_object(const idd::IddSchema& schema, const GenerationSpec& spec,
                         PlaceholderSource& placeholders,
                         DefaultsPolicy policy = DefaultsPolicy::FillDefaults);

/// Check an externally produced object against the forge rules.
/// With explicit assignments the comparison is strict, field by field
/// (placeholder tokens compared by pattern, not value). With a free-text
/// spec the user-set fields are unknown, so only rule-breaking values are
/// violations: blank mandatory fields, invalid choices, out-of-bounds
/// numerics, surplus fields.
ValidationResult validate_generated(const idd::IddSchema& schema, const idf::IdfObject& object,
                                    const GenerationSpec& spec);

enum class UnitKind {
    LengthInToM,
    RValue,
    Conductivity,
    Density,
    SpecificHeat,
    TemperatureFToC,
    UFactor
};

/// Exact IP -> SI factor application.
double convert_ip_si(UnitKind kind, double value);

/// The four-section report text, field names in IDD order within sections.
std::string summary_text(const FieldReport& report);

}  // namespace bemflow::forge
