#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bemflow/idd_schema.hpp"
#include "bemflow/idf_core.hpp"

namespace bemflow::sim {

enum class Severity { Warning, Severe, Fatal };

struct ErrEntry {
    Severity severity = Severity::Warning;
    std::string message;
    std::optional<std::pair<std::string, std::string>> referenced_object;  // (class, name)
};

struct SimulationReport {
    bool completed = false;  // reached the success banner
    std::vector<ErrEntry> entries;
    std::string raw_err;
    int skipped_lines = 0;

    int count(Severity s) const;
    bool clean() const { return count(Severity::Severe) == 0 && count(Severity::Fatal) == 0; }
};

struct ParsedErr {
    std::vector<ErrEntry> entries;
    int skipped_lines = 0;
};

enum class SimErrorKind { ExecutableNotFound, WeatherFileMissing, SimulatorCrashed };

class SimError : public std::runtime_error {
public:
    SimError(SimErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    SimErrorKind kind() const { return kind_; }

private:
    SimErrorKind kind_;
};

/// Parse .err text: severity markers start entries, "~~~" lines continue
/// them, Class="NAME" references are extracted when present. Total; unknown
/// lines are counted, not rejected.
ParsedErr parse_err(std::string_view raw);

/// Messages of Severe and Fatal entries only, original order, separated by
/// blank lines.
std::string severe_fatal_digest(const std::vector<ErrEntry>& entries);

class SimulatorRunner {
public:
    virtual ~SimulatorRunner() = default;
    virtual SimulationReport run(const idf::IdfDocument& idf, const std::string& weather_path) = 0;
};

/// Runs the real simulator executable in a scratch directory and parses its
/// .err output.
class ExternalSimulator final : public SimulatorRunner {
public:
    ExternalSimulator(std::string executable, const idd::IddSchema* schema = nullptr)
        : executable_(std::move(executable)), schema_(schema) {}

    SimulationReport run(const idf::IdfDocument& idf, const std::string& weather_path) override;

private:
    std::string executable_;
    const idd::IddSchema* schema_;
};

/// One mock rule: a document predicate mapped to synthetic err text.
struct MockRule {
    enum class When { Placeholder, Dangling, ClassPresent, Always };
    When when = When::Always;
    std::string class_filter;  // ClassPresent only
    Severity severity = Severity::Severe;
    // Template with {class} {name} {field} {token} placeholders.
    std::string message;
};

/// Deterministic stand-in for the simulator: evaluates its rule table
/// against the document (via reference_audit) and synthesizes an .err.
class MockSimulator final : public SimulatorRunner {
public:
    MockSimulator(const idd::IddSchema& schema, std::vector<MockRule> rules)
        : schema_(&schema), rules_(std::move(rules)) {}

    /// The two failure classes the repair loop exists for: unresolved
    /// placeholders and dangling references, both Severe.
    static MockSimulator with_default_rules(const idd::IddSchema& schema);

    /// One rule per line: when=<placeholder|dangling|class-present:X|always>
    /// severity=<Warning|Severe|Fatal> message=<text with {class} {name}
    /// {field} {token}>. '#' lines are comments.
    static std::vector<MockRule> parse_rules(std::string_view text);

    SimulationReport run(const idf::IdfDocument& idf, const std::string& weather_path) override;

private:
    const idd::IddSchema* schema_;
    std::vector<MockRule> rules_;
};

SimulationReport run_simulation(SimulatorRunner& runner, const idf::IdfDocument& idf,
                                const std::string& weather_path);

}  // namespace bemflow::sim
