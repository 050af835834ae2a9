#include "bemflow/simulator_bridge.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bemflow/text_util.hpp"

namespace bemflow::sim {

namespace fs = std::filesystem;
using text::trim;

int SimulationReport::count(Severity s) const {
    int n = 0;
    for (const auto& e : entries)
        if (e.severity == s) ++n;
    return n;
}

namespace {

constexpr std::string_view kWarningMarker = "** Warning **";
constexpr std::string_view kSevereMarker = "** Severe  **";
constexpr std::string_view kFatalMarker = "**  Fatal  **";
constexpr std::string_view kContinuationMarker = "**   ~~~   **";

std::optional<std::pair<std::string, std::string>> extract_reference(const std::string& message) {
    // Object references look like Class="NAME"; class tokens may contain ':'.
    for (std::size_t i = 0; i + 2 < message.size(); ++i) {
        if (message[i] != '=' || message[i + 1] != '"') continue;
        // Walk back over the class token.
        std::size_t start = i;
        while (start > 0) {
            const char c = message[start - 1];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == ':' || c == '_') --start;
            else break;
        }
        if (start == i) continue;
        const std::size_t name_end = message.find('"', i + 2);
        if (name_end == std::string::npos) continue;
        return std::make_pair(message.substr(start, i - start),
                              message.substr(i + 2, name_end - i - 2));
    }
    return std::nullopt;
}

}  // namespace

ParsedErr parse_err(std::string_view raw) {
    ParsedErr result;
    for (const auto& line : text::split_lines(raw)) {
        Severity severity = Severity::Warning;
        std::string_view marker;
        if (line.find(kWarningMarker) != std::string::npos) {
            marker = kWarningMarker;
            severity = Severity::Warning;
        } else if (line.find(kSevereMarker) != std::string::npos) {
            marker = kSevereMarker;
            severity = Severity::Severe;
        } else if (line.find(kFatalMarker) != std::string::npos) {
            marker = kFatalMarker;
            severity = Severity::Fatal;
        } else if (line.find(kContinuationMarker) != std::string::npos) {
            if (!result.entries.empty()) {
                const std::size_t pos = line.find(kContinuationMarker);
                result.entries.back().message +=
                    "\n" + trim(line.substr(pos + kContinuationMarker.size()));
            } else {
                ++result.skipped_lines;
            }
            continue;
        } else {
            if (!trim(line).empty()) ++result.skipped_lines;
            continue;
        }
        const std::size_t pos = line.find(marker);
        ErrEntry entry;
        entry.severity = severity;
        entry.message = trim(line.substr(pos + marker.size()));
        entry.referenced_object = extract_reference(entry.message);
        result.entries.push_back(std::move(entry));
    }
    // Continuations may carry the reference when the headline does not.
    for (auto& e : result.entries) {
        if (!e.referenced_object) e.referenced_object = extract_reference(e.message);
    }
    return result;
}

std::string severe_fatal_digest(const std::vector<ErrEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        if (e.severity == Severity::Warning) continue;
        if (!out.empty()) out += "\n\n";
        out += e.message;
    }
    return out;
}

SimulationReport run_simulation(SimulatorRunner& runner, const idf::IdfDocument& idf,
                                const std::string& weather_path) {
    return runner.run(idf, weather_path);
}

SimulationReport ExternalSimulator::run(const idf::IdfDocument& idf,
                                        const std::string& weather_path) {
    if (!fs::exists(executable_))
        throw SimError(SimErrorKind::ExecutableNotFound,
                       "simulator executable not found: " + executable_);
    if (!fs::exists(weather_path))
        throw SimError(SimErrorKind::WeatherFileMissing, "weather file not found: " + weather_path);

    std::mt19937_64 rng(std::random_device{}());
    const fs::path scratch =
        fs::temp_directory_path() / ("bemflow-sim-" + std::to_string(rng()));
    fs::create_directories(scratch);
    const fs::path idf_path = scratch / "in.idf";
    {
        std::ofstream out(idf_path);
        out << (schema_ ? idf::serialize(idf, *schema_) : idf::serialize(idf));
    }
    std::ostringstream cmd;
    cmd << "\"" << executable_ << "\" -w \"" << weather_path << "\" -d \"" << scratch.string()
        << "\" \"" << idf_path.string() << "\" > /dev/null 2>&1";
    const int rc = std::system(cmd.str().c_str());

    const fs::path err_path = scratch / "eplusout.err";
    if (!fs::exists(err_path)) {
        fs::remove_all(scratch);
        throw SimError(SimErrorKind::SimulatorCrashed,
                       "simulator exited with code " + std::to_string(rc) +
                           " and produced no .err file");
    }
    std::ifstream err_in(err_path);
    std::ostringstream raw;
    raw << err_in.rdbuf();
    fs::remove_all(scratch);

    SimulationReport report;
    report.raw_err = raw.str();
    ParsedErr parsed = parse_err(report.raw_err);
    report.entries = std::move(parsed.entries);
    report.skipped_lines = parsed.skipped_lines;
    report.completed = report.raw_err.find("EnergyPlus Completed Successfully") != std::string::npos &&
                       report.count(Severity::Fatal) == 0;
    return report;
}

MockSimulator MockSimulator::with_default_rules(const idd::IddSchema& schema) {
    std::vector<MockRule> rules;
    rules.push_back(MockRule{MockRule::When::Dangling, "", Severity::Severe,
                             "{class}=\"{name}\", invalid {field}=\"{token}\" - no object found "
                             "registered under {list}."});
    rules.push_back(MockRule{MockRule::When::Placeholder, "", Severity::Severe,
                             "{class}=\"{name}\", field {field} contains unresolved placeholder "
                             "\"{token}\"."});
    return MockSimulator(schema, std::move(rules));
}

std::vector<MockRule> MockSimulator::parse_rules(std::string_view rules_text) {
    std::vector<MockRule> rules;
    for (const auto& raw_line : text::split_lines(rules_text)) {
        const std::string line = trim(raw_line);
        if (line.empty() || line[0] == '#') continue;
        MockRule rule;
        const std::size_t when_pos = line.find("when=");
        const std::size_t sev_pos = line.find("severity=");
        const std::size_t msg_pos = line.find("message=");
        if (when_pos == std::string::npos || sev_pos == std::string::npos ||
            msg_pos == std::string::npos)
            continue;
        std::string when = trim(line.substr(when_pos + 5, line.find(' ', when_pos) - when_pos - 5));
        if (when == "placeholder") rule.when = MockRule::When::Placeholder;
        else if (when == "dangling") rule.when = MockRule::When::Dangling;
        else if (when == "always") rule.when = MockRule::When::Always;
        else if (when.rfind("class-present:", 0) == 0) {
            rule.when = MockRule::When::ClassPresent;
            rule.class_filter = when.substr(14);
        } else {
            continue;
        }
        std::string sev = trim(line.substr(sev_pos + 9, line.find(' ', sev_pos) - sev_pos - 9));
        if (text::iequals(sev, "Warning")) rule.severity = Severity::Warning;
        else if (text::iequals(sev, "Fatal")) rule.severity = Severity::Fatal;
        else rule.severity = Severity::Severe;
        rule.message = trim(line.substr(msg_pos + 8));
        rules.push_back(std::move(rule));
    }
    return rules;
}

namespace {

std::string fill_message(std::string templ, const std::string& cls, const std::string& name,
                         const std::string& field, const std::string& token,
                         const std::string& list) {
    auto sub = [&](const char* key, const std::string& value) {
        const std::string needle(key);
        std::size_t pos = 0;
        while ((pos = templ.find(needle, pos)) != std::string::npos) {
            templ.replace(pos, needle.size(), value);
            pos += value.size();
        }
    };
    sub("{class}", cls);
    sub("{name}", name);
    sub("{field}", field);
    sub("{token}", token);
    sub("{list}", list);
    return templ;
}

}  // namespace

SimulationReport MockSimulator::run(const idf::IdfDocument& idf,
                                    const std::string& /*weather_path*/) {
    const idf::ReferenceAudit audit = idf::reference_audit(idf, *schema_);

    std::ostringstream err;
    err << "Program Version,EnergyPlus, Version 23.1.0-mock, YMD=fixed\n";
    int severe = 0;
    int fatal = 0;

    auto emit = [&](Severity severity, const std::string& message) {
        const char* marker = severity == Severity::Warning ? "   ** Warning ** "
                             : severity == Severity::Severe ? "   ** Severe  ** "
                                                            : "   **  Fatal  ** ";
        err << marker << message << "\n";
        if (severity == Severity::Severe) ++severe;
        if (severity == Severity::Fatal) ++fatal;
    };

    for (const auto& rule : rules_) {
        switch (rule.when) {
            case MockRule::When::Dangling:
                for (const auto& d : audit.dangling) {
                    const idf::IdfObject& obj = idf.objects[d.object_index];
                    const idd::ObjectDef* def = schema_->find(obj.class_name);
                    const std::string field =
                        def ? def->display_name_at(d.field_ordinal)
                            : "field " + std::to_string(d.field_ordinal);
                    emit(rule.severity, fill_message(rule.message, obj.class_name,
                                                     obj.name_or_empty(), field,
                                                     d.referenced_name, d.expected_list));
                }
                break;
            case MockRule::When::Placeholder:
                for (const auto& p : audit.placeholders) {
                    const idf::IdfObject& obj = idf.objects[p.object_index];
                    const idd::ObjectDef* def = schema_->find(obj.class_name);
                    const std::string field =
                        def ? def->display_name_at(p.field_ordinal)
                            : "field " + std::to_string(p.field_ordinal);
                    emit(rule.severity, fill_message(rule.message, obj.class_name,
                                                     obj.name_or_empty(), field, p.token, ""));
                }
                break;
            case MockRule::When::ClassPresent:
                if (!idf.find(rule.class_filter).empty())
                    emit(rule.severity,
                         fill_message(rule.message, rule.class_filter, "", "", "", ""));
                break;
            case MockRule::When::Always:
                emit(rule.severity, rule.message);
                break;
        }
    }

    if (severe > 0 && fatal == 0) {
        emit(Severity::Fatal,
             "Errors occurred during input processing. Preceding condition(s) cause termination.");
    }
    if (severe == 0 && fatal == 0) {
        err << "   ************* EnergyPlus Completed Successfully-- 0 Warning; 0 Severe Errors.\n";
    } else {
        err << "   ************* EnergyPlus Terminated--Fatal Error Detected. " << severe
            << " Severe Errors;\n";
    }

    SimulationReport report;
    report.raw_err = err.str();
    ParsedErr parsed = parse_err(report.raw_err);
    report.entries = std::move(parsed.entries);
    report.skipped_lines = parsed.skipped_lines;
    report.completed = severe == 0 && fatal == 0;
    return report;
}

}  // namespace bemflow::sim
