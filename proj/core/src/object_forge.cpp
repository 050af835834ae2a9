#include "bemflow/object_forge.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "bemflow/text_util.hpp"

namespace bemflow::forge {

using idd::FieldDef;
using idd::FieldKind;
using idd::ObjectDef;
using idf::FieldValue;
using text::normalize_key;

namespace {

const ObjectDef& def_or_throw(const idd::IddSchema& schema, const std::string& class_name) {
    try {
        return idd::object_def(schema, class_name);
    } catch (const idd::UnknownClassError& e) {
        throw ForgeError(ForgeErrorKind::UnknownClass, e.what());
    }
}

bool parse_number(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool is_autosize_like(const std::string& s) {
    return text::iequals(s, "autosize") || text::iequals(s, "autocalculate");
}

bool values_equal(const std::string& a, const std::string& b) {
    double da = 0;
    double db = 0;
    if (parse_number(a, da) && parse_number(b, db)) return da == db;
    return text::iequals(a, b);
}

bool choice_member(const FieldDef& f, const std::string& value) {
    for (const auto& k : f.choices)
        if (text::iequals(k, value)) return true;
    return false;
}

void check_assignment_value(const FieldDef& f, const std::string& value) {
    if (f.kind == FieldKind::Choice && !choice_member(f, value)) {
        std::string keys;
        for (const auto& k : f.choices) keys += (keys.empty() ? "" : ", ") + k;
        throw ForgeError(ForgeErrorKind::ChoiceMismatch,
                         "\"" + value + "\" is not a valid key for field \"" + f.name +
                             "\" (choices: " + keys + ")");
    }
    if ((f.kind == FieldKind::Numeric || f.kind == FieldKind::Integer) && f.bounds) {
        if (is_autosize_like(value) && (f.autosize_allowed || f.autocalculate_allowed)) return;
        double v = 0;
        if (parse_number(value, v) && !f.bounds->contains(v)) {
            throw ForgeError(ForgeErrorKind::AssignmentOutOfBounds,
                             "value " + value + " violates the bounds of field \"" + f.name + "\"");
        }
    }
}

}  // namespace

namespace {

// Assignment keys may name extensible tail positions ("Field 7"); resolve a
// display name to its 1-based ordinal, or 0 when the class has no such field.
int resolve_field_ordinal(const ObjectDef& def, const std::string& key) {
    if (const FieldDef* f = def.find_field(key)) return f->ordinal;
    if (!def.extensible_group || *def.extensible_group <= 0) return 0;
    constexpr int kTailScanLimit = 400;
    const int declared = static_cast<int>(def.fields.size());
    for (int ordinal = declared + 1; ordinal <= declared + kTailScanLimit; ++ordinal) {
        if (text::iequals(def.display_name_at(ordinal), key)) return ordinal;
    }
    return 0;
}

}  // namespace

GenerationSpec GenerationSpec::checked(
    const idd::IddSchema& schema, std::string class_name,
    std::vector<std::pair<std::string, std::string>> assignments, std::string free_text) {
    const ObjectDef& def = def_or_throw(schema, class_name);
    for (const auto& [key, value] : assignments) {
        (void)value;
        if (resolve_field_ordinal(def, key) == 0)
            throw ForgeError(ForgeErrorKind::UnknownField,
                             "class \"" + def.class_name + "\" has no field named \"" + key + "\"");
    }
    GenerationSpec spec;
    spec.class_name = def.class_name;
    spec.assignments = std::move(assignments);
    spec.free_text = std::move(free_text);
    return spec;
}

std::string PlaceholderSource::next() {
    std::uniform_int_distribution<int> digit(0, 9);
    for (;;) {
        std::string token = "TBD";
        for (int i = 0; i < 10; ++i) token.push_back(static_cast<char>('0' + digit(rng_)));
        if (used_.insert(token).second) return token;
    }
}

ForgeResult forge_object(const idd::IddSchema& schema, const GenerationSpec& spec,
                         PlaceholderSource& placeholders, DefaultsPolicy policy) {
    const ObjectDef& def = def_or_throw(schema, spec.class_name);

    const int declared = static_cast<int>(def.fields.size());
    int emit_count = std::max(declared, def.min_fields);

    // Resolve assignments to ordinals up front; assignments may extend the
    // object into its extensible tail.
    std::map<int, const std::string*> assigned;
    for (const auto& [key, value] : spec.assignments) {
        const int ordinal = resolve_field_ordinal(def, key);
        if (ordinal == 0)
            throw ForgeError(ForgeErrorKind::UnknownField,
                             "class \"" + def.class_name + "\" has no field named \"" + key + "\"");
        check_assignment_value(*def.field_at(ordinal), value);
        assigned[ordinal] = &value;
        emit_count = std::max(emit_count, ordinal);
    }

    ForgeResult result;
    result.object.class_name = def.class_name;
    for (int ordinal = 1; ordinal <= emit_count; ++ordinal) {
        const FieldDef& f = *def.field_at(ordinal);
        const std::string name = def.display_name_at(ordinal);
        const bool tail = ordinal > declared;
        // Tail repetitions are optional by construction: any whole number of
        // group repetitions is valid, so unassigned tail positions stay blank.
        const bool required = !tail && f.required;
        const std::optional<std::string> default_value =
            (tail || policy == DefaultsPolicy::LeaveBlank) ? std::optional<std::string>{}
                                                           : f.default_value;

        auto it = assigned.find(ordinal);
        FieldValue value;
        if (it != assigned.end()) {
            value = FieldValue::classify(*it->second);
            value.comment = name + " - set by user";
            result.report.user_set.push_back(name);
        } else if (required) {
            value = FieldValue::placeholder(placeholders.next());
            value.comment = name + " - mandatory, not defined by user";
            result.report.mandatory_undefined.push_back(name);
        } else if (default_value) {
            value = FieldValue::literal(*default_value);
            value.comment = name + " - IDD default";
            result.report.defaulted.push_back(name);
        } else {
            value = FieldValue::blank();
            value.comment = name + " - optional, left blank";
            result.report.left_blank.push_back(name);
        }
        result.object.values.push_back(std::move(value));
    }
    return result;
}

namespace {

std::string found_text(const FieldValue& v) {
    switch (v.kind) {
        case FieldValue::Kind::Blank: return "blank";
        case FieldValue::Kind::Placeholder: return "placeholder " + v.text;
        case FieldValue::Kind::Literal: return "\"" + v.text + "\"";
    }
    return {};
}

ValidationResult validate_strict(const idd::IddSchema& schema, const idf::IdfObject& object,
                                 const GenerationSpec& spec) {
    PlaceholderSource scratch(0);
    ForgeResult expected = forge_object(schema, spec, scratch);

    ValidationResult result;
    const std::size_t common = std::min(expected.object.values.size(), object.values.size());
    const ObjectDef& def = def_or_throw(schema, spec.class_name);

    for (std::size_t i = 0; i < common; ++i) {
        const std::string name = def.display_name_at(static_cast<int>(i) + 1);
        const FieldValue& exp = expected.object.values[i];
        const FieldValue& got = object.values[i];
        switch (exp.kind) {
            case FieldValue::Kind::Placeholder:
                if (got.kind != FieldValue::Kind::Placeholder)
                    result.violations.push_back(
                        {name, "placeholder (mandatory, not defined by user)", found_text(got)});
                break;
            case FieldValue::Kind::Blank:
                if (got.kind != FieldValue::Kind::Blank)
                    result.violations.push_back(
                        {name, "blank (optional, not defined by user)", found_text(got)});
                break;
            case FieldValue::Kind::Literal: {
                const bool is_default =
                    std::find(expected.report.defaulted.begin(), expected.report.defaulted.end(),
                              name) != expected.report.defaulted.end();
                const std::string rule = (is_default ? "default \"" : "user value \"") + exp.text + "\"";
                if (got.kind != FieldValue::Kind::Literal || !values_equal(exp.text, got.text))
                    result.violations.push_back({name, rule, found_text(got)});
                break;
            }
        }
    }
    for (std::size_t i = common; i < expected.object.values.size(); ++i) {
        const std::string name = def.display_name_at(static_cast<int>(i) + 1);
        const FieldValue& exp = expected.object.values[i];
        std::string rule;
        switch (exp.kind) {
            case FieldValue::Kind::Placeholder: rule = "placeholder (mandatory, not defined by user)"; break;
            case FieldValue::Kind::Blank: rule = "blank (optional, not defined by user)"; break;
            case FieldValue::Kind::Literal: rule = "value \"" + exp.text + "\""; break;
        }
        result.violations.push_back({name, rule, "(missing)"});
    }
    for (std::size_t i = expected.object.values.size(); i < object.values.size(); ++i) {
        result.violations.push_back({"field " + std::to_string(i + 1), "not part of class \"" +
                                                                           spec.class_name + "\"",
                                     found_text(object.values[i])});
    }
    if (result.ok()) result.report = expected.report;
    return result;
}

ValidationResult validate_lenient(const idd::IddSchema& schema, const idf::IdfObject& object,
                                  const GenerationSpec& spec) {
    const ObjectDef& def = def_or_throw(schema, spec.class_name);
    ValidationResult result;

    for (std::size_t i = 0; i < object.values.size(); ++i) {
        const FieldDef* f = def.field_at(static_cast<int>(i) + 1);
        if (!f) {
            result.violations.push_back({"field " + std::to_string(i + 1),
                                         "not part of class \"" + def.class_name + "\"",
                                         found_text(object.values[i])});
            continue;
        }
        const std::string display = def.display_name_at(static_cast<int>(i) + 1);
        const FieldValue& v = object.values[i];
        switch (v.kind) {
            case FieldValue::Kind::Blank:
                if (f->required)
                    result.violations.push_back(
                        {display, "value or placeholder (mandatory field)", "blank"});
                else
                    result.report.left_blank.push_back(display);
                break;
            case FieldValue::Kind::Placeholder:
                if (f->required) result.report.mandatory_undefined.push_back(display);
                else result.report.user_set.push_back(display);
                break;
            case FieldValue::Kind::Literal: {
                if (f->kind == FieldKind::Choice && !choice_member(*f, v.text)) {
                    std::string keys;
                    for (const auto& k : f->choices) keys += (keys.empty() ? "" : ", ") + k;
                    result.violations.push_back({display, "one of: " + keys, found_text(v)});
                    break;
                }
                if ((f->kind == FieldKind::Numeric || f->kind == FieldKind::Integer) && f->bounds &&
                    !(is_autosize_like(v.text) &&
                      (f->autosize_allowed || f->autocalculate_allowed))) {
                    double num = 0;
                    if (parse_number(v.text, num) && !f->bounds->contains(num)) {
                        result.violations.push_back({display, "value within IDD bounds", v.text});
                        break;
                    }
                }
                if (f->default_value && values_equal(*f->default_value, v.text))
                    result.report.defaulted.push_back(display);
                else
                    result.report.user_set.push_back(display);
                break;
            }
        }
    }
    // Mandatory fields that were omitted entirely.
    for (const FieldDef& f : def.fields) {
        if (f.required && static_cast<std::size_t>(f.ordinal) > object.values.size())
            result.violations.push_back({f.name, "value or placeholder (mandatory field)",
                                         "(missing)"});
    }
    if (!result.ok()) result.report = FieldReport{};
    return result;
}

}  // namespace

ValidationResult validate_generated(const idd::IddSchema& schema, const idf::IdfObject& object,
                                    const GenerationSpec& spec) {
    if (!text::iequals(object.class_name, spec.class_name))
        throw ForgeError(ForgeErrorKind::UnknownClass,
                         "object class \"" + object.class_name + "\" does not match spec class \"" +
                             spec.class_name + "\"");
    if (spec.assignments.empty() && !spec.free_text.empty())
        return validate_lenient(schema, object, spec);
    return validate_strict(schema, object, spec);
}

double convert_ip_si(UnitKind kind, double value) {
    if (!std::isfinite(value))
        throw ForgeError(ForgeErrorKind::AssignmentOutOfBounds, "value must be finite");
    if (kind != UnitKind::TemperatureFToC && value < 0)
        throw ForgeError(ForgeErrorKind::NegativeMagnitude,
                         "negative magnitude for a non-temperature conversion");
    switch (kind) {
        case UnitKind::LengthInToM: return value * 0.0254;
        case UnitKind::RValue: return value * 0.17611;
        case UnitKind::Conductivity: return value * 0.144228;
        case UnitKind::Density: return value * 16.0185;
        case UnitKind::SpecificHeat: return value * 4186.8;
        case UnitKind::TemperatureFToC: return (value - 32.0) * 5.0 / 9.0;
        case UnitKind::UFactor: return value * 5.67826;
    }
    return value;
}

namespace {

void append_section(std::ostringstream& out, const char* label,
                    const std::vector<std::string>& names) {
    out << label << ": ";
    if (names.empty()) {
        out << "(none)";
    } else {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) out << ", ";
            out << '"' << names[i] << '"';
        }
    }
    out << "\n";
}

}  // namespace

std::string summary_text(const FieldReport& report) {
    std::ostringstream out;
    append_section(out, "Fields set by user", report.user_set);
    append_section(out, "Mandatory fields not defined", report.mandatory_undefined);
    append_section(out, "Fields set to default values", report.defaulted);
    append_section(out, "Fields left blank", report.left_blank);
    return out.str();
}

}  // namespace bemflow::forge
