#include "bemflow/idd_schema.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <sstream>

#include "bemflow/text_util.hpp"

namespace bemflow::idd {

using text::normalize_key;
using text::trim;

bool Bounds::contains(double v) const {
    if (min) {
        if (min_exclusive ? v <= *min : v < *min) return false;
    }
    if (max) {
        if (max_exclusive ? v >= *max : v > *max) return false;
    }
    return true;
}

const FieldDef* ObjectDef::find_field(std::string_view display_name) const {
    const std::string key = normalize_key(display_name);
    for (const auto& f : fields) {
        if (normalize_key(f.name) == key) return &f;
    }
    return nullptr;
}

const FieldDef* ObjectDef::field_at(int ordinal) const {
    if (ordinal < 1) return nullptr;
    if (ordinal <= static_cast<int>(fields.size())) return &fields[static_cast<std::size_t>(ordinal - 1)];
    if (!extensible_group || *extensible_group <= 0) return nullptr;
    const int group = *extensible_group;
    const int prefix = static_cast<int>(fields.size()) - group;
    if (prefix < 0) return nullptr;
    const int offset = (ordinal - 1 - prefix) % group;
    return &fields[static_cast<std::size_t>(prefix + offset)];
}

std::string ObjectDef::display_name_at(int ordinal) const {
    const FieldDef* def = field_at(ordinal);
    if (!def) return std::string();
    if (ordinal <= static_cast<int>(fields.size())) return def->name;
    // Tail repetition: substitute the group-relative counter if the base
    // name ends in a number (Field 1 -> Field 7), else suffix it.
    const int group = *extensible_group;
    const int prefix = static_cast<int>(fields.size()) - group;
    const int rep_index = (ordinal - 1 - prefix);  // 0-based over the tail
    const std::string& base = def->name;
    std::size_t pos = base.find_last_not_of("0123456789");
    if (pos != std::string::npos && pos + 1 < base.size() && base.size() - pos <= 9) {
        const int base_number = std::stoi(base.substr(pos + 1));
        const int rep_round = rep_index / group;
        return base.substr(0, pos + 1) + std::to_string(base_number + rep_round);
    }
    return base + " (" + std::to_string(rep_index / group + 1) + ")";
}

const ObjectDef* IddSchema::find(std::string_view class_name) const {
    auto it = defs.find(normalize_key(class_name));
    if (it == defs.end()) return nullptr;
    return &it->second;
}

UnknownClassError::UnknownClassError(std::string class_name, std::string suggestion)
    : IddError(IddErrorKind::UnknownClass,
               "unknown object class \"" + class_name + "\"" +
                   (suggestion.empty() ? "" : " (did you mean \"" + suggestion + "\"?)")),
      class_name_(std::move(class_name)),
      suggestion_(std::move(suggestion)) {}

namespace {

struct DirectiveLine {
    std::string name;  // lower-case, without backslash
    std::string arg;   // remainder, trimmed
};

DirectiveLine split_directive(std::string_view line) {
    // line starts with '\'; argument may follow after whitespace or ':'
    std::size_t i = 1;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != ':')
        ++i;
    DirectiveLine d;
    d.name = text::to_lower(std::string(line.substr(start, i - start)));
    if (i < line.size() && line[i] == ':') ++i;  // \extensible:3
    d.arg = trim(line.substr(i));
    return d;
}

bool is_object_level(const std::string& name) {
    return name == "memo" || name == "min-fields" || name == "extensible" ||
           name == "unique-object" || name == "required-object" || name == "format" ||
           name == "obsolete" || name == "retaincase" || name == "deprecated";
}

std::optional<int> parse_int_arg(const std::string& s) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

std::optional<double> parse_double_arg(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

FieldKind kind_from_type(const std::string& arg) {
    const std::string t = text::to_lower(arg);
    if (t == "alpha") return FieldKind::Alpha;
    if (t == "real") return FieldKind::Numeric;
    if (t == "integer") return FieldKind::Integer;
    if (t == "choice") return FieldKind::Choice;
    if (t == "object-list") return FieldKind::ObjectListRef;
    if (t == "node") return FieldKind::Node;
    return FieldKind::Alpha;
}

struct ParseState {
    IddSchema schema;
    std::optional<ObjectDef> current;
    std::optional<FieldDef> current_field;
    bool current_is_marker = false;  // header ended with ';' (field-less marker)
    bool saw_field_type = false;
    int line_no = 0;

    void finish_field() {
        if (!current_field) return;
        FieldDef f = std::move(*current_field);
        current_field.reset();
        // Invariants: keys imply a choice kind; bounds only on numerics.
        if (!f.choices.empty()) f.kind = FieldKind::Choice;
        if (!f.referenced_lists.empty() && f.kind != FieldKind::ObjectListRef &&
            f.choices.empty())
            f.kind = FieldKind::ObjectListRef;
        if (f.bounds && f.kind != FieldKind::Numeric && f.kind != FieldKind::Integer)
            f.bounds.reset();
        f.ordinal = static_cast<int>(current->fields.size()) + 1;
        current->fields.push_back(std::move(f));
        saw_field_type = false;
    }

    void finish_object() {
        finish_field();
        if (!current) return;
        if (current->fields.empty() && !current_is_marker)
            throw IddError(IddErrorKind::MalformedHeader,
                           "class \"" + current->class_name +
                               "\" has a header but no field list");
        ObjectDef def = std::move(*current);
        current.reset();
        const std::string key = normalize_key(def.class_name);
        auto it = schema.defs.find(key);
        if (it != schema.defs.end()) {
            schema.warnings.push_back("duplicate definition of class \"" + def.class_name +
                                      "\"; last one wins");
            it->second = std::move(def);
        } else {
            schema.defs.emplace(key, std::move(def));
        }
    }
};

bool looks_like_field_spec(std::string_view line, std::string& id, char& term,
                           std::string& rest) {
    // e.g. "A1 , \field Name" or "N8 ; \field Heat Stress Temperature Threshold"
    std::size_t i = 0;
    if (i >= line.size()) return false;
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(line[i])));
    if (c != 'A' && c != 'N') return false;
    std::size_t j = i + 1;
    while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
    if (j == i + 1) return false;
    std::size_t k = j;
    while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    if (k >= line.size() || (line[k] != ',' && line[k] != ';')) return false;
    id = std::string(line.substr(i, j - i));
    id[0] = c;
    term = line[k];
    rest = trim(line.substr(k + 1));
    return true;
}

}  // namespace

IddSchema parse_idd(std::string_view source_text) {
    ParseState st;

    bool any_content = false;
    const auto lines = text::split_lines(source_text);
    for (const auto& raw : lines) {
        ++st.line_no;
        std::string line = trim(raw);
        if (line.empty()) continue;

        if (line[0] == '!') {
            any_content = true;
            // The conventional version stamp is a comment: !IDD_Version 23.1.0
            const std::string body = trim(line.substr(1));
            if (text::starts_with_ci(body, "IDD_Version")) st.schema.version = trim(body.substr(11));
            continue;
        }
        any_content = true;

        if (line[0] == '\\') {
            DirectiveLine d = split_directive(line);
            if (d.name == "group") continue;  // top-level section marker
            if (!st.current)
                throw IddError(IddErrorKind::DanglingDirective,
                               "directive \\" + d.name + " outside any class (line " +
                                   std::to_string(st.line_no) + ")");
            if (st.current_field) {
                FieldDef& f = *st.current_field;
                if (d.name == "field") {
                    f.name = d.arg;
                } else if (d.name == "required-field") {
                    f.required = true;
                } else if (d.name == "default") {
                    f.default_value = d.arg;
                } else if (d.name == "key") {
                    f.choices.push_back(d.arg);
                } else if (d.name == "type") {
                    f.kind = kind_from_type(d.arg);
                    st.saw_field_type = true;
                } else if (d.name == "minimum" || d.name == "minimum>") {
                    if (auto v = parse_double_arg(d.arg)) {
                        if (!f.bounds) f.bounds = Bounds{};
                        f.bounds->min = *v;
                        f.bounds->min_exclusive = d.name.back() == '>';
                    } else {
                        st.schema.warnings.push_back("unparseable \\minimum argument: " + line);
                        f.other_directives.push_back(line);
                    }
                } else if (d.name == "maximum" || d.name == "maximum<") {
                    if (auto v = parse_double_arg(d.arg)) {
                        if (!f.bounds) f.bounds = Bounds{};
                        f.bounds->max = *v;
                        f.bounds->max_exclusive = d.name.back() == '<';
                    } else {
                        st.schema.warnings.push_back("unparseable \\maximum argument: " + line);
                        f.other_directives.push_back(line);
                    }
                } else if (d.name == "units") {
                    f.units = d.arg;
                } else if (d.name == "object-list") {
                    f.referenced_lists.push_back(d.arg);
                } else if (d.name == "reference") {
                    f.reference_lists.push_back(d.arg);
                } else if (d.name == "autosizable") {
                    f.autosize_allowed = true;
                } else if (d.name == "autocalculatable") {
                    f.autocalculate_allowed = true;
                } else if (d.name == "note") {
                    f.notes.push_back(d.arg);
                } else if (is_object_level(d.name)) {
                    // Object-level directive trailing the field list.
                    if (d.name == "memo") st.current->memo.push_back(d.arg);
                    else if (d.name == "min-fields") {
                        if (auto v = parse_int_arg(d.arg)) st.current->min_fields = *v;
                        else st.current->other_directives.push_back(line);
                    } else if (d.name == "extensible") {
                        if (auto v = parse_int_arg(d.arg)) st.current->extensible_group = *v;
                        else st.current->other_directives.push_back(line);
                    } else st.current->other_directives.push_back(line);
                } else {
                    f.other_directives.push_back(line);
                }
            } else {
                ObjectDef& o = *st.current;
                if (d.name == "memo") {
                    o.memo.push_back(d.arg);
                } else if (d.name == "min-fields") {
                    if (auto v = parse_int_arg(d.arg)) o.min_fields = *v;
                    else o.other_directives.push_back(line);
                } else if (d.name == "extensible") {
                    if (auto v = parse_int_arg(d.arg)) o.extensible_group = *v;
                    else o.other_directives.push_back(line);
                } else if (is_object_level(d.name)) {
                    o.other_directives.push_back(line);
                } else if (d.name == "field" || d.name == "required-field" || d.name == "default" ||
                           d.name == "key" || d.name == "type" || d.name == "minimum" ||
                           d.name == "minimum>" || d.name == "maximum" || d.name == "maximum<" ||
                           d.name == "units" || d.name == "object-list" || d.name == "reference" ||
                           d.name == "autosizable" || d.name == "autocalculatable") {
                    throw IddError(IddErrorKind::DanglingDirective,
                                   "field directive \\" + d.name + " before any field in class \"" +
                                       o.class_name + "\" (line " + std::to_string(st.line_no) +
                                       ")");
                } else if (d.name == "note") {
                    o.memo.push_back(d.arg);
                } else {
                    o.other_directives.push_back(line);
                }
            }
            continue;
        }

        std::string id;
        char term = ',';
        std::string rest;
        if (st.current && looks_like_field_spec(line, id, term, rest)) {
            st.finish_field();
            FieldDef f;
            f.field_id = id;
            f.kind = (id[0] == 'N') ? FieldKind::Numeric : FieldKind::Alpha;
            st.current_field = std::move(f);
            if (!rest.empty() && rest[0] == '\\') {
                DirectiveLine d = split_directive(rest);
                if (d.name == "field") st.current_field->name = d.arg;
                else st.current_field->other_directives.push_back(rest);
            }
            continue;
        }

        // Class header: "Name," starts a field list; "Name;" is a complete
        // (field-less) marker object.
        const char last = line.back();
        if (last == ',' || last == ';') {
            st.finish_object();
            ObjectDef def;
            def.class_name = trim(line.substr(0, line.size() - 1));
            if (def.class_name.empty())
                throw IddError(IddErrorKind::MalformedHeader,
                               "empty class name (line " + std::to_string(st.line_no) + ")");
            st.current = std::move(def);
            st.current_is_marker = (last == ';');
            if (last == ';') st.finish_object();
            continue;
        }

        throw IddError(IddErrorKind::MalformedHeader,
                       "expected class header terminated by ',' at line " +
                           std::to_string(st.line_no) + ": \"" + line + "\"");
    }

    if (!any_content)
        throw IddError(IddErrorKind::EmptyInput, "empty IDD input");

    st.finish_object();

    // Build the object-list registry from \reference directives.
    for (const auto& [key, def] : st.schema.defs) {
        (void)key;
        for (const auto& f : def.fields) {
            for (const auto& list : f.reference_lists) {
                st.schema.object_lists[list].push_back(ObjectListEntry{def.class_name, f.ordinal});
            }
        }
    }
    for (const auto& [key, def] : st.schema.defs) {
        (void)key;
        for (const auto& f : def.fields) {
            for (const auto& list : f.referenced_lists) {
                if (st.schema.object_lists.find(list) == st.schema.object_lists.end()) {
                    if (std::find(st.schema.unresolved_lists.begin(),
                                  st.schema.unresolved_lists.end(),
                                  list) == st.schema.unresolved_lists.end())
                        st.schema.unresolved_lists.push_back(list);
                }
            }
        }
    }
    return st.schema;
}

const ObjectDef& object_def(const IddSchema& schema, std::string_view class_name) {
    const ObjectDef* def = schema.find(class_name);
    if (def) return *def;
    std::string best;
    std::size_t best_dist = std::numeric_limits<std::size_t>::max();
    for (const auto& [key, d] : schema.defs) {
        (void)key;
        const std::size_t dist = text::edit_distance(class_name, d.class_name);
        if (dist < best_dist) {
            best_dist = dist;
            best = d.class_name;
        }
    }
    throw UnknownClassError(std::string(class_name), best);
}

namespace {

void append_field_directives(std::ostringstream& out, const FieldDef& f, const char* pad) {
    if (f.required) out << pad << "\\required-field\n";
    switch (f.kind) {
        case FieldKind::Alpha: out << pad << "\\type alpha\n"; break;
        case FieldKind::Numeric: out << pad << "\\type real\n"; break;
        case FieldKind::Integer: out << pad << "\\type integer\n"; break;
        case FieldKind::Choice: out << pad << "\\type choice\n"; break;
        case FieldKind::ObjectListRef: out << pad << "\\type object-list\n"; break;
        case FieldKind::Node: out << pad << "\\type node\n"; break;
    }
    for (const auto& k : f.choices) out << pad << "\\key " << k << "\n";
    if (f.default_value) out << pad << "\\default " << *f.default_value << "\n";
    if (f.bounds) {
        if (f.bounds->min)
            out << pad << (f.bounds->min_exclusive ? "\\minimum> " : "\\minimum ")
                << text::format_double(*f.bounds->min) << "\n";
        if (f.bounds->max)
            out << pad << (f.bounds->max_exclusive ? "\\maximum< " : "\\maximum ")
                << text::format_double(*f.bounds->max) << "\n";
    }
    if (f.units) out << pad << "\\units " << *f.units << "\n";
    if (f.autosize_allowed) out << pad << "\\autosizable\n";
    if (f.autocalculate_allowed) out << pad << "\\autocalculatable\n";
    for (const auto& l : f.referenced_lists) out << pad << "\\object-list " << l << "\n";
    for (const auto& l : f.reference_lists) out << pad << "\\reference " << l << "\n";
    for (const auto& n : f.notes) out << pad << "\\note " << n << "\n";
    for (const auto& o : f.other_directives) out << pad << o << "\n";
}

}  // namespace

std::string serialize_object_def(const ObjectDef& def) {
    std::ostringstream out;
    out << def.class_name << ",\n";
    const char* opad = "      ";
    const char* fpad = "       ";
    for (const auto& m : def.memo) out << opad << "\\memo " << m << "\n";
    if (def.min_fields > 0) out << opad << "\\min-fields " << def.min_fields << "\n";
    if (def.extensible_group) out << opad << "\\extensible:" << *def.extensible_group << "\n";
    for (const auto& o : def.other_directives) out << opad << o << "\n";
    for (std::size_t i = 0; i < def.fields.size(); ++i) {
        const FieldDef& f = def.fields[i];
        const bool last = (i + 1 == def.fields.size());
        std::string id = f.field_id.empty()
                             ? std::string(f.kind == FieldKind::Numeric || f.kind == FieldKind::Integer
                                               ? "N"
                                               : "A") +
                                   std::to_string(f.ordinal)
                             : f.field_id;
        out << "  " << id;
        if (id.size() < 3) out << std::string(3 - id.size(), ' ');
        out << (last ? "; " : ", ") << "\\field " << f.name << "\n";
        append_field_directives(out, f, fpad);
    }
    return out.str();
}

std::string idd_excerpt(const IddSchema& schema, std::string_view class_name) {
    return serialize_object_def(object_def(schema, class_name));
}

}  // namespace bemflow::idd
