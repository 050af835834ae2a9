#include "bemflow/idf_core.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "bemflow/text_util.hpp"

namespace bemflow::idf {

using text::normalize_key;
using text::trim;

FieldValue FieldValue::literal(std::string value) {
    // Commas, semicolons, and '!' are structural; a literal carrying one
    // would change meaning on serialization.
    if (value.find_first_of(",;!") != std::string::npos)
        throw IdfError(IdfErrorKind::StrayText,
                       "field value contains a structural character: \"" + value + "\"");
    FieldValue v;
    v.kind = Kind::Literal;
    v.text = std::move(value);
    return v;
}

FieldValue FieldValue::placeholder(std::string token) {
    FieldValue v;
    v.kind = Kind::Placeholder;
    v.text = std::move(token);
    return v;
}

bool FieldValue::is_placeholder_token(std::string_view s) {
    if (s.size() != 13) return false;
    if (s[0] != 'T' || s[1] != 'B' || s[2] != 'D') return false;
    for (std::size_t i = 3; i < 13; ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

FieldValue FieldValue::classify(std::string value) {
    if (value.empty()) return blank();
    if (is_placeholder_token(value)) return placeholder(std::move(value));
    return literal(std::move(value));
}

std::string IdfObject::name_or_empty() const {
    if (values.empty()) return std::string();
    const FieldValue& first = values.front();
    return first.kind == FieldValue::Kind::Blank ? std::string() : first.text;
}

std::vector<std::size_t> IdfDocument::find(std::string_view class_name,
                                           std::string_view object_name) const {
    std::vector<std::size_t> hits;
    const std::string class_key = normalize_key(class_name);
    const std::string name_key = normalize_key(object_name);
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (normalize_key(objects[i].class_name) != class_key) continue;
        if (!name_key.empty() && normalize_key(objects[i].name_or_empty()) != name_key) continue;
        hits.push_back(i);
    }
    return hits;
}

IdfDocument parse_idf(std::string_view source_text) {
    IdfDocument doc;

    IdfObject current;
    bool in_object = false;
    bool have_class = false;
    std::string token;
    bool token_has_content = false;
    int line_no = 1;
    int object_start_line = 0;
    int last_close_line = -1;  // line of the most recent ';', for trailing comments

    auto flush_value = [&](bool is_class_position) {
        // Values may wrap across lines; internal whitespace runs collapse
        // to single spaces, matching how the simulator reads them.
        std::string value = text::collapse_whitespace(token);
        token.clear();
        token_has_content = false;
        if (is_class_position) {
            if (value.empty())
                throw IdfError(IdfErrorKind::StrayText,
                               "object with empty class name at line " + std::to_string(line_no));
            current.class_name = value;
        } else {
            current.values.push_back(FieldValue::classify(std::move(value)));
        }
    };

    std::size_t i = 0;
    const std::size_t n = source_text.size();
    while (i < n) {
        const char c = source_text[i];
        if (c == '\r') {
            ++i;
            continue;
        }
        if (c == '\n') {
            ++line_no;
            ++i;
            continue;
        }
        if (c == '!') {
            // Comment runs to end of line.
            std::size_t eol = source_text.find('\n', i);
            std::string body(source_text.substr(i + 1, (eol == std::string_view::npos
                                                            ? n
                                                            : eol) - i - 1));
            // field annotations conventionally start with '-'
            std::string cleaned = trim(body);
            if (!cleaned.empty() && cleaned[0] == '-') cleaned = trim(cleaned.substr(1));
            if (in_object) {
                if (!current.values.empty()) {
                    std::string& target = current.values.back().comment;
                    if (target.empty()) target = cleaned;
                    else target += " " + cleaned;
                }
                // A comment before the first value of an open object is
                // dropped; nothing meaningful attaches to the class token.
            } else if (line_no == last_close_line && !doc.objects.empty() &&
                       !doc.objects.back().values.empty()) {
                // "value;  !- Field Name" — the annotation of the final field.
                std::string& target = doc.objects.back().values.back().comment;
                if (target.empty()) target = cleaned;
                else target += " " + cleaned;
            } else {
                doc.leading_comments.push_back(cleaned);
            }
            i = (eol == std::string_view::npos) ? n : eol;
            continue;
        }
        if (c == ',') {
            if (!in_object) {
                in_object = true;
                have_class = false;
                object_start_line = line_no;
                current = IdfObject{};
                flush_value(true);
                have_class = true;
            } else {
                flush_value(!have_class);
                have_class = true;
            }
            ++i;
            continue;
        }
        if (c == ';') {
            if (!in_object) {
                // "Class;" — an object with a class token and no fields.
                std::string value = text::collapse_whitespace(token);
                token.clear();
                token_has_content = false;
                if (value.empty()) {
                    throw IdfError(IdfErrorKind::StrayText,
                                   "stray ';' with no object at line " + std::to_string(line_no));
                }
                current = IdfObject{};
                current.class_name = value;
                current.source_span = {line_no, line_no};
                doc.objects.push_back(std::move(current));
                current = IdfObject{};
                last_close_line = line_no;
            } else {
                flush_value(!have_class);
                current.source_span = {object_start_line, line_no};
                doc.objects.push_back(std::move(current));
                current = IdfObject{};
                in_object = false;
                have_class = false;
                last_close_line = line_no;
            }
            ++i;
            continue;
        }
        token.push_back(c);
        if (!std::isspace(static_cast<unsigned char>(c))) token_has_content = true;
        ++i;
    }

    if (in_object)
        throw IdfError(IdfErrorKind::UnterminatedObject,
                       "object \"" + current.class_name + "\" starting at line " +
                           std::to_string(object_start_line) + " has no terminating ';'");
    if (token_has_content)
        throw IdfError(IdfErrorKind::StrayText,
                       "stray text outside any object near line " + std::to_string(line_no) +
                           ": \"" + trim(token) + "\"");
    return doc;
}

namespace {

constexpr std::size_t kCommentColumn = 30;

void serialize_object_impl(std::ostringstream& out, const IdfObject& obj,
                           const idd::IddSchema* schema) {
    const idd::ObjectDef* def = schema ? schema->find(obj.class_name) : nullptr;
    if (obj.values.empty()) {
        out << obj.class_name << ";\n";
        return;
    }
    out << obj.class_name << ",\n";
    for (std::size_t i = 0; i < obj.values.size(); ++i) {
        const FieldValue& v = obj.values[i];
        const bool last = (i + 1 == obj.values.size());
        std::string line = "  " + (v.is_blank() ? std::string() : v.text) + (last ? ";" : ",");
        std::string comment = v.comment;
        if (def) {
            std::string canonical = def->display_name_at(static_cast<int>(i) + 1);
            if (!canonical.empty()) comment = canonical;
        }
        if (!comment.empty()) {
            if (line.size() + 2 < kCommentColumn)
                line.append(kCommentColumn - line.size(), ' ');
            else
                line.push_back(' ');
            line += "!- " + comment;
        }
        out << line << "\n";
    }
}

std::string serialize_impl(const IdfDocument& doc, const idd::IddSchema* schema) {
    std::ostringstream out;
    for (const auto& c : doc.leading_comments) out << "! " << c << "\n";
    if (!doc.leading_comments.empty()) out << "\n";
    for (std::size_t i = 0; i < doc.objects.size(); ++i) {
        serialize_object_impl(out, doc.objects[i], schema);
        if (i + 1 < doc.objects.size()) out << "\n";
    }
    return out.str();
}

}  // namespace

std::string serialize(const IdfDocument& doc) { return serialize_impl(doc, nullptr); }

std::string serialize(const IdfDocument& doc, const idd::IddSchema& schema) {
    return serialize_impl(doc, &schema);
}

std::string serialize_object(const IdfObject& object) {
    std::ostringstream out;
    serialize_object_impl(out, object, nullptr);
    return out.str();
}

std::string serialize_object(const IdfObject& object, const idd::IddSchema& schema) {
    std::ostringstream out;
    serialize_object_impl(out, object, &schema);
    return out.str();
}

MergeResult merge(IdfDocument base, std::vector<IdfObject> additions) {
    MergeResult result;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& obj : base.objects)
        seen.insert({normalize_key(obj.class_name), normalize_key(obj.name_or_empty())});
    for (auto& obj : additions) {
        auto key = std::make_pair(normalize_key(obj.class_name), normalize_key(obj.name_or_empty()));
        if (!seen.insert(key).second) {
            result.warnings.push_back("duplicate object (" + obj.class_name + ", " +
                                      obj.name_or_empty() + ") kept; repair loop resolves");
        }
        base.objects.push_back(std::move(obj));
    }
    result.document = std::move(base);
    return result;
}

IdfDocument replace_objects(const IdfDocument& doc, const std::vector<Repair>& repairs) {
    IdfDocument out = doc;
    for (const auto& r : repairs) {
        std::vector<std::size_t> hits = out.find(r.class_name, r.object_name);
        if (hits.empty() && r.object_name.empty()) hits = out.find(r.class_name);
        if (hits.empty())
            throw IdfError(IdfErrorKind::TargetNotFound,
                           "no object (" + r.class_name + ", " + r.object_name + ") in document");
        if (hits.size() > 1)
            throw IdfError(IdfErrorKind::AmbiguousTarget,
                           "multiple objects match (" + r.class_name + ", " + r.object_name + ")");
        out.objects[hits.front()] = r.replacement;
    }
    return out;
}

ReferenceAudit reference_audit(const IdfDocument& doc, const idd::IddSchema& schema) {
    ReferenceAudit audit;

    // Registry: object-list name -> set of registered member names.
    std::map<std::string, std::set<std::string>> registry;
    std::set<std::string> missing_classes;
    for (const auto& obj : doc.objects) {
        const idd::ObjectDef* def = schema.find(obj.class_name);
        if (!def) {
            missing_classes.insert(obj.class_name);
            continue;
        }
        for (std::size_t i = 0; i < obj.values.size(); ++i) {
            const idd::FieldDef* f = def->field_at(static_cast<int>(i) + 1);
            if (!f || f->reference_lists.empty()) continue;
            const FieldValue& v = obj.values[i];
            if (v.kind != FieldValue::Kind::Literal) continue;
            for (const auto& list : f->reference_lists)
                registry[list].insert(normalize_key(v.text));
        }
    }
    for (const auto& cls : missing_classes)
        audit.warnings.push_back("class \"" + cls + "\" not in schema; skipped");

    for (std::size_t idx = 0; idx < doc.objects.size(); ++idx) {
        const IdfObject& obj = doc.objects[idx];
        const idd::ObjectDef* def = schema.find(obj.class_name);
        if (!def) continue;
        for (std::size_t i = 0; i < obj.values.size(); ++i) {
            const idd::FieldDef* f = def->field_at(static_cast<int>(i) + 1);
            if (!f) continue;
            const FieldValue& v = obj.values[i];
            if (v.kind == FieldValue::Kind::Placeholder) {
                audit.placeholders.push_back(
                    PlaceholderEntry{idx, static_cast<int>(i) + 1, v.text});
                continue;
            }
            if (f->kind != idd::FieldKind::ObjectListRef || f->referenced_lists.empty()) continue;
            if (v.kind != FieldValue::Kind::Literal) continue;
            const std::string name_key = normalize_key(v.text);
            bool found = false;
            for (const auto& list : f->referenced_lists) {
                auto it = registry.find(list);
                if (it != registry.end() && it->second.count(name_key)) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                std::string expected;
                for (const auto& list : f->referenced_lists) {
                    if (!expected.empty()) expected += "|";
                    expected += list;
                }
                audit.dangling.push_back(DanglingReference{idx, static_cast<int>(i) + 1, v.text,
                                                           std::move(expected)});
            }
        }
    }
    return audit;
}

}  // namespace bemflow::idf
