#include "bemflow/agents.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "bemflow/text_util.hpp"

namespace bemflow::agents {

using text::normalize_key;
using text::trim;

namespace {

std::string substitute(std::string templ, std::string_view key, std::string_view value) {
    const std::string needle = "{" + std::string(key) + "}";
    std::size_t pos = 0;
    while ((pos = templ.find(needle, pos)) != std::string::npos) {
        templ.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return templ;
}

std::string class_from_excerpt(std::string_view excerpt) {
    // The excerpt's first line is "ClassName,".
    const auto lines = text::split_lines(excerpt);
    for (const auto& line : lines) {
        std::string t = trim(line);
        if (t.empty()) continue;
        if (!t.empty() && (t.back() == ',' || t.back() == ';')) t.pop_back();
        return trim(t);
    }
    return std::string();
}

}  // namespace

std::string render_generation_prompt(std::string_view idd_excerpt, std::string_view user_request,
                                     const TemplateSet& templates) {
    if (trim(idd_excerpt).empty())
        throw AgentError(AgentErrorKind::EmptyExcerpt, "generation prompt requires an IDD excerpt");
    if (trim(user_request).empty())
        throw AgentError(AgentErrorKind::EmptyRequest, "generation prompt requires a user request");
    std::string out = templates.generation;
    out = substitute(std::move(out), "object_class", class_from_excerpt(idd_excerpt));
    out = substitute(std::move(out), "user_request", user_request);
    std::string excerpt(idd_excerpt);
    while (!excerpt.empty() && excerpt.back() == '\n') excerpt.pop_back();
    out = substitute(std::move(out), "idd_excerpt", excerpt);
    return out;
}

std::string render_extraction_prompt(std::string_view description,
                                     const std::vector<std::string>& common_object_list,
                                     const TemplateSet& templates) {
    if (trim(description).empty())
        throw AgentError(AgentErrorKind::EmptyDescription,
                         "extraction prompt requires a building description");
    std::string list_text;
    if (common_object_list.empty()) {
        list_text = "(unrestricted)";
    } else {
        for (std::size_t i = 0; i < common_object_list.size(); ++i) {
            if (i) list_text += ", ";
            list_text += common_object_list[i];
        }
    }
    std::string out = templates.extraction;
    out = substitute(std::move(out), "user_description", description);
    out = substitute(std::move(out), "common_internal_load_object_list", list_text);
    return out;
}

std::string render_repair_prompt(std::string_view severe_and_fatal, std::string_view current_idf,
                                 const TemplateSet& templates) {
    if (trim(severe_and_fatal).empty())
        throw AgentError(AgentErrorKind::EmptyErrors, "repair prompt requires error text");
    if (trim(current_idf).empty())
        throw AgentError(AgentErrorKind::EmptyIdf, "repair prompt requires the current IDF text");
    std::string out = templates.repair;
    out = substitute(std::move(out), "severe_n_fatal_error_str", severe_and_fatal);
    out = substitute(std::move(out), "current_IDF_file_str", current_idf);
    return out;
}

std::string render_central_prompt(std::string_view user_request, const TemplateSet& templates) {
    if (trim(user_request).empty())
        throw AgentError(AgentErrorKind::EmptyRequest, "central prompt requires a user request");
    return substitute(templates.central, "user_request", user_request);
}

namespace {

// --- tuple-keyed map parsing -------------------------------------------------
//
// Responses carry a Python-dict-like block:
//   { ('Type', 'Name'): 'description', ... }
// Quotes may be single or double. Values run to the closing quote; embedded
// quotes of the other kind are fine.

struct Cursor {
    std::string_view s;
    std::size_t pos = 0;

    bool eof() const { return pos >= s.size(); }
    char peek() const { return s[pos]; }
    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
        skip_ws();
        if (!eof() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
};

bool parse_quoted(Cursor& c, std::string& out) {
    c.skip_ws();
    if (c.eof()) return false;
    const char quote = c.peek();
    if (quote != '\'' && quote != '"') return false;
    ++c.pos;
    out.clear();
    while (!c.eof()) {
        const char ch = c.s[c.pos];
        if (ch == '\\' && c.pos + 1 < c.s.size() &&
            (c.s[c.pos + 1] == quote || c.s[c.pos + 1] == '\\')) {
            out.push_back(c.s[c.pos + 1]);
            c.pos += 2;
            continue;
        }
        if (ch == quote) {
            ++c.pos;
            return true;
        }
        out.push_back(ch);
        ++c.pos;
    }
    return false;
}

struct RawRow {
    std::string type;
    std::string name;
    std::string value;
};

// Parses one "('T', 'N'): 'V'" row; on failure scans forward to the next
// plausible row start so later rows still parse.
bool parse_row(Cursor& c, RawRow& row, std::string& error) {
    c.skip_ws();
    if (!c.accept('(') ) {
        error = "expected '(' at start of key tuple";
        return false;
    }
    if (!parse_quoted(c, row.type)) {
        error = "unreadable object type in key tuple";
        return false;
    }
    if (!c.accept(',')) {
        error = "expected ',' inside key tuple";
        return false;
    }
    if (!parse_quoted(c, row.name)) {
        error = "unreadable object name in key tuple";
        return false;
    }
    if (!c.accept(')')) {
        error = "expected ')' closing key tuple";
        return false;
    }
    if (!c.accept(':')) {
        error = "expected ':' after key tuple";
        return false;
    }
    if (!parse_quoted(c, row.value)) {
        error = "unreadable description value";
        return false;
    }
    return true;
}

std::vector<RawRow> parse_tuple_map(std::string_view response, std::vector<std::string>& rejects,
                                    bool& found_block) {
    std::vector<RawRow> rows;
    found_block = false;
    std::size_t search = 0;
    while (search < response.size()) {
        const std::size_t open = response.find('{', search);
        if (open == std::string_view::npos) break;
        Cursor c{response, open + 1};
        std::vector<RawRow> block_rows;
        std::vector<std::string> block_rejects;
        bool closed = false;
        bool saw_content = false;
        while (true) {
            c.skip_ws();
            if (c.eof()) break;
            if (c.peek() == '}') {
                ++c.pos;
                closed = true;
                break;
            }
            if (c.peek() == ',') {
                ++c.pos;
                continue;
            }
            saw_content = true;
            RawRow row;
            std::string error;
            const std::size_t row_start = c.pos;
            if (parse_row(c, row, error)) {
                block_rows.push_back(std::move(row));
            } else {
                // Resync: jump to the next '(' or '}' after the failure point.
                std::size_t next = response.find_first_of("(}", std::max(c.pos, row_start + 1));
                if (next == std::string_view::npos) break;
                block_rejects.push_back(error);
                c.pos = next;
            }
        }
        // A well-formed block either has rows or is explicitly empty:
        // "{ }" means the agent found nothing to do.
        if (closed && (!block_rows.empty() || !saw_content)) {
            found_block = true;
            rejects.insert(rejects.end(), block_rejects.begin(), block_rejects.end());
            return block_rows;
        }
        search = open + 1;
    }
    return rows;
}

}  // namespace

ExtractionParse parse_extraction(std::string_view response,
                                 const std::vector<std::string>& allowed_types) {
    ExtractionParse result;
    bool found_block = false;
    const auto rows = parse_tuple_map(response, result.rejected, found_block);
    if (!found_block)
        throw AgentError(AgentErrorKind::NoTableFound,
                         "no (object type, object name) map found in response");
    for (const auto& row : rows) {
        if (text::iequals(row.type, row.name)) {
            result.rejected.push_back("row (" + row.type + ", " + row.name +
                                      "): object name cannot be the same as object type");
            continue;
        }
        if (!allowed_types.empty()) {
            const bool allowed = std::any_of(
                allowed_types.begin(), allowed_types.end(),
                [&](const std::string& t) { return text::iequals(t, row.type); });
            if (!allowed) {
                result.rejected.push_back("row (" + row.type + ", " + row.name +
                                          "): object type not in the common object list");
                continue;
            }
        }
        result.items.push_back(ExtractionItem{row.type, row.name, row.value});
    }
    if (result.items.empty() && !result.rejected.empty())
        throw AgentError(AgentErrorKind::AllRowsInvalid, "every row of the map was rejected");
    return result;
}

std::vector<PlanEntry> parse_central_plan(std::string_view response) {
    std::vector<std::string> rejects;
    bool found_block = false;
    const auto rows = parse_tuple_map(response, rejects, found_block);
    if (!found_block || (rows.empty() && !rejects.empty()))
        throw AgentError(AgentErrorKind::NoPlanFound, "no plan map found in central response");
    std::vector<PlanEntry> plan;
    plan.reserve(rows.size());
    for (const auto& row : rows) plan.push_back(PlanEntry{row.type, row.name, row.value});
    return plan;
}

namespace {

// First "``...``" region that is not a triple-backtick fence.
bool find_double_backtick_block(std::string_view s, std::size_t& begin, std::size_t& end) {
    std::size_t pos = 0;
    while (pos + 1 < s.size()) {
        pos = s.find("``", pos);
        if (pos == std::string_view::npos) return false;
        if (pos + 2 < s.size() && s[pos + 2] == '`') {
            pos = s.find_first_not_of('`', pos);
            if (pos == std::string_view::npos) return false;
            continue;
        }
        std::size_t close = s.find("``", pos + 2);
        if (close == std::string_view::npos) return false;
        begin = pos + 2;
        end = close;
        return true;
    }
    return false;
}

}  // namespace

RepairSet parse_repair(std::string_view response) {
    std::size_t begin = 0;
    std::size_t end = 0;
    if (!find_double_backtick_block(response, begin, end))
        throw AgentError(AgentErrorKind::MissingObjectBlock,
                         "no ``...`` object block in repair response");
    const std::string object_text(response.substr(begin, end - begin));

    const std::size_t tuples_open = response.find("//[");
    const std::size_t tuples_close =
        tuples_open == std::string_view::npos ? std::string_view::npos
                                              : response.find("]//", tuples_open + 3);
    if (tuples_open == std::string_view::npos || tuples_close == std::string_view::npos)
        throw AgentError(AgentErrorKind::MissingTupleBlock,
                         "no //[ ]// tuple block in repair response");
    std::string_view tuple_text =
        response.substr(tuples_open + 3, tuples_close - tuples_open - 3);

    RepairSet set;
    idf::IdfDocument parsed = idf::parse_idf(object_text);
    set.corrected_objects = std::move(parsed.objects);

    Cursor c{tuple_text, 0};
    while (true) {
        c.skip_ws();
        if (c.eof()) break;
        if (c.peek() == ',') {
            ++c.pos;
            continue;
        }
        if (!c.accept('(')) break;
        std::string type;
        std::string name;
        if (!parse_quoted(c, type)) break;
        if (!c.accept(',')) break;
        if (!parse_quoted(c, name)) break;
        if (!c.accept(')')) break;
        set.targets.emplace_back(std::move(type), std::move(name));
    }
    if (set.targets.empty())
        throw AgentError(AgentErrorKind::MissingTupleBlock,
                         "tuple block contains no ('type', 'name') entries");

    if (set.corrected_objects.size() > 10 || set.targets.size() > 10)
        throw AgentError(AgentErrorKind::CountExceeded,
                         "repair exceeds the 10-object contract (" +
                             std::to_string(set.corrected_objects.size()) + " objects, " +
                             std::to_string(set.targets.size()) + " tuples)");

    // Every target corresponds to exactly one corrected object, and no
    // corrected object is unaccounted for.
    auto key_of = [](std::string_view cls, std::string_view name) {
        return normalize_key(cls) + "\x1f" + normalize_key(name);
    };
    std::vector<std::string> object_keys;
    for (const auto& obj : set.corrected_objects)
        object_keys.push_back(key_of(obj.class_name, obj.name_or_empty()));
    std::vector<std::string> target_keys;
    for (const auto& [cls, name] : set.targets) target_keys.push_back(key_of(cls, name));
    auto sorted = [](std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    if (sorted(object_keys) != sorted(target_keys))
        throw AgentError(AgentErrorKind::TupleObjectMismatch,
                         "corrected objects and tuple list do not correspond one-to-one");
    return set;
}

std::vector<idf::IdfObject> extract_objects(std::string_view response,
                                            std::string_view expected_class) {
    std::vector<idf::IdfObject> objects;

    // Fenced blocks first.
    std::size_t pos = 0;
    bool any_fence = false;
    while (true) {
        const std::size_t open = response.find("```", pos);
        if (open == std::string_view::npos) break;
        std::size_t body = open + 3;
        // Skip an info string on the fence line.
        const std::size_t nl = response.find('\n', body);
        if (nl != std::string_view::npos) body = nl + 1;
        const std::size_t close = response.find("```", body);
        if (close == std::string_view::npos) break;
        any_fence = true;
        const std::string block(response.substr(body, close - body));
        try {
            idf::IdfDocument doc = idf::parse_idf(block);
            for (auto& obj : doc.objects) objects.push_back(std::move(obj));
        } catch (const idf::IdfError&) {
            // Not object text (e.g. a quoted excerpt); ignore this block.
        }
        pos = close + 3;
    }
    if (any_fence && !objects.empty()) return objects;

    // Fall back to a class-anchored scan: from the first line that starts
    // with the expected class followed by ',' to the closing ';'.
    if (!expected_class.empty()) {
        const std::string needle = std::string(expected_class);
        std::size_t search = 0;
        while (search < response.size()) {
            const std::size_t hit = response.find(needle, search);
            if (hit == std::string_view::npos) break;
            const std::size_t line_start = response.rfind('\n', hit);
            const std::string_view prefix =
                response.substr(line_start == std::string_view::npos ? 0 : line_start + 1,
                                hit - (line_start == std::string_view::npos ? 0 : line_start + 1));
            std::size_t after = hit + needle.size();
            while (after < response.size() &&
                   std::isspace(static_cast<unsigned char>(response[after])))
                ++after;
            if (trim(prefix).empty() && after < response.size() && response[after] == ',') {
                const std::size_t terminator = response.find(';', hit);
                if (terminator == std::string_view::npos) break;
                const std::string block(response.substr(hit, terminator - hit + 1));
                try {
                    idf::IdfDocument doc = idf::parse_idf(block);
                    for (auto& obj : doc.objects) objects.push_back(std::move(obj));
                    return objects;
                } catch (const idf::IdfError&) {
                }
            }
            search = hit + needle.size();
        }
    }
    return objects;
}

}  // namespace bemflow::agents
