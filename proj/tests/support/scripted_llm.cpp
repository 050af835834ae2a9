#include "scripted_llm.hpp"

#include <sstream>
#include <stdexcept>

#include "bemflow/idf_core.hpp"
#include "bemflow/text_util.hpp"

namespace bemflow::testsupport {

namespace {

std::string quoted_after(const std::string& text, const std::string& marker) {
    const std::size_t pos = text.find(marker);
    if (pos == std::string::npos) return {};
    const std::size_t open = text.find('"', pos + marker.size());
    if (open == std::string::npos) return {};
    const std::size_t close = text.find('"', open + 1);
    if (close == std::string::npos) return {};
    return text.substr(open + 1, close - open - 1);
}

}  // namespace

std::string forged_object_text(const idd::IddSchema& schema, const std::string& class_name,
                               const Assignments& assignments,
                               forge::PlaceholderSource& placeholders) {
    const forge::GenerationSpec spec =
        forge::GenerationSpec::checked(schema, class_name, assignments);
    const forge::ForgeResult result = forge::forge_object(schema, spec, placeholders);
    idf::IdfDocument doc;
    doc.objects.push_back(result.object);
    return idf::serialize(doc);
}

std::string ScriptedLlm::generation_response(const std::string& class_name,
                                             const std::string& object_name, bool retry) {
    const auto key = std::make_pair(class_name, object_name);

    if (!retry) {
        auto bad = scenario_.bad_first_generation.find(key);
        if (bad != scenario_.bad_first_generation.end()) return bad->second;
    }

    auto raw = scenario_.raw_responses.find(key);
    if (raw != scenario_.raw_responses.end()) return raw->second;

    auto it = scenario_.generation.find(key);
    if (it == scenario_.generation.end())
        throw std::runtime_error("scripted scenario has no generation entry for (" + class_name +
                                 ", " + object_name + ")");

    const forge::GenerationSpec spec =
        forge::GenerationSpec::checked(*schema_, class_name, it->second);
    const forge::ForgeResult result = forge::forge_object(*schema_, spec, placeholders_);
    idf::IdfDocument doc;
    doc.objects.push_back(result.object);

    std::ostringstream out;
    out << "Here is the generated \"" << class_name << "\" object:\n\n";
    out << idf::serialize(doc) << "\n";
    out << "Here's a summary:\n" << forge::summary_text(result.report);
    if (!scenario_.salt.empty()) out << "\n(session " << scenario_.salt << ")\n";
    return out.str();
}

std::string ScriptedLlm::repair_response(const std::string& digest_text) {
    // The digest lines start with Class="Name"; collect unique pairs in order.
    std::vector<std::pair<std::string, std::string>> targets;
    std::size_t pos = 0;
    while (pos < digest_text.size()) {
        const std::size_t eq = digest_text.find("=\"", pos);
        if (eq == std::string::npos) break;
        std::size_t start = eq;
        while (start > 0) {
            const char c = digest_text[start - 1];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == ':' || c == '_') --start;
            else break;
        }
        const std::size_t close = digest_text.find('"', eq + 2);
        if (close == std::string::npos) break;
        const std::string cls = digest_text.substr(start, eq - start);
        const std::string name = digest_text.substr(eq + 2, close - eq - 2);
        const auto pair = std::make_pair(cls, name);
        if (scenario_.corrections.count(pair)) {
            bool seen = false;
            for (const auto& t : targets)
                if (t == pair) seen = true;
            if (!seen) targets.push_back(pair);
        }
        pos = close + 1;
    }
    if (targets.empty())
        throw std::runtime_error("scripted repair found no correctable objects in digest:\n" +
                                 digest_text);

    std::ostringstream objects;
    for (const auto& [cls, name] : targets) {
        objects << forged_object_text(*schema_, cls, scenario_.corrections.at({cls, name}),
                                      placeholders_)
                << "\n";
    }
    std::ostringstream out;
    out << "``\n" << objects.str() << "``\n";
    out << "//[";
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (i) out << ", ";
        out << "('" << targets[i].first << "', '" << targets[i].second << "')";
    }
    out << "]//\n";
    if (!scenario_.salt.empty()) out << "(session " << scenario_.salt << ")\n";
    return out.str();
}

std::string ScriptedLlm::complete(const llm::ChatRequest& request) {
    const std::string& p = request.prompt;

    if (p.find("process user description of their building") != std::string::npos) {
        if (scenario_.extraction_response.empty())
            throw std::runtime_error("scripted scenario has no extraction response");
        return scenario_.extraction_response;
    }

    if (p.find("You are the Central LLM Agent") != std::string::npos) {
        if (scenario_.central_response.empty())
            throw std::runtime_error("scripted scenario has no central response");
        return scenario_.central_response;
    }

    if (p.find("The following is the fatal or severe error message:") != std::string::npos) {
        const bool retry = p.find("The previous response could not be used") != std::string::npos;
        if (!retry && !scenario_.bad_first_repair_response.empty())
            return scenario_.bad_first_repair_response;
        const std::size_t open = p.find("``");
        const std::size_t close = p.find("``", open + 2);
        return repair_response(p.substr(open + 2, close - open - 2));
    }

    if (p.find("automatically generate text-based idf objects") != std::string::npos) {
        const std::string class_name = quoted_after(p, "a certain type of object called ");
        const bool retry =
            p.find("The previously generated object violated these rules:") != std::string::npos;

        if (p.find("Here is the current object:") != std::string::npos) {
            // Modify-path task: the object name is the first value of the
            // embedded object text.
            const std::size_t marker = p.find("Here is the current object:");
            const std::size_t head = p.find(class_name + ",", marker);
            std::string name;
            if (head != std::string::npos) {
                std::size_t cursor = head + class_name.size() + 1;
                const std::size_t value_end = p.find_first_of(",;!", cursor);
                name = text::trim(p.substr(cursor, value_end - cursor));
            }
            return generation_response(class_name, name, retry);
        }

        const std::string name = quoted_after(p, " object named ");
        return generation_response(class_name, name, retry);
    }

    throw std::runtime_error("scripted backend got an unrecognized prompt (tag " +
                             request.request_tag + ")");
}

}  // namespace bemflow::testsupport
