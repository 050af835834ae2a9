#include <filesystem>
#include <fstream>
#include <sstream>

#include "bemflow/agents.hpp"

namespace bemflow::agents {

namespace {

const char* kGenerationTemplate =
    R"(Set the temperature to 0
The user wants to automatically generate text-based idf objects for EnergyPlus Simulation. The
format of a certain type of object called "{object_class}" is provided in triple back-ticks.
Here is the users' prompt below:
"{user_request}"
Some general rules when generating the object:
- If the field is not mandatory and is not defined by the user, please do not put a value in the
field.
- If the field is mandatory but not defined by the user, please set it to "TBD" + a 10-digit random
number
- Even though some fields are optional or not defined by the user, keep them in the object
definition.
- In the object generated, comment after "!" for each field about why the value is set or is left
blank
- If the rules above conflict with the users' prompt, prioritize the rules here and inform the user
there is a conflict
In the end after the object is generated, tell the user:
- Which fields are set by user
- Which fields are mandatory but not defined
- Which fields are set to their default values
- Which fields are left blank

```
{idd_excerpt}
```
)";

const char* kExtractionTemplate =
    R"(I want to process user description of their building to create a dictionary about 1) material and construction, 2) internal load (people, lights, electric equipment, infiltration), and 3) HVAC system. The dictionary's keys are the EnergyPlus IDF object type and its name to be created in tuple format (object type in str, object name in str, object name cannot be the same as object type), and the values to be detailed description or requirement of the IDF object, in string format.

Only generate object type mentioned in commonly used internal load objects list attached at the end of the prompt. Here is the user description: {user_description}

Commonly used objects list: {common_internal_load_object_list}
)";

const char* kRepairTemplate =
    R"(The following is the fatal or severe error message: ``{severe_n_fatal_error_str}``

Based on the current IDF file (attached in the end), create the corrected IDF objects only for the
wrong objects in string format, and put it between `` ``, do not include any other things or
comments.

For each IDF object you modify, record its original information in a list of tuples
[('object_type_1', 'object_name1'), ('object_type_2', 'object_name2')], and put it between
//[ ]//, do not include any other things or comments.

- Specific requirements:
1. The maximum number of IDF objects generated is 10, and the maximum length of the list should
also be less than 10.
2. You must ensure that the other fault-free objects are strictly kept unchanged.

``{current_IDF_file_str}``
)";

const char* kCentralTemplate =
    R"(You are the Central LLM Agent in a multi-agent LLMs used to modify idf files based on user's input. Here are your tasks:
1. Ask for idf files and the modification requirement from user.
2. Based on the user's input, identify the relevant objects and extract them as texts.
3. Send objects in the form of text to the correspondent LLM task agents.
4. Wait for the feedbacks from all agents
5. Aggregate the feedback, correct object reference, and generate a modified idf file and send it to user.

Respond with the plan as a dictionary. The dictionary's keys are the EnergyPlus IDF object type and object name of each object to create or modify, in tuple format (object type in str, object name in str), and the values are the natural-language sub-request to send to the task agent, in string format.

Here is the modification requirement from the user:
"{user_request}"
)";

std::string read_file_or(const std::filesystem::path& path, const std::string& fallback) {
    std::ifstream in(path);
    if (!in) return fallback;
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TemplateSet TemplateSet::builtin() {
    TemplateSet t;
    t.generation = kGenerationTemplate;
    t.extraction = kExtractionTemplate;
    t.repair = kRepairTemplate;
    t.central = kCentralTemplate;
    return t;
}

TemplateSet TemplateSet::from_dir(const std::string& dir) {
    TemplateSet base = builtin();
    const std::filesystem::path root(dir);
    base.generation = read_file_or(root / "generation.txt", base.generation);
    base.extraction = read_file_or(root / "extraction.txt", base.extraction);
    base.repair = read_file_or(root / "repair.txt", base.repair);
    base.central = read_file_or(root / "central.txt", base.central);
    return base;
}

}  // namespace bemflow::agents
