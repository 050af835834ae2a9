// Regenerates the recorded transcript fixtures by running the pipelines
// against the scripted backend in record mode. Run from anywhere:
//
//   fixture-gen <repo-root>
//
// Outputs land in <repo-root>/tests/fixtures/. Deterministic: rerunning
// produces byte-identical files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bemflow/idd_schema.hpp"
#include "bemflow/idf_core.hpp"
#include "bemflow/llm_gateway.hpp"
#include "bemflow/object_forge.hpp"
#include "bemflow/pipeline.hpp"
#include "bemflow/rag.hpp"
#include "bemflow/simulator_bridge.hpp"
#include "support/scenarios.hpp"
#include "support/scripted_llm.hpp"
#include "support/synthetic_csv.hpp"

namespace fs = std::filesystem;
using namespace bemflow;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    out << content;
}

pipe::PipelineConfig iunit_config() {
    pipe::PipelineConfig config;
    config.common_object_list = testsupport::iunit_common_object_list();
    return config;
}

idf::IdfDocument seeded_fault_document(const idf::IdfDocument& simple) {
    idf::IdfDocument doc = simple;
    for (auto& obj : doc.objects) {
        if (obj.class_name == "Exterior:Lights")
            obj.values[1] = idf::FieldValue::literal("NoSuchSched");
    }
    // A People object whose number-of-people schedule is an unresolved
    // placeholder; everything else is wired up.
    idf::IdfObject people;
    people.class_name = "People";
    auto add = [&](const std::string& v) {
        people.values.push_back(idf::FieldValue::classify(v));
    };
    add("BreakRoomPeople");
    add("ZONE ONE");
    add("TBD1234567890");
    add("People");
    add("4");
    add("");
    add("");
    add("0.3");
    add("autocalculate");
    add("AlwaysOnSched");
    doc.objects.push_back(std::move(people));
    return doc;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: fixture-gen <repo-root>\n";
        return 2;
    }
    const fs::path root(argv[1]);
    const fs::path fixtures = root / "tests" / "fixtures";
    const fs::path transcripts = fixtures / "transcripts";

    try {
        const idd::IddSchema schema =
            idd::parse_idd(read_file(root / "share" / "idd" / "energyplus_core.idd"));
        const idf::IdfDocument iunit_initial =
            idf::parse_idf(read_file(fixtures / "iunit_initial.idf"));
        const idf::IdfDocument simple = idf::parse_idf(read_file(fixtures / "simple.idf"));

        sim::MockSimulator mock = sim::MockSimulator::with_default_rules(schema);

        // Ten distinct recorded trials of the iUnit generation workflow.
        for (int trial = 0; trial < 10; ++trial) {
            testsupport::ScriptedLlm scripted(schema, testsupport::iunit_scenario(trial),
                                              1000 + static_cast<std::uint64_t>(trial));
            std::ostringstream name;
            name << "iunit_trial_" << (trial < 10 ? "0" : "") << trial << ".jsonl";
            llm::RecordingBackend recorder(&scripted, nullptr,
                                           (transcripts / name.str()).string(),
                                           /*with_timestamps=*/false);
            pipe::Pipeline pipeline(schema, recorder, mock, iunit_config());
            const pipe::PipelineResult result =
                pipeline.generate_idf(testsupport::iunit_description(), iunit_initial);
            recorder.flush();
            if (result.log.outcome != pipe::Outcome::Clean) {
                std::cerr << "trial " << trial << " did not reach Clean\n";
                return 1;
            }
            if (trial == 0)
                write_file(fixtures / "iunit_final.idf", idf::serialize(result.document, schema));
            std::cout << "recorded " << name.str() << " (" << result.log.repair_rounds.size()
                      << " repair round(s))\n";
        }

        // The three-part modification of the simple file.
        {
            testsupport::ScriptedLlm scripted(schema, testsupport::modify_simple_scenario(), 77);
            llm::RecordingBackend recorder(&scripted, nullptr,
                                           (transcripts / "modify_simple.jsonl").string(), false);
            pipe::Pipeline pipeline(schema, recorder, mock, iunit_config());
            const pipe::PipelineResult result =
                pipeline.modify_idf(simple, testsupport::modify_simple_request());
            recorder.flush();
            if (result.log.outcome != pipe::Outcome::Clean) {
                std::cerr << "modify_simple did not reach Clean\n";
                return 1;
            }
            write_file(fixtures / "simple_modified.idf", idf::serialize(result.document, schema));
            std::cout << "recorded modify_simple.jsonl\n";
        }

        // Seeded-fault repair loop: one dangling schedule + one placeholder.
        {
            const idf::IdfDocument seeded = seeded_fault_document(simple);
            write_file(fixtures / "seeded_fault.idf", idf::serialize(seeded, schema));
            testsupport::ScriptedLlm scripted(schema, testsupport::seeded_fault_scenario(), 99);
            llm::RecordingBackend recorder(&scripted, nullptr,
                                           (transcripts / "seeded_fault.jsonl").string(), false);
            pipe::Pipeline pipeline(schema, recorder, mock, iunit_config());
            pipe::RunLog log;
            auto [repaired, rounds] = pipeline.debug_loop(seeded, &log);
            recorder.flush();
            if (log.outcome != pipe::Outcome::Clean) {
                std::cerr << "seeded_fault did not reach Clean\n";
                return 1;
            }
            (void)repaired;
            std::cout << "recorded seeded_fault.jsonl (" << rounds.size() << " round(s))\n";
        }

        // One generation that violates the rules once, then succeeds on retry.
        {
            testsupport::ScriptedLlm scripted(schema, testsupport::flaky_generation_scenario(0),
                                              1000);
            llm::RecordingBackend recorder(&scripted, nullptr,
                                           (transcripts / "flaky_gen.jsonl").string(), false);
            pipe::Pipeline pipeline(schema, recorder, mock, iunit_config());
            const pipe::PipelineResult result =
                pipeline.generate_idf(testsupport::iunit_description(), iunit_initial);
            recorder.flush();
            if (result.log.outcome != pipe::Outcome::Clean) {
                std::cerr << "flaky_gen did not reach Clean\n";
                return 1;
            }
            std::cout << "recorded flaky_gen.jsonl\n";
        }

        // A repair whose first response exceeds the 10-object contract.
        {
            testsupport::ScriptedLlm scripted(schema, testsupport::oversized_repair_scenario(0),
                                              1000);
            llm::RecordingBackend recorder(&scripted, nullptr,
                                           (transcripts / "oversized_repair.jsonl").string(),
                                           false);
            pipe::Pipeline pipeline(schema, recorder, mock, iunit_config());
            const pipe::PipelineResult result =
                pipeline.generate_idf(testsupport::iunit_description(), iunit_initial);
            recorder.flush();
            if (result.log.outcome != pipe::Outcome::Clean) {
                std::cerr << "oversized_repair did not reach Clean\n";
                return 1;
            }
            std::cout << "recorded oversized_repair.jsonl\n";
        }

        // RAG answer exchange over the fixture corpus.
        {
            llm::StubEmbedBackend embedder(256, 0);
            std::vector<std::pair<std::string, std::string>> documents;
            std::vector<fs::path> paths;
            for (const auto& entry : fs::directory_iterator(fixtures / "rag_corpus"))
                if (entry.path().extension() == ".txt") paths.push_back(entry.path());
            std::sort(paths.begin(), paths.end());
            for (const auto& p : paths) documents.emplace_back(p.filename().string(), read_file(p));
            const rag::VectorIndex index =
                rag::build_index(rag::chunk_corpus(documents, 2000), embedder);

            struct CannedChat final : llm::ChatBackend {
                std::string text;
                std::string complete(const llm::ChatRequest&) override { return text; }
                bool is_offline() const override { return true; }
            } canned;
            canned.text =
                "BEMcyclopedia exists as a free, open-content resource where energy modelers "
                "learn about building energy modeling and share what they know. Its About page "
                "describes practical guidance on how, when, and why to apply modeling across the "
                "stages of a design project and how to use the results to inform design "
                "decisions. The material is organized into a design-task timeline collection and "
                "a collection of essential concepts, with a focus on building performance, "
                "energy, and emissions.";
            llm::RecordingBackend recorder(&canned, &embedder,
                                           (transcripts / "rag_answer.jsonl").string(), false);
            const rag::Answer answer = rag::answer(index, "What is the purpose of BEMcyclopedia",
                                                   4, embedder, recorder, "gpt-4-0613");
            recorder.flush();
            if (answer.cited_chunk_ids.empty()) {
                std::cerr << "rag_answer produced no citations\n";
                return 1;
            }
            std::cout << "recorded rag_answer.jsonl\n";
        }

        // Sample output CSV for the CLI walkthrough.
        write_file(fixtures / "sample_output.csv", testsupport::synthetic_annual_csv());
        std::cout << "wrote sample_output.csv\n";
    } catch (const std::exception& e) {
        std::cerr << "fixture-gen failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
