#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bemflow/app.hpp"
#include "support/scenarios.hpp"
#include "test_helpers.hpp"

using namespace bemflow;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = app::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string idd_path() { return (testutil::repo_root() / "share/idd/energyplus_core.idd").string(); }

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "bemflow_cli_test") {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("unknown subcommand and missing flags exit 2") {
    CHECK(run({"frobnicate"}).exit_code == 2);
    CHECK(run({}).exit_code == 2);
    CHECK(run({"gen-object"}).exit_code == 2);  // --class is required
}

TEST_CASE("help snapshots") {
    const std::vector<std::pair<std::string, std::vector<std::string>>> cases = {
        {"help_root.txt", {"--help"}},
        {"help_gen_object.txt", {"gen-object", "--help"}},
        {"help_gen_idf.txt", {"gen-idf", "--help"}},
        {"help_modify_idf.txt", {"modify-idf", "--help"}},
        {"help_validate.txt", {"validate", "--help"}},
        {"help_repair.txt", {"repair", "--help"}},
        {"help_viz.txt", {"viz", "--help"}},
        {"help_rag_index.txt", {"rag-index", "--help"}},
        {"help_rag_query.txt", {"rag-query", "--help"}},
    };
    for (const auto& [golden_name, args] : cases) {
        const CliResult result = run(args);
        CHECK(result.exit_code == 0);
        const fs::path golden = testutil::repo_root() / "tests" / "golden" / golden_name;
        REQUIRE_MESSAGE(fs::exists(golden), "missing golden file ", golden_name);
        CHECK_MESSAGE(result.out == testutil::read_file(golden), "help drifted for ",
                      golden_name, "; regenerate tests/golden if intentional");
    }
}

TEST_CASE("gen-object prints the object and the four-section summary") {
    const CliResult result = run({"--idd", idd_path(), "gen-object", "--class", "People", "--set",
                                  "Number of People=10"});
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("People,") != std::string::npos);
    CHECK(result.out.find("!- Number of People - set by user") != std::string::npos);
    CHECK(result.out.find("Here's a summary:") != std::string::npos);
    CHECK(result.out.find("Fields set by user: \"Number of People\"") != std::string::npos);
    CHECK(result.out.find("Mandatory fields not defined:") != std::string::npos);

    // Same command with a deterministic seed is byte-stable.
    const CliResult a = run({"--idd", idd_path(), "--seed", "7", "gen-object", "--class",
                             "People", "--set", "Number of People=10"});
    const CliResult b = run({"--idd", idd_path(), "--seed", "7", "gen-object", "--class",
                             "People", "--set", "Number of People=10"});
    CHECK(a.out == b.out);

    CHECK(run({"--idd", idd_path(), "gen-object", "--class", "NoSuch"}).exit_code == 1);
    CHECK(run({"gen-object", "--class", "People"}).exit_code == 2);  // no idd configured
}

TEST_CASE("validate exits 0 on clean files and 1 with findings printed") {
    const std::string simple = (testutil::fixtures() / "simple.idf").string();
    const CliResult clean = run({"--idd", idd_path(), "validate", simple});
    CHECK(clean.exit_code == 0);
    CHECK(clean.out.find("0 dangling, 0 placeholders") != std::string::npos);

    const std::string seeded = (testutil::fixtures() / "seeded_fault.idf").string();
    const CliResult bad = run({"--idd", idd_path(), "validate", seeded});
    CHECK(bad.exit_code == 1);
    CHECK(bad.out.find("dangling:") != std::string::npos);
    CHECK(bad.out.find("placeholder:") != std::string::npos);
    CHECK(bad.out.find("NoSuchSched") != std::string::npos);
}

TEST_CASE("config file drives the pipeline; flags override it") {
    TempDir tmp;
    const fs::path config_path = tmp.path / "bemflow.conf";
    const fs::path out_path = tmp.path / "final.idf";
    const fs::path log_path = tmp.path / "run.jsonl";
    {
        std::ofstream config(config_path);
        config << "# test configuration\n";
        config << "idd_path = " << idd_path() << "\n";
        config << "llm_mode = replay\n";
        config << "llm_transcript = "
               << (testutil::fixtures() / "transcripts" / "modify_simple.jsonl").string() << "\n";
        config << "sim_mode = mock\n";
        config << "log_path = " << log_path.string() << "\n";
    }
    const CliResult result =
        run({"--config", config_path.string(), "modify-idf", "--idf",
             (testutil::fixtures() / "simple.idf").string(), "--request",
             "Here is the IDF file and I want to 1) create a people object for the only zone, 2) "
             "add a schedule for exterior lights that starts at 6:00 PM and ends at 6:00 AM, and "
             "3) change the R13 layer to be R15.",
             "--out", out_path.string()});
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("outcome: Clean") != std::string::npos);
    REQUIRE(fs::exists(out_path));
    const std::string final_text = testutil::read_file(out_path);
    CHECK(final_text.find("2.64") != std::string::npos);
    CHECK(final_text.find("NewSchedule") != std::string::npos);
    REQUIRE(fs::exists(log_path));
    CHECK(testutil::read_file(log_path).find("\"outcome\":\"Clean\"") != std::string::npos);

    // Flag-over-file precedence: pointing --transcript at a missing file
    // must fail configuration validation even though the file names one.
    const CliResult overridden =
        run({"--config", config_path.string(), "--transcript", "/no/such/file.jsonl",
             "modify-idf", "--idf", (testutil::fixtures() / "simple.idf").string(), "--request",
             "anything", "--out", out_path.string()});
    CHECK(overridden.exit_code == 2);
    CHECK(overridden.err.find("transcript") != std::string::npos);
}

TEST_CASE("gen-idf and repair run end-to-end in replay mode") {
    TempDir tmp;
    const fs::path desc = tmp.path / "description.txt";
    {
        std::ofstream out(desc);
        out << testsupport::iunit_description();
    }
    const fs::path final_idf = tmp.path / "final.idf";
    const CliResult generated =
        run({"--idd", idd_path(), "--llm-mode", "replay", "--transcript",
             (testutil::fixtures() / "transcripts" / "iunit_trial_00.jsonl").string(),
             "gen-idf", "--description", desc.string(), "--initial",
             (testutil::fixtures() / "iunit_initial.idf").string(), "--out", final_idf.string()});
    CHECK(generated.exit_code == 0);
    CHECK(generated.out.find("outcome: Clean") != std::string::npos);
    CHECK(fs::exists(final_idf));

    const fs::path repaired_idf = tmp.path / "repaired.idf";
    const CliResult repaired =
        run({"--idd", idd_path(), "--llm-mode", "replay", "--transcript",
             (testutil::fixtures() / "transcripts" / "seeded_fault.jsonl").string(), "repair",
             "--idf", (testutil::fixtures() / "seeded_fault.idf").string(), "--out",
             repaired_idf.string()});
    CHECK(repaired.exit_code == 0);
    const CliResult audit = run({"--idd", idd_path(), "validate", repaired_idf.string()});
    CHECK(audit.exit_code == 0);
}

TEST_CASE("viz subcommands write SVGs") {
    TempDir tmp;
    const fs::path csv = tmp.path / "out.csv";
    {
        std::ofstream out(csv);
        out << testutil::read_file(testutil::fixtures() / "sample_output.csv");
    }
    const fs::path svg = tmp.path / "plot.svg";
    const CliResult enduse = run({"viz", "enduse", "--csv", csv.string(), "--start", "01/01",
                                  "--end", "01/08", "--out", svg.string()});
    CHECK(enduse.exit_code == 0);
    CHECK(testutil::read_file(svg).find("data-kind=\"enduse-stack\"") != std::string::npos);

    const CliResult weather = run({"viz", "weather", "--csv", csv.string(), "--start", "08/01",
                                   "--end", "08/15", "--out", svg.string()});
    CHECK(weather.exit_code == 0);
    CHECK(testutil::read_file(svg).find("data-kind=\"weather-panels\"") != std::string::npos);

    CHECK(run({"viz", "enduse", "--csv", csv.string(), "--start", "02/01", "--end", "01/01",
               "--out", svg.string()})
              .exit_code == 1);
}

TEST_CASE("rag-index and rag-query work against the fixture corpus") {
    TempDir tmp;
    const fs::path index = tmp.path / "index.jsonl";
    const CliResult build = run(
        {"rag-index", (testutil::fixtures() / "rag_corpus").string(), index.string()});
    CHECK(build.exit_code == 0);
    CHECK(build.out.find("indexed 20 chunks") != std::string::npos);

    const CliResult query =
        run({"rag-query", index.string(), "What is the purpose of BEMcyclopedia", "--k", "3"});
    CHECK(query.exit_code == 0);
    CHECK(query.out.find("1. [about.txt#p0]") != std::string::npos);

    const CliResult answered = run({"--llm-mode", "replay", "--transcript",
                                    (testutil::fixtures() / "transcripts/rag_answer.jsonl").string(),
                                    "rag-query", index.string(),
                                    "What is the purpose of BEMcyclopedia", "--k", "4",
                                    "--answer"});
    CHECK(answered.exit_code == 0);
    CHECK(answered.out.find("free, open-content resource") != std::string::npos);
    CHECK(answered.out.find("cited: about.txt#p0") != std::string::npos);
}
