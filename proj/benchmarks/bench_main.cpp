#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bemflow/idd_schema.hpp"
#include "bemflow/idf_core.hpp"
#include "bemflow/llm_gateway.hpp"
#include "bemflow/object_forge.hpp"
#include "bemflow/rag.hpp"
#include "bemflow/simulator_bridge.hpp"

using namespace bemflow;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

const std::string& idd_text() {
    static const std::string text = read_file(
        std::filesystem::path(BEMFLOW_REPO_ROOT) / "share" / "idd" / "energyplus_core.idd");
    return text;
}

const std::string& idf_text() {
    static const std::string text = read_file(
        std::filesystem::path(BEMFLOW_REPO_ROOT) / "tests" / "fixtures" / "iunit_final.idf");
    return text;
}

const idd::IddSchema& schema() {
    static const idd::IddSchema s = idd::parse_idd(idd_text());
    return s;
}

}  // namespace

static void BM_ParseIdd(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(idd::parse_idd(idd_text()));
    }
}
BENCHMARK(BM_ParseIdd);

static void BM_IddExcerpt(benchmark::State& state) {
    const idd::IddSchema& s = schema();
    for (auto _ : state) {
        benchmark::DoNotOptimize(idd::idd_excerpt(s, "HVACTemplate:Zone:PTAC"));
    }
}
BENCHMARK(BM_IddExcerpt);

static void BM_ParseIdf(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(idf::parse_idf(idf_text()));
    }
}
BENCHMARK(BM_ParseIdf);

static void BM_SerializeIdf(benchmark::State& state) {
    const idf::IdfDocument doc = idf::parse_idf(idf_text());
    for (auto _ : state) {
        benchmark::DoNotOptimize(idf::serialize(doc, schema()));
    }
}
BENCHMARK(BM_SerializeIdf);

static void BM_ReferenceAudit(benchmark::State& state) {
    const idf::IdfDocument doc = idf::parse_idf(idf_text());
    for (auto _ : state) {
        benchmark::DoNotOptimize(idf::reference_audit(doc, schema()));
    }
}
BENCHMARK(BM_ReferenceAudit);

static void BM_ForgePeople(benchmark::State& state) {
    const forge::GenerationSpec spec =
        forge::GenerationSpec::checked(schema(), "People", {{"Number of People", "10"}});
    for (auto _ : state) {
        forge::PlaceholderSource placeholders(0);
        benchmark::DoNotOptimize(forge::forge_object(schema(), spec, placeholders));
    }
}
BENCHMARK(BM_ForgePeople);

static void BM_ParseErr(benchmark::State& state) {
    std::ostringstream raw;
    raw << "Program Version,EnergyPlus, Version 23.1.0\n";
    for (int i = 0; i < 200; ++i) {
        raw << "   ** Severe  ** Lights=\"L" << i << "\", invalid Schedule Name=\"S" << i
            << "\".\n";
        raw << "   **   ~~~   ** ..detail line\n";
    }
    const std::string text = raw.str();
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim::parse_err(text));
    }
}
BENCHMARK(BM_ParseErr);

static void BM_CosineSearch(benchmark::State& state) {
    llm::StubEmbedBackend embedder(256, 0);
    std::mt19937_64 rng(1);
    std::vector<rag::Chunk> chunks;
    for (int i = 0; i < state.range(0); ++i) {
        rag::Chunk c;
        c.id = "c" + std::to_string(i);
        c.text = "paragraph " + std::to_string(rng() % 100000) + " about buildings";
        chunks.push_back(std::move(c));
    }
    const rag::VectorIndex index = rag::build_index(std::move(chunks), embedder);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rag::search(index, "energy model question", 4, embedder));
    }
}
BENCHMARK(BM_CosineSearch)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
