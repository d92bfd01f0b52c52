#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "botflow/classifiers/knn.hpp"
#include "botflow/classifiers/logistic.hpp"
#include "botflow/classifiers/random_forest.hpp"
#include "botflow/corpus.hpp"
#include "botflow/meter.hpp"
#include "botflow/pcap.hpp"
#include "botflow/rng.hpp"
#include "botflow/synth.hpp"

using namespace botflow;
namespace fs = std::filesystem;

namespace {

struct Data {
    Matrix x;
    std::vector<int> y;
};

Data blobs(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Data out{Matrix(n, d), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        out.y[i] = static_cast<int>(i % 2);
        for (std::size_t j = 0; j < d; ++j) out.x(i, j) = rng.normal(out.y[i] ? 1.0 : -1.0, 1.5);
    }
    return out;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_KnnPredict(benchmark::State& state) {
    const auto train = blobs(4000, 6, 1), test = blobs(1000, 6, 2);
    KNearestNeighbors knn;
    knn.fit(train.x, train.y);
    for (auto _ : state) benchmark::DoNotOptimize(knn.predict(test.x, exec_of(state)));
    label(state);
}

void BM_RandomForestFit(benchmark::State& state) {
    const auto d = blobs(2000, 6, 3);
    RandomForestParams p;
    p.n_trees = 32;
    p.seed = 1;
    for (auto _ : state) {
        RandomForest rf(p);
        rf.fit(d.x, d.y, exec_of(state));
        benchmark::DoNotOptimize(rf);
    }
    label(state);
}

void BM_LogisticGradient(benchmark::State& state) {
    const auto d = blobs(50000, 10, 4);
    const std::vector<double> w(10, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(logistic_gradient(w, 0.0, d.x, d.y, 1.0, exec_of(state)));
    label(state);
}

const std::vector<fs::path>& captures() {
    static const std::vector<fs::path> paths = [] {
        const auto dir = fs::temp_directory_path() / ("botflow-bench-" + std::to_string(::getpid()));
        fs::create_directories(dir);
        std::vector<fs::path> out;
        const AttackStyle styles[] = {AttackStyle::ddos, AttackStyle::irc_c2, AttackStyle::iot_scan};
        for (int i = 0; i < 4; ++i) {
            const auto ds = make_synthetic_dataset(styles[i % 3], 300, 10 + i, i);
            out.push_back(dir / ("c" + std::to_string(i) + ".pcap"));
            write_file(out.back(), generate_synthetic_capture(ds.flows, i));
        }
        return out;
    }();
    return paths;
}

void BM_IngestCaptures(benchmark::State& state) {
    const auto& paths = captures();
    for (auto _ : state) benchmark::DoNotOptimize(ingest_captures(paths, MeterConfig{}, exec_of(state)));
    label(state);
}

}  // namespace

BENCHMARK(BM_KnnPredict)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RandomForestFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogisticGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IngestCaptures)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    std::error_code ec;
    if (!captures().empty()) fs::remove_all(captures().front().parent_path(), ec);
    return 0;
}
