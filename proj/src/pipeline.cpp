#include "botflow/pipeline.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "botflow/error.hpp"
#include "botflow/labeling.hpp"
#include "botflow/meter.hpp"

namespace botflow {

namespace fs = std::filesystem;

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::extract: return "extract";
        case Stage::label: return "label";
        case Stage::rank: return "rank";
        case Stage::universal: return "universal";
        case Stage::train: return "train";
        case Stage::evaluate: return "evaluate";
    }
    return "?";
}

void PipelineConfig::validate() const {
    if (manifests.empty()) throw ValidationError("pipeline needs at least one dataset manifest");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ValidationError("split ratio must lie in (0, 1)");
    if (top_k == 0) throw ValidationError("top_k must be at least 1");
    if (threshold < 1) throw ValidationError("threshold must be at least 1");
    if (models.empty()) throw ValidationError("no classifiers configured");
    for (const auto& m : models) validate_spec(m);
    meter.validate();
    for (std::size_t i = 0; i < manifests.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (manifests[i].name == manifests[j].name) {
                throw ValidationError("duplicate dataset name '" + manifests[i].name + "'");
            }
        }
    }
}

namespace {

using json = nlohmann::json;

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

ModelSpec spec_from_json(ModelKind kind, const json& models, std::uint64_t seed) {
    ModelSpec spec = default_spec(kind, seed);
    const char* key = kind == ModelKind::nb ? "nb" : kind == ModelKind::knn ? "knn" : kind == ModelKind::rf ? "rf" : "lr";
    if (!models.contains(key)) return spec;
    const json& j = models.at(key);
    std::visit(
        [&](auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, NaiveBayesParams>) {
                read_opt(j, "var_smoothing", p.var_smoothing);
            } else if constexpr (std::is_same_v<P, KnnParams>) {
                read_opt(j, "k", p.k);
            } else if constexpr (std::is_same_v<P, RandomForestParams>) {
                read_opt(j, "n_trees", p.n_trees);
                read_opt(j, "max_features", p.max_features);
                read_opt(j, "min_samples_split", p.min_samples_split);
                read_opt(j, "bootstrap", p.bootstrap);
            } else {
                read_opt(j, "l2_lambda", p.l2_lambda);
                read_opt(j, "learning_rate", p.learning_rate);
                read_opt(j, "max_iters", p.max_iters);
                read_opt(j, "tol", p.tol);
            }
        },
        spec);
    return spec;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
}

std::string safe_name(const std::string& name) {
    std::string out;
    for (char c : name) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
    return out.empty() ? "dataset" : out;
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    PipelineConfig cfg;
    try {
        if (!j.contains("manifests")) throw ValidationError(path.string() + ": missing 'manifests'");
        for (const auto& m : j.at("manifests")) cfg.manifests.push_back(read_manifest(resolve(m.get<std::string>())));
        cfg.output_dir = resolve(j.value("output_dir", cfg.output_dir.string()));
        read_opt(j, "seed", cfg.seed);
        read_opt(j, "split_ratio", cfg.split_ratio);
        read_opt(j, "stratified", cfg.stratified);
        read_opt(j, "top_k", cfg.top_k);
        read_opt(j, "threshold", cfg.threshold);
        if (j.contains("meter")) {
            const auto& m = j.at("meter");
            if (m.contains("flow_timeout_s")) {
                cfg.meter.flow_timeout_us = std::llround(m.at("flow_timeout_s").get<double>() * 1e6);
            }
            if (m.contains("activity_timeout_s")) {
                cfg.meter.activity_timeout_us = std::llround(m.at("activity_timeout_s").get<double>() * 1e6);
            }
            if (m.contains("home_prefixes")) {
                cfg.meter.home_prefixes.clear();
                for (const auto& p : m.at("home_prefixes")) {
                    auto prefix = IpPrefix::parse(p.get<std::string>());
                    if (!prefix) throw ValidationError("bad home prefix '" + p.get<std::string>() + "'");
                    cfg.meter.home_prefixes.push_back(*prefix);
                }
            }
        }
        std::vector<ModelKind> kinds = {ModelKind::nb, ModelKind::knn, ModelKind::rf, ModelKind::lr};
        if (j.contains("classifiers")) {
            kinds.clear();
            for (const auto& k : j.at("classifiers")) kinds.push_back(parse_model_kind(k.get<std::string>()));
        }
        const json models = j.value("models", json::object());
        for (auto k : kinds) cfg.models.push_back(spec_from_json(k, models, cfg.seed));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

void reseed_models(PipelineConfig& config) {
    if (config.models.empty()) {
        for (auto k : {ModelKind::nb, ModelKind::knn, ModelKind::rf, ModelKind::lr}) {
            config.models.push_back(default_spec(k, config.seed));
        }
    }
    for (auto& m : config.models) {
        std::visit(
            [&](auto& p) {
                if constexpr (requires { p.seed; }) p.seed = config.seed;
            },
            m);
    }
}

FeatureTable load_labeled_table(const fs::path& path, const std::string& normal_label) {
    ReadOptions opts;
    opts.normal_label = normal_label;
    auto table = read_feature_csv(path, opts);
    if (!table.labels) throw ValidationError(path.string() + ": no Label column");
    return table;
}

std::vector<MetricsReport> train_and_evaluate(const FeatureTable& table, const std::string& dataset,
                                              const std::vector<std::string>& features,
                                              const std::vector<ModelSpec>& models, const SplitOptions& split,
                                              const std::optional<fs::path>& dir) {
    const auto selected = table.select(features);
    auto [train, test] = train_test_split(selected, split);
    if (test.size() == 0) throw ValidationError(dataset + ": test split is empty");
    if (dir) {
        fs::create_directories(*dir / "models");
        write_feature_csv(test, *dir / "test.csv");
    }
    std::vector<MetricsReport> reports;
    for (const auto& spec : models) {
        const auto model = fit(spec, train.rows, *train.labels);
        if (dir) save_model(model, *dir / "models" / (std::string(to_string(kind_of(spec))) + ".model"));
        const auto pred = predict(model, test.rows);
        reports.push_back(compute_metrics(confusion(*test.labels, pred), dataset, kind_of(spec)));
    }
    return reports;
}

PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log) {
    auto say = [&](const std::string& s) {
        if (log) *log << s << '\n';
    };
    const fs::path& out = config.output_dir;
    Stage stage = Stage::extract;
    try {
        config.validate();
        fs::create_directories(out);
        fs::remove(out / "FAILED");

        PipelineResult result;
        std::vector<FeatureTable> tables;
        std::vector<fs::path> dirs;
        for (const auto& m : config.manifests) {
            const auto dir = out / safe_name(m.name);
            fs::create_directories(dir);
            dirs.push_back(dir);
            const auto labeled_path = dir / "labeled.csv";
            if (!m.features.empty()) {
                stage = Stage::extract;
                if (!fs::exists(m.features)) throw IoError("feature file '" + m.features.string() + "' not found");
                stage = Stage::label;
                auto table = load_labeled_table(m.features, m.default_label);
                write_feature_csv(table, labeled_path);
                say(m.name + ": loaded " + std::to_string(table.size()) + " labeled rows from " + m.features.string());
                tables.push_back(std::move(table));
                continue;
            }
            stage = Stage::extract;
            for (const auto& c : m.captures) {
                if (!fs::exists(c)) throw IoError("capture '" + c.string() + "' not found");
            }
            const auto ingested = ingest_captures(m.captures, config.meter, Exec::parallel);
            std::vector<FeatureVector> flows;
            for (std::size_t i = 0; i < ingested.size(); ++i) {
                const auto& st = ingested[i].stats;
                say(m.name + ": " + m.captures[i].filename().string() + ": " + std::to_string(st.packets) +
                    " packets, " + std::to_string(st.flows) + " flows, " + std::to_string(st.skipped()) + " skipped");
                flows.insert(flows.end(), ingested[i].flows.begin(), ingested[i].flows.end());
            }
            write_flow_csv(dir / "flows.csv", flows);

            stage = Stage::label;
            const auto rules = parse_rules(m.rules);
            const auto labeled = label_flows(flows, rules, m.default_label);
            if (labeled.report.unmatched > 0) {
                say("warning: " + m.name + ": " + std::to_string(labeled.report.unmatched) + " of " +
                    std::to_string(flows.size()) + " flows matched no rule and were labeled '" + m.default_label + "'");
            }
            write_flow_csv(labeled_path, flows, labeled.labels);
            tables.push_back(load_labeled_table(labeled_path, m.default_label));
        }

        stage = Stage::rank;
        for (std::size_t d = 0; d < tables.size(); ++d) {
            const auto& m = config.manifests[d];
            const auto& table = tables[d];
            DatasetOutcome outcome;
            outcome.name = m.name;
            outcome.flows = table.size();
            for (int l : *table.labels) outcome.positives += static_cast<std::size_t>(l);
            auto [standardized, params] = standardize(table);
            std::size_t usable = 0;
            for (bool c : params.constant) usable += c ? 0 : 1;
            std::size_t k = config.top_k;
            if (k > usable) {
                say("warning: " + m.name + ": only " + std::to_string(usable) + " non-constant features; ranking " +
                    std::to_string(usable));
                k = usable;
            }
            LogisticParams lr;
            for (const auto& spec : config.models) {
                if (auto* p = std::get_if<LogisticParams>(&spec)) lr = *p;
            }
            lr.seed = config.seed;
            outcome.ranking = rank_features_lr(standardized, k, lr, m.name);
            write_ranked_csv(outcome.ranking, dirs[d] / "ranked.csv");
            result.datasets.push_back(std::move(outcome));
        }

        stage = Stage::universal;
        std::vector<RankedFeatureList> lists;
        for (const auto& o : result.datasets) lists.push_back(o.ranking);
        result.universal = derive_universal_set(lists, config.threshold);
        write_universal_csv(result.universal, out / "universal.csv");
        if (result.universal.features.empty()) {
            throw ValidationError("universal feature set is empty at threshold " + std::to_string(config.threshold));
        }
        {
            std::string names;
            for (const auto& n : result.universal.names()) names += (names.empty() ? "" : ", ") + n;
            say("universal feature set (" + std::to_string(result.universal.features.size()) + "): " + names);
        }

        stage = Stage::train;
        SplitOptions split{config.split_ratio, config.seed, config.stratified};
        for (std::size_t d = 0; d < tables.size(); ++d) {
            auto reports = train_and_evaluate(tables[d], config.manifests[d].name, result.universal.names(),
                                              config.models, split, dirs[d]);
            result.reports.insert(result.reports.end(), reports.begin(), reports.end());
        }

        stage = Stage::evaluate;
        write_text(out / "report.csv", render_report(result.reports, ReportFormat::csv));
        write_text(out / "report.txt", render_report(result.reports, ReportFormat::text));
        return result;
    } catch (const std::exception& e) {
        try {
            fs::create_directories(out);
            write_text(out / "FAILED", "stage: " + std::string(to_string(stage)) + "\nerror: " + e.what() + "\n");
        } catch (...) {
        }
        throw StageError(stage, e.what());
    }
}

}  // namespace botflow
