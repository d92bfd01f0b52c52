#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "botflow/classifiers/model.hpp"
#include "botflow/corpus.hpp"
#include "botflow/dataset.hpp"
#include "botflow/error.hpp"
#include "botflow/evaluation.hpp"
#include "botflow/labeling.hpp"
#include "botflow/meter.hpp"
#include "botflow/pcap.hpp"
#include "botflow/pipeline.hpp"
#include "botflow/selection.hpp"
#include "botflow/synth.hpp"

namespace fs = std::filesystem;
using namespace botflow;

namespace {

struct Globals {
    fs::path config;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out;
    std::optional<double> timeout_s;
    std::optional<double> activity_timeout_s;
    std::optional<int> threshold;
    std::optional<std::size_t> top_k;
    std::optional<double> ratio;
};

// Settings shared by every subcommand: the config file (if any) with flag overrides on top.
PipelineConfig settings(const Globals& g, bool need_manifests) {
    PipelineConfig cfg;
    if (!g.config.empty()) {
        cfg = load_pipeline_config(g.config);
    } else if (need_manifests) {
        throw ValidationError("--config is required");
    }
    if (g.seed) {
        cfg.seed = *g.seed;
        reseed_models(cfg);
    }
    if (cfg.models.empty()) reseed_models(cfg);
    if (g.out) cfg.output_dir = *g.out;
    if (g.timeout_s) cfg.meter.flow_timeout_us = static_cast<std::int64_t>(*g.timeout_s * 1e6);
    if (g.activity_timeout_s) cfg.meter.activity_timeout_us = static_cast<std::int64_t>(*g.activity_timeout_s * 1e6);
    if (g.threshold) cfg.threshold = *g.threshold;
    if (g.top_k) cfg.top_k = *g.top_k;
    if (g.ratio) cfg.split_ratio = *g.ratio;
    cfg.meter.validate();
    if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) throw ValidationError("--ratio must be in (0, 1)");
    if (cfg.threshold < 1) throw ValidationError("--threshold must be >= 1");
    if (cfg.top_k < 1) throw ValidationError("--top-k must be >= 1");
    return cfg;
}

fs::path output_file(const Globals& g, const std::string& fallback) {
    if (!g.out) return fallback;
    if (fs::is_directory(*g.out)) return *g.out / fallback;
    return *g.out;
}

std::uint8_t parse_flags(const nlohmann::json& v) {
    if (v.is_number_integer()) return v.get<std::uint8_t>();
    std::uint8_t f = 0;
    for (char c : v.get<std::string>()) {
        switch (c) {
            case 'F': f |= tcp_flag::fin; break;
            case 'S': f |= tcp_flag::syn; break;
            case 'R': f |= tcp_flag::rst; break;
            case 'P': f |= tcp_flag::psh; break;
            case 'A': f |= tcp_flag::ack; break;
            case 'U': f |= tcp_flag::urg; break;
            default: throw ValidationError(std::string("unknown TCP flag letter '") + c + "'");
        }
    }
    return f;
}

IpAddress parse_ip(const std::string& text) {
    const auto ip = IpAddress::parse(text);
    if (!ip) throw ValidationError("bad IP address '" + text + "'");
    return *ip;
}

std::vector<FlowBlueprint> read_blueprint(const fs::path& path, std::uint64_t& seed) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    const auto doc = nlohmann::json::parse(in);
    if (doc.contains("seed")) seed = doc["seed"].get<std::uint64_t>();
    std::vector<FlowBlueprint> flows;
    for (const auto& f : doc.at("flows")) {
        FlowBlueprint b;
        b.src_ip = parse_ip(f.at("src").get<std::string>());
        b.dst_ip = parse_ip(f.at("dst").get<std::string>());
        b.src_port = f.value("sport", std::uint16_t{0});
        b.dst_port = f.value("dport", std::uint16_t{0});
        b.protocol = f.value("proto", std::uint8_t{6});
        b.start_us = f.value("start_us", std::int64_t{0});
        for (const auto& p : f.at("packets")) {
            PacketBlueprint pb;
            pb.direction = p.value("dir", std::string("fwd")) == "bwd" ? Direction::backward : Direction::forward;
            pb.payload_len = p.value("len", std::int64_t{0});
            pb.gap_us = p.value("gap_us", std::int64_t{0});
            if (p.contains("flags")) pb.tcp_flags = parse_flags(p["flags"]);
            if (p.contains("window")) pb.window = p["window"].get<std::uint16_t>();
            b.packets.push_back(pb);
        }
        flows.push_back(std::move(b));
    }
    return flows;
}

void print_label_report(const LabelReport& r) {
    for (const auto& [label, n] : r.per_label) std::cerr << "  " << label << ": " << n << '\n';
    std::cerr << "  matched exact " << r.exact << ", reversed " << r.reversed << ", wildcard " << r.wildcard
              << ", unmatched " << r.unmatched << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flow feature extraction and botnet traffic classification"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "Pipeline JSON configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Seed override");
    app.add_option("--out", g.out, "Output directory or file");
    app.add_option("--timeout-s", g.timeout_s, "Flow idle timeout in seconds");
    app.add_option("--activity-timeout-s", g.activity_timeout_s, "Active/idle split in seconds");
    app.add_option("--threshold", g.threshold, "Minimum list count for the universal set");
    app.add_option("--top-k", g.top_k, "Features kept per ranked list");
    app.add_option("--ratio", g.ratio, "Training share of the holdout split");

    std::string stage = "cli";

    auto* extract = app.add_subcommand("extract", "Meter pcap files into a flow CSV");
    std::vector<fs::path> captures;
    extract->add_option("captures", captures, "Capture files")->required();

    auto* label = app.add_subcommand("label", "Attach ground-truth labels to a flow CSV");
    fs::path label_flows_in, label_rules;
    std::string default_label = "Normal";
    label->add_option("flows", label_flows_in, "Flow CSV")->required()->check(CLI::ExistingFile);
    label->add_option("--rules", label_rules, "Rule CSV")->required()->check(CLI::ExistingFile);
    label->add_option("--default-label", default_label, "Label for unmatched flows");

    auto* rank = app.add_subcommand("rank", "Rank features of a labeled CSV by |LR coefficient|");
    fs::path rank_in;
    std::string rank_dataset, rank_normal = "Normal";
    rank->add_option("labeled", rank_in, "Labeled flow or feature CSV")->required()->check(CLI::ExistingFile);
    rank->add_option("--dataset", rank_dataset, "Dataset name recorded in the list");
    rank->add_option("--normal-label", rank_normal, "Label treated as benign");

    auto* universal = app.add_subcommand("universal", "Derive the universal feature set from ranked lists");
    std::vector<fs::path> ranked_in;
    universal->add_option("ranked", ranked_in, "Ranked list CSVs")->required()->check(CLI::ExistingFile);

    auto* train = app.add_subcommand("train", "Train classifiers on the universal features");
    fs::path train_in, train_universal;
    std::string train_normal = "Normal";
    std::vector<std::string> train_models;
    train->add_option("labeled", train_in, "Labeled flow or feature CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--universal", train_universal, "Universal set CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--models", train_models, "Subset of NB, KNN, RF, LR")->delimiter(',');
    train->add_option("--normal-label", train_normal, "Label treated as benign");

    auto* evaluate = app.add_subcommand("evaluate", "Score saved models on a test CSV");
    fs::path eval_test;
    std::vector<fs::path> eval_models;
    std::string eval_dataset, eval_normal = "Normal";
    evaluate->add_option("--test", eval_test, "Test feature CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("models", eval_models, "Model files")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--dataset", eval_dataset, "Dataset name for the report");
    evaluate->add_option("--normal-label", eval_normal, "Label treated as benign");

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage from a configuration file");

    auto* synth = app.add_subcommand("synth", "Write synthetic captures");
    fs::path synth_blueprint, synth_corpus;
    std::size_t synth_datasets = 3, synth_per_class = 150;
    auto* bp_opt = synth->add_option("--blueprint", synth_blueprint, "JSON flow blueprint")->check(CLI::ExistingFile);
    auto* corpus_opt = synth->add_option("--corpus", synth_corpus, "Directory for a labeled multi-dataset corpus");
    bp_opt->excludes(corpus_opt);
    synth->add_option("--datasets", synth_datasets, "Corpus datasets")->needs(corpus_opt);
    synth->add_option("--flows-per-class", synth_per_class, "Corpus flows per class")->needs(corpus_opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) {
            stage = "extract";
            const auto cfg = settings(g, false);
            const auto results = ingest_captures(captures, cfg.meter);
            std::vector<FeatureVector> flows;
            for (std::size_t i = 0; i < results.size(); ++i) {
                const auto& st = results[i].stats;
                std::cerr << captures[i].string() << ": " << st.frames << " frames, " << st.packets << " packets, "
                          << st.flows << " flows, skipped " << st.skipped_non_ip << " non-IP, "
                          << st.skipped_protocol << " other protocol, " << st.skipped_truncated << " truncated\n";
                flows.insert(flows.end(), results[i].flows.begin(), results[i].flows.end());
            }
            write_flow_csv(output_file(g, "flows.csv"), flows);
        } else if (label->parsed()) {
            stage = "label";
            const auto in = read_flow_csv(label_flows_in);
            const auto rules = parse_rules(label_rules);
            const auto labeled = label_flows(in.flows, rules, default_label);
            print_label_report(labeled.report);
            write_flow_csv(output_file(g, "labeled.csv"), in.flows, labeled.labels);
        } else if (rank->parsed()) {
            stage = "rank";
            const auto cfg = settings(g, false);
            const auto table = load_labeled_table(rank_in, rank_normal);
            LogisticParams lr;
            for (const auto& m : cfg.models) {
                if (const auto* p = std::get_if<LogisticParams>(&m)) lr = *p;
            }
            const auto name = rank_dataset.empty() ? rank_in.stem().string() : rank_dataset;
            const auto list = rank_features_lr(table, cfg.top_k, lr, name);
            const auto out = output_file(g, "ranked.csv");
            write_ranked_csv(list, out);
            for (std::size_t i = 0; i < list.features.size(); ++i) {
                std::cout << i + 1 << ". " << list.features[i].name << "  " << list.features[i].score << '\n';
            }
        } else if (universal->parsed()) {
            stage = "universal";
            const auto cfg = settings(g, false);
            std::vector<RankedFeatureList> lists;
            for (const auto& p : ranked_in) lists.push_back(read_ranked_csv(p));
            const auto set = derive_universal_set(lists, cfg.threshold);
            if (set.features.empty()) throw ValidationError("no feature reaches the threshold");
            write_universal_csv(set, output_file(g, "universal.csv"));
            for (const auto& [name, count] : set.features) std::cout << name << "  " << count << '\n';
        } else if (train->parsed()) {
            stage = "train";
            const auto cfg = settings(g, false);
            const fs::path dir = g.out ? *g.out : fs::path("model_out");
            fs::create_directories(dir);
            const auto table = load_labeled_table(train_in, train_normal);
            const auto set = read_universal_csv(train_universal);
            std::vector<ModelSpec> specs;
            for (const auto& m : cfg.models) {
                if (train_models.empty()) {
                    specs.push_back(m);
                    continue;
                }
                for (const auto& want : train_models) {
                    if (parse_model_kind(want) == kind_of(m)) specs.push_back(m);
                }
            }
            if (specs.empty()) throw ValidationError("no classifiers selected");
            SplitOptions split;
            split.ratio = cfg.split_ratio;
            split.seed = cfg.seed;
            split.stratified = cfg.stratified;
            auto [tr, te] = train_test_split(table.select(set.names()), split);
            write_feature_csv(te, dir / "test.csv");
            for (const auto& spec : specs) {
                const auto model = fit(spec, tr.rows, *tr.labels);
                const auto path = dir / (std::string(to_string(kind_of(spec))) + ".model");
                save_model(model, path);
                std::cerr << "wrote " << path.string() << '\n';
            }
        } else if (evaluate->parsed()) {
            stage = "evaluate";
            ReadOptions ro;
            ro.normal_label = eval_normal;
            const auto test = read_feature_csv(eval_test, ro);
            if (!test.labels) throw ValidationError("test CSV has no Label column");
            const auto name = eval_dataset.empty() ? eval_test.parent_path().filename().string() : eval_dataset;
            std::vector<MetricsReport> reports;
            for (const auto& p : eval_models) {
                const auto model = load_model(p);
                const auto pred = predict(model, test.rows);
                reports.push_back(compute_metrics(confusion(*test.labels, pred), name, kind_of(model)));
            }
            std::cout << render_report(reports, ReportFormat::text);
            if (g.out) {
                std::ofstream out(*g.out, std::ios::binary | std::ios::trunc);
                if (!out) throw IoError("cannot write '" + g.out->string() + "'");
                out << render_report(reports, ReportFormat::csv);
            }
        } else if (pipeline->parsed()) {
            stage = "pipeline";
            const auto cfg = settings(g, true);
            try {
                const auto result = run_pipeline(cfg, &std::cerr);
                std::cout << render_report(result.reports, ReportFormat::text);
            } catch (const StageError& e) {
                std::cerr << "error: stage " << to_string(e.stage()) << " failed: " << e.what() << '\n';
                return 1;
            }
        } else if (synth->parsed()) {
            stage = "synth";
            if (!synth_corpus.empty()) {
                CorpusOptions opts;
                opts.datasets = synth_datasets;
                opts.flows_per_class = synth_per_class;
                if (g.seed) opts.seed = *g.seed;
                std::cout << write_synthetic_corpus(synth_corpus, opts).string() << '\n';
            } else if (!synth_blueprint.empty()) {
                std::uint64_t seed = g.seed.value_or(1);
                auto flows = read_blueprint(synth_blueprint, seed);
                if (g.seed) seed = *g.seed;
                write_file(output_file(g, "capture.pcap"), generate_synthetic_capture(flows, seed));
            } else {
                throw ValidationError("synth needs --blueprint or --corpus");
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: stage " << stage << " failed: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
