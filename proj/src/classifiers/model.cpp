#include "botflow/classifiers/model.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "botflow/error.hpp"

namespace botflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::string_view kMagic = "botflow-model";
constexpr int kVersion = 1;

std::string real(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void line(std::string_view key, auto&&... values) {
        out_ << key;
        ((out_ << ' ' << format(values)), ...);
        out_ << '\n';
    }
    void vec(std::string_view key, const std::vector<double>& v) {
        out_ << key << ' ' << v.size();
        for (double x : v) out_ << ' ' << real(x);
        out_ << '\n';
    }
    void scaler(const StandardizationParams& p) {
        vec("scaler_mean", p.mean);
        vec("scaler_std", p.stddev);
        out_ << "scaler_constant " << p.constant.size();
        for (bool b : p.constant) out_ << ' ' << (b ? 1 : 0);
        out_ << '\n';
    }

private:
    static std::string format(double v) { return real(v); }
    static std::string format(int v) { return std::to_string(v); }
    static std::string format(std::size_t v) { return std::to_string(v); }
    static std::string format(std::string_view v) { return std::string(v); }
    static std::string format(const char* v) { return v; }

    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) throw FormatError("model file ended unexpectedly");
        return w;
    }
    void expect(std::string_view key) {
        const auto w = word();
        if (w != key) throw FormatError("model file: expected '" + std::string(key) + "', found '" + w + "'");
    }
    double real() {
        const auto w = word();
        double v = 0;
        auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc{} || p != w.data() + w.size()) throw FormatError("model file: bad number '" + w + "'");
        return v;
    }
    template <typename Int>
    Int integer() {
        const auto w = word();
        Int v{};
        auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc{} || p != w.data() + w.size()) throw FormatError("model file: bad integer '" + w + "'");
        return v;
    }
    double keyed_real(std::string_view key) {
        expect(key);
        return real();
    }
    template <typename Int>
    Int keyed_int(std::string_view key) {
        expect(key);
        return integer<Int>();
    }
    std::vector<double> vec(std::string_view key) {
        expect(key);
        const auto n = integer<std::size_t>();
        std::vector<double> v(n);
        for (auto& x : v) x = real();
        return v;
    }
    StandardizationParams scaler() {
        StandardizationParams p;
        p.mean = vec("scaler_mean");
        p.stddev = vec("scaler_std");
        expect("scaler_constant");
        const auto n = integer<std::size_t>();
        p.constant.resize(n);
        for (std::size_t i = 0; i < n; ++i) p.constant[i] = integer<int>() != 0;
        if (p.stddev.size() != p.mean.size() || p.constant.size() != p.mean.size()) {
            throw FormatError("model file: inconsistent scaler widths");
        }
        return p;
    }

private:
    std::istream& in_;
};

}  // namespace

ModelKind kind_of(const ModelSpec& spec) {
    return std::visit(overloaded{[](const NaiveBayesParams&) { return ModelKind::nb; },
                                 [](const KnnParams&) { return ModelKind::knn; },
                                 [](const RandomForestParams&) { return ModelKind::rf; },
                                 [](const LogisticParams&) { return ModelKind::lr; }},
                      spec);
}

ModelKind kind_of(const Model& model) {
    return std::visit(overloaded{[](const GaussianNaiveBayes&) { return ModelKind::nb; },
                                 [](const KNearestNeighbors&) { return ModelKind::knn; },
                                 [](const RandomForest&) { return ModelKind::rf; },
                                 [](const LogisticRegression&) { return ModelKind::lr; }},
                      model);
}

ModelSpec default_spec(ModelKind kind, std::uint64_t seed) {
    switch (kind) {
        case ModelKind::nb: return NaiveBayesParams{};
        case ModelKind::knn: return KnnParams{};
        case ModelKind::rf: {
            RandomForestParams p;
            p.seed = seed;
            return p;
        }
        case ModelKind::lr: {
            LogisticParams p;
            p.seed = seed;
            return p;
        }
    }
    throw ValidationError("unknown model kind");
}

void validate_spec(const ModelSpec& spec) {
    std::visit(overloaded{
                   [](const NaiveBayesParams& p) {
                       if (!(p.var_smoothing >= 0)) throw ValidationError("NB var_smoothing must be >= 0");
                   },
                   [](const KnnParams& p) {
                       if (p.k < 1) throw ValidationError("KNN k must be >= 1");
                   },
                   [](const RandomForestParams& p) {
                       if (p.n_trees < 1) throw ValidationError("RF n_trees must be >= 1");
                       if (p.min_samples_split < 2) throw ValidationError("RF min_samples_split must be >= 2");
                       if (p.max_features < 0) throw ValidationError("RF max_features must be >= 0");
                   },
                   [](const LogisticParams& p) {
                       if (!(p.l2_lambda >= 0)) throw ValidationError("LR l2_lambda must be >= 0");
                       if (!(p.learning_rate > 0)) throw ValidationError("LR learning_rate must be > 0");
                       if (p.max_iters < 1) throw ValidationError("LR max_iters must be >= 1");
                       if (!(p.tol >= 0)) throw ValidationError("LR tol must be >= 0");
                   },
               },
               spec);
}

Model fit(const ModelSpec& spec, const Matrix& x, std::span<const int> y, Exec exec) {
    validate_spec(spec);
    return std::visit(overloaded{
                          [&](const NaiveBayesParams& p) -> Model {
                              GaussianNaiveBayes m(p);
                              m.fit(x, y);
                              return m;
                          },
                          [&](const KnnParams& p) -> Model {
                              KNearestNeighbors m(p);
                              m.fit(x, y);
                              return m;
                          },
                          [&](const RandomForestParams& p) -> Model {
                              RandomForest m(p);
                              m.fit(x, y, exec);
                              return m;
                          },
                          [&](const LogisticParams& p) -> Model {
                              LogisticRegression m(p);
                              m.fit(x, y, exec);
                              return m;
                          },
                      },
                      spec);
}

std::vector<int> predict(const Model& model, const Matrix& x, Exec exec) {
    return std::visit(overloaded{
                          [&](const GaussianNaiveBayes& m) { return m.predict(x); },
                          [&](const KNearestNeighbors& m) { return m.predict(x, exec); },
                          [&](const RandomForest& m) { return m.predict(x, exec); },
                          [&](const LogisticRegression& m) { return m.predict(x); },
                      },
                      model);
}

std::size_t model_width(const Model& model) {
    return std::visit([](const auto& m) { return m.width(); }, model);
}

void save_model(const Model& model, std::ostream& out) {
    Writer w(out);
    w.line(kMagic, kVersion);
    w.line("kind", to_string(kind_of(model)));
    w.line("width", model_width(model));
    std::visit(overloaded{
                   [&](const GaussianNaiveBayes& m) {
                       w.line("var_smoothing", m.params().var_smoothing);
                       w.line("epsilon", m.epsilon());
                       for (int c = 0; c < 2; ++c) {
                           w.line("class", c);
                           w.line("prior", m.prior(c));
                           w.vec("mean", m.mean(c));
                           w.vec("variance", m.variance(c));
                       }
                   },
                   [&](const KNearestNeighbors& m) {
                       w.line("k", m.params().k);
                       w.scaler(m.scaler());
                       w.line("rows", m.train().rows());
                       for (std::size_t i = 0; i < m.train().rows(); ++i) {
                           std::vector<double> r(m.train().row(i).begin(), m.train().row(i).end());
                           w.line("label", m.labels()[i]);
                           w.vec("x", r);
                       }
                   },
                   [&](const RandomForest& m) {
                       const auto& p = m.params();
                       w.line("n_trees", p.n_trees);
                       w.line("max_features", p.max_features);
                       w.line("min_samples_split", p.min_samples_split);
                       w.line("bootstrap", p.bootstrap ? 1 : 0);
                       w.line("seed", static_cast<std::uint64_t>(p.seed));
                       for (const auto& t : m.trees()) {
                           w.line("tree", t.nodes().size());
                           for (const auto& n : t.nodes()) {
                               w.line("node", n.feature, n.threshold, n.left, n.right, n.counts[0], n.counts[1]);
                           }
                       }
                   },
                   [&](const LogisticRegression& m) {
                       const auto& p = m.params();
                       w.line("l2_lambda", p.l2_lambda);
                       w.line("learning_rate", p.learning_rate);
                       w.line("max_iters", p.max_iters);
                       w.line("tol", p.tol);
                       w.line("seed", static_cast<std::uint64_t>(p.seed));
                       w.scaler(m.scaler());
                       w.vec("weights", m.weights());
                       w.line("bias", m.bias());
                   },
               },
               model);
    w.line("end");
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    save_model(model, out);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Model load_model(std::istream& in) {
    Reader r(in);
    r.expect(kMagic);
    const int version = r.integer<int>();
    if (version != kVersion) throw FormatError("unsupported model format version " + std::to_string(version));
    r.expect("kind");
    const ModelKind kind = [&] {
        try {
            return parse_model_kind(r.word());
        } catch (const ValidationError& e) {
            throw FormatError(e.what());
        }
    }();
    const auto width = r.keyed_int<std::size_t>("width");
    auto check_width = [&](std::size_t got) {
        if (got != width) throw FormatError("model file: state width does not match header");
    };
    Model model;
    switch (kind) {
        case ModelKind::nb: {
            NaiveBayesParams p;
            p.var_smoothing = r.keyed_real("var_smoothing");
            const double eps = r.keyed_real("epsilon");
            std::array<double, 2> prior{};
            std::array<std::vector<double>, 2> mean, var;
            for (int c = 0; c < 2; ++c) {
                if (r.keyed_int<int>("class") != c) throw FormatError("model file: class blocks out of order");
                prior[c] = r.keyed_real("prior");
                mean[c] = r.vec("mean");
                var[c] = r.vec("variance");
                check_width(mean[c].size());
                check_width(var[c].size());
            }
            GaussianNaiveBayes m(p);
            m.set_state(eps, prior, std::move(mean), std::move(var));
            model = std::move(m);
            break;
        }
        case ModelKind::knn: {
            KnnParams p;
            p.k = r.keyed_int<int>("k");
            auto scaler = r.scaler();
            check_width(scaler.width());
            const auto rows = r.keyed_int<std::size_t>("rows");
            Matrix train(rows, width);
            std::vector<int> labels(rows);
            for (std::size_t i = 0; i < rows; ++i) {
                labels[i] = r.keyed_int<int>("label");
                auto x = r.vec("x");
                check_width(x.size());
                std::copy(x.begin(), x.end(), train.row(i).begin());
            }
            KNearestNeighbors m(p);
            m.set_state(std::move(scaler), std::move(train), std::move(labels));
            model = std::move(m);
            break;
        }
        case ModelKind::rf: {
            RandomForestParams p;
            p.n_trees = r.keyed_int<int>("n_trees");
            p.max_features = r.keyed_int<int>("max_features");
            p.min_samples_split = r.keyed_int<int>("min_samples_split");
            p.bootstrap = r.keyed_int<int>("bootstrap") != 0;
            p.seed = r.keyed_int<std::uint64_t>("seed");
            std::vector<DecisionTree> trees(static_cast<std::size_t>(p.n_trees));
            for (auto& t : trees) {
                const auto count = r.keyed_int<std::size_t>("tree");
                auto& nodes = t.nodes();
                nodes.resize(count);
                for (auto& n : nodes) {
                    r.expect("node");
                    n.feature = r.integer<int>();
                    n.threshold = r.real();
                    n.left = r.integer<int>();
                    n.right = r.integer<int>();
                    n.counts[0] = r.real();
                    n.counts[1] = r.real();
                    if (n.feature >= static_cast<int>(width) ||
                        (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || static_cast<std::size_t>(n.left) >= count ||
                                            static_cast<std::size_t>(n.right) >= count))) {
                        throw FormatError("model file: malformed tree node");
                    }
                }
                if (nodes.empty()) throw FormatError("model file: empty tree");
            }
            RandomForest m(p);
            m.set_state(width, std::move(trees));
            model = std::move(m);
            break;
        }
        case ModelKind::lr: {
            LogisticParams p;
            p.l2_lambda = r.keyed_real("l2_lambda");
            p.learning_rate = r.keyed_real("learning_rate");
            p.max_iters = r.keyed_int<int>("max_iters");
            p.tol = r.keyed_real("tol");
            p.seed = r.keyed_int<std::uint64_t>("seed");
            auto scaler = r.scaler();
            check_width(scaler.width());
            auto w = r.vec("weights");
            check_width(w.size());
            const double b = r.keyed_real("bias");
            LogisticRegression m(p);
            m.set_state(std::move(scaler), std::move(w), b);
            model = std::move(m);
            break;
        }
    }
    r.expect("end");
    return model;
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model '" + path.string() + "'");
    return load_model(in);
}

}  // namespace botflow
