#include <hmax/classify.h>
#include <hmax/binary_io.h>
#include <hmax/error.h>
#include <hmax/parallel.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hmax {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double log1p_exp_neg(double m) {
    // log(1 + exp(-m)) without overflow.
    return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

double sigmoid(double m) {
    if (m >= 0) return 1.0 / (1.0 + std::exp(-m));
    const double e = std::exp(m);
    return e / (1.0 + e);
}

struct OvrProblem {
    const Eigen::MatrixXd& gram;  // X X^T with the bias column included
    Eigen::VectorXd y;            // +1 / -1
    double cost;

    double objective(const Eigen::VectorXd& a, const Eigen::VectorXd& z) const {
        double loss = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) loss += log1p_exp_neg(y[i] * z[i]);
        return 0.5 * a.dot(z) + cost * loss;
    }
};

// Newton's method on the representer coefficients a, w = X^T a.
ClassTrace solve_ovr(const OvrProblem& prob, const TrainOptions& opt, Eigen::VectorXd& a) {
    const auto n = prob.y.size();
    const Eigen::MatrixXd& K = prob.gram;
    a = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);

    ClassTrace trace;
    double f = prob.objective(a, z);
    trace.objective.push_back(f);

    Eigen::VectorXd r(n), dvec(n), g(n);
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = sigmoid(prob.y[i] * z[i]);
            r[i] = (s - 1.0) * prob.y[i];
            dvec[i] = s * (1.0 - s);
        }
        // Weight-space gradient is X^T g.
        g = a + prob.cost * r;
        const Eigen::VectorXd Kg = K * g;
        const double gnorm = std::sqrt(std::max(0.0, g.dot(Kg)));
        if (gnorm <= opt.tolerance) break;

        // (I + C D K) d = -g gives the Newton direction X^T d.
        Eigen::MatrixXd H = prob.cost * dvec.asDiagonal() * K;
        H.diagonal().array() += 1.0;
        const Eigen::VectorXd d = H.partialPivLu().solve(-g);
        const Eigen::VectorXd Kd = K * d;
        const double slope = Kg.dot(d);
        if (!(slope < 0.0)) break;

        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Eigen::VectorXd a_new = a + step * d;
            const Eigen::VectorXd z_new = z + step * Kd;
            const double f_new = prob.objective(a_new, z_new);
            if (f_new <= f + 1e-4 * step * slope) {
                a = a_new;
                z = z_new;
                f = f_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        trace.objective.push_back(f);
    }
    return trace;
}

int check_inputs(const std::vector<FeatureVector>& features, std::span<const int> labels,
                 const std::vector<std::string>& classes) {
    if (classes.size() < 2) throw Error("training needs at least 2 classes");
    if (features.empty() || features.size() != labels.size()) throw Error("feature/label count mismatch");
    const std::size_t dim = features.front().size();
    std::vector<int> counts(classes.size(), 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != dim) throw Error("non-uniform feature length");
        for (double v : features[i]) {
            if (!std::isfinite(v)) throw Error("non-finite value in features");
        }
        if (labels[i] < 0 || labels[i] >= static_cast<int>(classes.size())) throw Error("label out of range");
        ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (counts[c] == 0) throw Error("class has no training samples: " + classes[c]);
    }
    return static_cast<int>(dim);
}

}  // namespace

std::vector<double> LinearModel::scores(std::span<const double> feature) const {
    if (static_cast<int>(feature.size()) != dim) throw Error("feature length does not match model");
    std::vector<double> out(weights.size());
    for (std::size_t c = 0; c < weights.size(); ++c) {
        const auto& w = weights[c];
        double s = w[static_cast<std::size_t>(dim)];
        for (int j = 0; j < dim; ++j) s += w[j] * feature[j];
        out[c] = s;
    }
    return out;
}

TrainResult train(const std::vector<FeatureVector>& features, std::span<const int> labels,
                  std::vector<std::string> classes, const TrainOptions& options) {
    if (!(options.cost > 0.0)) throw Error("classifier cost must be positive");
    const int dim = check_inputs(features, labels, classes);
    const auto n = static_cast<Eigen::Index>(features.size());

    RowMatrix X(n, dim + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::copy(features[i].begin(), features[i].end(), X.row(i).data());
        X(i, dim) = 1.0;
    }
    const Eigen::MatrixXd gram = X * X.transpose();

    TrainResult result;
    result.model.classes = std::move(classes);
    result.model.dim = dim;
    result.model.cost = options.cost;
    const std::size_t n_classes = result.model.classes.size();
    result.model.weights.assign(n_classes, std::vector<double>(static_cast<std::size_t>(dim) + 1, 0.0));
    result.traces.resize(n_classes);

    parallel_for(n_classes, options.threads, [&](std::size_t c) {
        OvrProblem prob{gram, Eigen::VectorXd(n), options.cost};
        for (Eigen::Index i = 0; i < n; ++i) prob.y[i] = labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
        Eigen::VectorXd a;
        ClassTrace trace = solve_ovr(prob, options, a);

        const Eigen::VectorXd w = X.transpose() * a;
        const Eigen::VectorXd z = X * w;
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) r[i] = (sigmoid(prob.y[i] * z[i]) - 1.0) * prob.y[i];
        const Eigen::VectorXd grad = w + options.cost * (X.transpose() * r);
        trace.gradient_norm = grad.norm();
        trace.converged = trace.gradient_norm <= options.tolerance;

        std::copy(w.data(), w.data() + w.size(), result.model.weights[c].begin());
        result.traces[c] = std::move(trace);
    });
    return result;
}

int predict(const LinearModel& model, std::span<const double> feature) {
    const auto s = model.scores(feature);
    int best = 0;
    for (int c = 1; c < static_cast<int>(s.size()); ++c) {
        if (s[c] > s[best]) best = c;
    }
    return best;
}

namespace {

// At least 9 significant digits; fixed notation unless the value is tiny.
std::string format_value(double v) {
    char buf[64];
    const double mag = std::abs(v);
    if (mag < 1e-9) {
        std::snprintf(buf, sizeof buf, "%.8e", v);
    } else {
        const int exponent = static_cast<int>(std::floor(std::log10(mag)));
        const int decimals = std::max(9, 8 - exponent);
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    }
    return buf;
}

}  // namespace

std::string format_sparse_line(int label, std::span<const double> feature) {
    std::string line = std::to_string(label);
    for (std::size_t j = 0; j < feature.size(); ++j) {
        if (feature[j] == 0.0) continue;
        line += ' ';
        line += std::to_string(j + 1);
        line += ':';
        line += format_value(feature[j]);
    }
    line += '\n';
    return line;
}

void export_sparse(const std::filesystem::path& path, const std::vector<FeatureVector>& features,
                   std::span<const int> labels) {
    if (features.size() != labels.size()) throw Error("feature/label count mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < features.size(); ++i) os << format_sparse_line(labels[i], features[i]);
    if (!os) throw Error("write failed: " + path.string());
}

SparseDataset read_sparse(const std::filesystem::path& path, int min_dim) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path.string());
    SparseDataset out;
    std::vector<std::vector<std::pair<int, double>>> rows;
    int dim = min_dim;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        int label = 0;
        if (!(ls >> label)) throw Error("bad label on line " + std::to_string(lineno));
        std::vector<std::pair<int, double>> row;
        std::string tok;
        while (ls >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw Error("bad token on line " + std::to_string(lineno));
            const int idx = std::stoi(tok.substr(0, colon));
            if (idx < 1) throw Error("index must be 1-based on line " + std::to_string(lineno));
            row.emplace_back(idx, std::stod(tok.substr(colon + 1)));
            dim = std::max(dim, idx);
        }
        out.labels.push_back(label);
        rows.push_back(std::move(row));
    }
    for (const auto& row : rows) {
        FeatureVector f(static_cast<std::size_t>(dim), 0.0);
        for (const auto& [idx, v] : row) f[idx - 1] = v;
        out.features.push_back(std::move(f));
    }
    return out;
}

namespace {
constexpr std::string_view kModelMagic = "HLRM";
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void save_model(const std::filesystem::path& path, const LinearModel& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    io::write_magic(os, kModelMagic);
    io::write_u32(os, kModelVersion);
    io::write_u32(os, static_cast<std::uint32_t>(model.classes.size()));
    for (const auto& name : model.classes) io::write_string(os, name);
    io::write_u32(os, static_cast<std::uint32_t>(model.dim));
    io::write_f64(os, model.cost);
    for (const auto& w : model.weights) {
        for (double v : w) io::write_f64(os, v);
    }
}

LinearModel load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    io::expect_magic(is, kModelMagic, "model");
    if (io::read_u32(is) != kModelVersion) throw Error("unsupported model version");
    LinearModel model;
    const auto n_classes = io::read_u32(is);
    if (n_classes > 100000) throw Error("corrupt model header");
    for (std::uint32_t c = 0; c < n_classes; ++c) model.classes.push_back(io::read_string(is));
    model.dim = static_cast<int>(io::read_u32(is));
    model.cost = io::read_f64(is);
    model.weights.assign(n_classes, std::vector<double>(static_cast<std::size_t>(model.dim) + 1));
    for (auto& w : model.weights) {
        for (double& v : w) v = io::read_f64(is);
    }
    return model;
}

}  // namespace hmax
