/**
 * @file classify.h
 * @brief One-vs-rest L2-regularized logistic regression on C2 features.
 *
 * Per class c the trainer minimizes
 *   0.5 ||w||^2 + C * sum_i log(1 + exp(-y_i w^T x_i)),  y_i = +1 iff label_i == c,
 * where x_i carries an appended constant 1 so the bias is regularized along
 * with the weights. The minimizer lies in the span of the training samples,
 * so Newton iterations run on the n x n Gram matrix; the stopping test is the
 * gradient norm in weight space.
 */
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hmax {

using FeatureVector = std::vector<double>;

struct LinearModel {
    std::vector<std::string> classes;
    int dim = 0;  ///< feature length without the bias slot
    double cost = 0.1;
    std::vector<std::vector<double>> weights;  ///< per class, dim + 1 with the bias last

    std::vector<double> scores(std::span<const double> feature) const;
};

struct TrainOptions {
    double cost = 0.1;
    double tolerance = 1e-4;  ///< on ||grad||_2 per class
    int max_iterations = 200;
    int threads = 1;
};

struct ClassTrace {
    std::vector<double> objective;  ///< one entry per iterate, starting at w = 0
    double gradient_norm = 0.0;     ///< at the returned weights
    bool converged = false;
};

struct TrainResult {
    LinearModel model;
    std::vector<ClassTrace> traces;
};

/// labels[i] indexes into `classes`.
TrainResult train(const std::vector<FeatureVector>& features, std::span<const int> labels,
                  std::vector<std::string> classes, const TrainOptions& options = {});

/// argmax of w^T x + b; ties go to the lowest class index.
int predict(const LinearModel& model, std::span<const double> feature);

/// `<label> <index>:<value> ...` per line, 1-based ascending indices, zeros omitted.
void export_sparse(const std::filesystem::path& path, const std::vector<FeatureVector>& features,
                   std::span<const int> labels);
std::string format_sparse_line(int label, std::span<const double> feature);

struct SparseDataset {
    std::vector<int> labels;
    std::vector<FeatureVector> features;
};

/// Features are densified to max(min_dim, largest index seen).
SparseDataset read_sparse(const std::filesystem::path& path, int min_dim = 0);

/// Layout: "HLRM", u32 version, u32 n_classes, class names (u32 length + bytes),
/// u32 dim, f64 cost, then n_classes * (dim + 1) float64 weights.
void save_model(const std::filesystem::path& path, const LinearModel& model);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace hmax
