#include <hmax/llc.h>
#include <hmax/binary_io.h>
#include <hmax/error.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace hmax {

namespace {

constexpr int kMaxRedraws = 100;

double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

void all_dots(std::span<const double> patch, const TemplateDictionary& dict, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(dict.p));
    const std::size_t dim = static_cast<std::size_t>(dict.dim);
    for (int t = 0; t < dict.p; ++t) out[t] = dot(dict.weights.data() + t * dim, patch.data(), dim);
}

// k best scores, ties to the lower index, written ascending into `out`.
void top_k(const std::vector<double>& scores, int k, std::vector<int>& out) {
    out.resize(scores.size());
    std::iota(out.begin(), out.end(), 0);
    auto better = [&](int a, int b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); };
    if (k < static_cast<int>(out.size())) {
        std::nth_element(out.begin(), out.begin() + (k - 1), out.end(), better);
        out.resize(static_cast<std::size_t>(k));
    }
    std::sort(out.begin(), out.end());
}

// Solves (G + lambda I) c = rhs in place via Cholesky; G is the k x k Gram
// matrix of the basis, row-major.
void ridge_solve(std::vector<double>& gram, int k, double lambda, std::vector<double>& rhs) {
    double max_diag = 0.0;
    for (int i = 0; i < k; ++i) {
        gram[i * k + i] += lambda;
        max_diag = std::max(max_diag, gram[i * k + i]);
    }
    const double tiny = 1e-12 * std::max(1.0, max_diag);
    for (int j = 0; j < k; ++j) {
        double d = gram[j * k + j];
        for (int m = 0; m < j; ++m) d -= gram[j * k + m] * gram[j * k + m];
        if (!(d > tiny)) throw Error("rank-deficient basis; set lambda > 0");
        const double l = std::sqrt(d);
        gram[j * k + j] = l;
        for (int i = j + 1; i < k; ++i) {
            double s = gram[i * k + j];
            for (int m = 0; m < j; ++m) s -= gram[i * k + m] * gram[j * k + m];
            gram[i * k + j] = s / l;
        }
    }
    for (int i = 0; i < k; ++i) {
        double s = rhs[i];
        for (int m = 0; m < i; ++m) s -= gram[i * k + m] * rhs[m];
        rhs[i] = s / gram[i * k + i];
    }
    for (int i = k - 1; i >= 0; --i) {
        double s = rhs[i];
        for (int m = i + 1; m < k; ++m) s -= gram[m * k + i] * rhs[m];
        rhs[i] = s / gram[i * k + i];
    }
}

void solve_selected(std::span<const int> basis, const TemplateDictionary& dict, double lambda,
                    std::vector<double>& gram, std::vector<double>& rhs) {
    const int k = static_cast<int>(basis.size());
    const std::size_t dim = static_cast<std::size_t>(dict.dim);
    gram.assign(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
        const double* di = dict.weights.data() + basis[i] * dim;
        for (int j = 0; j <= i; ++j) {
            const double g = dot(di, dict.weights.data() + basis[j] * dim, dim);
            gram[i * k + j] = g;
            gram[j * k + i] = g;
        }
    }
    ridge_solve(gram, k, lambda, rhs);
}

}  // namespace

void LLCParams::validate(int p) const {
    if (k < 1 || k > p) throw Error("k must lie in [1, p]");
    if (!(lambda >= 0.0)) throw Error("lambda must be nonnegative");
    whitening.validate();
}

std::vector<double> flatten_window(const C1Stack& stack, int row, int col) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(stack.n_planes()) * kTemplateSide * kTemplateSide);
    for (const Plane& plane : stack.planes) {
        for (int dr = 0; dr < kTemplateSide; ++dr) {
            const auto src = plane.row(row + dr).subspan(col, kTemplateSide);
            out.insert(out.end(), src.begin(), src.end());
        }
    }
    return out;
}

TemplateDictionary sample_templates(std::span<const C1Stack* const> stacks, int p, std::uint64_t seed) {
    if (p < 1) throw Error("template count must be positive");

    std::vector<std::uint64_t> offsets{0};
    int n_planes = -1;
    for (const C1Stack* s : stacks) {
        const std::uint64_t windows =
            (s->rows >= kTemplateSide && s->cols >= kTemplateSide)
                ? static_cast<std::uint64_t>(s->rows - kTemplateSide + 1) * (s->cols - kTemplateSide + 1)
                : 0;
        if (windows > 0) {
            if (n_planes >= 0 && s->n_planes() != n_planes) throw Error("C1 stacks disagree on plane count");
            n_planes = s->n_planes();
        }
        offsets.push_back(offsets.back() + windows);
    }
    if (offsets.back() == 0) throw Error("no C1 stack admits a 4x4 window");

    TemplateDictionary dict;
    dict.p = p;
    dict.dim = n_planes * kTemplateSide * kTemplateSide;
    dict.seed = seed;
    dict.weights.reserve(static_cast<std::size_t>(p) * dict.dim);
    dict.origins.reserve(static_cast<std::size_t>(p));

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> pick(0, offsets.back() - 1);
    for (int t = 0; t < p; ++t) {
        std::vector<double> tmpl;
        WindowOrigin origin;
        for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
            const std::uint64_t u = pick(rng);
            const auto it = std::upper_bound(offsets.begin(), offsets.end(), u);
            const auto si = static_cast<std::size_t>(it - offsets.begin() - 1);
            const std::uint64_t local = u - offsets[si];
            const C1Stack& s = *stacks[si];
            const auto ncols = static_cast<std::uint64_t>(s.cols - kTemplateSide + 1);
            origin = {static_cast<int>(si), static_cast<int>(local / ncols), static_cast<int>(local % ncols)};
            tmpl = flatten_window(s, origin.row, origin.col);
            full_whiten_unit_inplace(tmpl);
            if (std::any_of(tmpl.begin(), tmpl.end(), [](double v) { return v != 0.0; })) break;
        }
        dict.weights.insert(dict.weights.end(), tmpl.begin(), tmpl.end());
        dict.origins.push_back(origin);
    }
    return dict;
}

TemplateDictionary sample_templates(std::span<const C1Stack> stacks, int p, std::uint64_t seed) {
    std::vector<const C1Stack*> ptrs;
    ptrs.reserve(stacks.size());
    for (const auto& s : stacks) ptrs.push_back(&s);
    return sample_templates(std::span<const C1Stack* const>(ptrs), p, seed);
}

std::vector<int> knn_select(std::span<const double> patch, const TemplateDictionary& dict, int k) {
    if (static_cast<int>(patch.size()) != dict.dim) throw Error("patch length does not match template length");
    if (k < 1 || k > dict.p) throw Error("k must lie in [1, p]");
    std::vector<double> scores;
    all_dots(patch, dict, scores);
    std::vector<int> idx;
    top_k(scores, k, idx);
    return idx;
}

std::vector<double> solve_code(std::span<const double> patch, std::span<const int> basis,
                               const TemplateDictionary& dict, double lambda) {
    if (static_cast<int>(patch.size()) != dict.dim) throw Error("patch length does not match template length");
    if (!(lambda >= 0.0)) throw Error("lambda must be nonnegative");
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (basis[i] < 0 || basis[i] >= dict.p) throw Error("basis index out of range");
        for (std::size_t j = 0; j < i; ++j) {
            if (basis[i] == basis[j]) throw Error("basis indices must be distinct");
        }
    }
    std::vector<double> rhs(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        rhs[i] = dot(dict.at(basis[i]).data(), patch.data(), patch.size());
    }
    std::vector<double> gram;
    solve_selected(basis, dict, lambda, gram, rhs);
    return rhs;
}

S2CodeMap s2_encode(const C1Stack& stack, const TemplateDictionary& dict, const LLCParams& params) {
    params.validate(dict.p);
    if (stack.rows < kTemplateSide || stack.cols < kTemplateSide) throw Error("C1 stack smaller than 4x4");
    if (stack.n_planes() * kTemplateSide * kTemplateSide != dict.dim) throw Error("C1 plane count does not match dictionary");

    S2CodeMap out;
    out.rows = stack.rows - kTemplateSide + 1;
    out.cols = stack.cols - kTemplateSide + 1;
    out.cells.resize(static_cast<std::size_t>(out.rows) * out.cols);

    std::vector<double> patch(static_cast<std::size_t>(dict.dim));
    std::vector<double> scores;
    std::vector<int> basis;
    std::vector<double> gram;
    std::vector<double> rhs;
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            const auto raw = flatten_window(stack, r, c);
            condition_patch(raw, params.whitening, patch);
            all_dots(patch, dict, scores);
            top_k(scores, params.k, basis);
            rhs.resize(basis.size());
            for (std::size_t i = 0; i < basis.size(); ++i) rhs[i] = scores[basis[i]];
            solve_selected(basis, dict, params.lambda, gram, rhs);

            SparseCode& code = out.cells[static_cast<std::size_t>(r) * out.cols + c];
            for (std::size_t i = 0; i < basis.size(); ++i) {
                if (rhs[i] != 0.0) {
                    code.indices.push_back(basis[i]);
                    code.coefficients.push_back(rhs[i]);
                }
            }
        }
    }
    return out;
}

namespace {
constexpr std::string_view kDictMagic = "HDIC";
constexpr std::uint32_t kDictVersion = 1;
}  // namespace

void write_dictionary(const std::filesystem::path& path, const TemplateDictionary& dict) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    io::write_magic(os, kDictMagic);
    io::write_u32(os, kDictVersion);
    io::write_u32(os, static_cast<std::uint32_t>(dict.p));
    io::write_u32(os, static_cast<std::uint32_t>(dict.dim));
    io::write_u64(os, dict.seed);
    for (double v : dict.weights) io::write_f32(os, static_cast<float>(v));
}

TemplateDictionary read_dictionary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    io::expect_magic(is, kDictMagic, "template dictionary");
    if (io::read_u32(is) != kDictVersion) throw Error("unsupported dictionary version");
    TemplateDictionary dict;
    dict.p = static_cast<int>(io::read_u32(is));
    dict.dim = static_cast<int>(io::read_u32(is));
    dict.seed = io::read_u64(is);
    if (dict.p < 1 || dict.dim < 2 || dict.p > (1 << 22) || dict.dim > (1 << 16)) throw Error("corrupt dictionary header");
    dict.weights.resize(static_cast<std::size_t>(dict.p) * dict.dim);
    for (double& v : dict.weights) v = io::read_f32(is);
    for (int t = 0; t < dict.p; ++t) {
        std::span<double> row(dict.weights.data() + static_cast<std::size_t>(t) * dict.dim,
                              static_cast<std::size_t>(dict.dim));
        full_whiten_unit_inplace(row);
    }
    return dict;
}

}  // namespace hmax
