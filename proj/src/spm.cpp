#include <hmax/spm.h>
#include <hmax/error.h>

#include <algorithm>
#include <cmath>
#include <initializer_list>

namespace hmax {

namespace {

int round_boundary(int i, int dim, int n) {
    return static_cast<int>(std::lround(static_cast<double>(i) * dim / n));
}

std::vector<Region> pyramid(const S2CodeMap& codes, std::initializer_list<int> levels) {
    std::vector<Region> out;
    for (int n : levels) {
        auto r = partition_regions(codes.rows, codes.cols, n);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

// For every cell, the list of regions containing it.
std::vector<std::vector<int>> cell_membership(const S2CodeMap& codes, const std::vector<Region>& regions) {
    std::vector<std::vector<int>> member(codes.cells.size());
    for (int g = 0; g < static_cast<int>(regions.size()); ++g) {
        const Region& reg = regions[g];
        for (int r = reg.row0; r < reg.row1; ++r) {
            for (int c = reg.col0; c < reg.col1; ++c) member[static_cast<std::size_t>(r) * codes.cols + c].push_back(g);
        }
    }
    return member;
}

// Signed max per (template, region); entries with no coefficient pool to 0.
std::vector<double> signed_max(const S2CodeMap& codes, int p, const std::vector<Region>& regions) {
    const std::size_t nreg = regions.size();
    std::vector<double> best(static_cast<std::size_t>(p) * nreg, 0.0);
    std::vector<char> seen(best.size(), 0);
    const auto member = cell_membership(codes, regions);
    for (std::size_t cell = 0; cell < codes.cells.size(); ++cell) {
        const SparseCode& code = codes.cells[cell];
        for (std::size_t i = 0; i < code.indices.size(); ++i) {
            const std::size_t base = static_cast<std::size_t>(code.indices[i]) * nreg;
            const double v = code.coefficients[i];
            for (int g : member[cell]) {
                const std::size_t slot = base + g;
                if (!seen[slot] || v > best[slot]) {
                    best[slot] = v;
                    seen[slot] = 1;
                }
            }
        }
    }
    return best;
}

// Positive then negative rectified max per (template, region), template-major.
std::vector<double> polarity_max(const S2CodeMap& codes, int p, const std::vector<Region>& regions) {
    const std::size_t nreg = regions.size();
    std::vector<double> out(static_cast<std::size_t>(p) * 2 * nreg, 0.0);
    const auto member = cell_membership(codes, regions);
    for (std::size_t cell = 0; cell < codes.cells.size(); ++cell) {
        const SparseCode& code = codes.cells[cell];
        for (std::size_t i = 0; i < code.indices.size(); ++i) {
            const std::size_t base = static_cast<std::size_t>(code.indices[i]) * 2 * nreg;
            const double pos = std::max(code.coefficients[i], 0.0);
            const double neg = std::max(-code.coefficients[i], 0.0);
            for (int g : member[cell]) {
                out[base + g] = std::max(out[base + g], pos);
                out[base + nreg + g] = std::max(out[base + nreg + g], neg);
            }
        }
    }
    return out;
}

void check_codes(const S2CodeMap& codes, int p) {
    if (codes.rows < 1 || codes.cols < 1 || codes.cells.size() != static_cast<std::size_t>(codes.rows) * codes.cols)
        throw Error("empty or malformed S2 code map");
    if (p < 1) throw Error("template count must be positive");
    for (const auto& cell : codes.cells) {
        for (int t : cell.indices) {
            if (t < 0 || t >= p) throw Error("code index out of range");
        }
    }
}

}  // namespace

SpmMode parse_spm_mode(const std::string& name) {
    if (name == "full") return SpmMode::kFull;
    if (name == "global-max") return SpmMode::kGlobalMax;
    if (name == "spm3") return SpmMode::kSpm3;
    if (name == "spm3-polarity") return SpmMode::kSpm3Polarity;
    throw Error("unknown spm mode: " + name);
}

std::string to_string(SpmMode mode) {
    switch (mode) {
        case SpmMode::kFull: return "full";
        case SpmMode::kGlobalMax: return "global-max";
        case SpmMode::kSpm3: return "spm3";
        case SpmMode::kSpm3Polarity: return "spm3-polarity";
    }
    return "full";
}

int features_per_template(SpmMode mode) {
    switch (mode) {
        case SpmMode::kFull: return kFeaturesPerTemplate;
        case SpmMode::kGlobalMax: return 1;
        case SpmMode::kSpm3: return kPyramidBRegions;
        case SpmMode::kSpm3Polarity: return 2 * kPyramidBRegions;
    }
    return kFeaturesPerTemplate;
}

std::vector<Region> partition_regions(int grid_h, int grid_w, int n) {
    if (grid_h < 1 || grid_w < 1 || n < 1) throw Error("partition needs positive grid and level");
    std::vector<Region> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out.push_back({round_boundary(i, grid_h, n), round_boundary(i + 1, grid_h, n),
                           round_boundary(j, grid_w, n), round_boundary(j + 1, grid_w, n)});
        }
    }
    return out;
}

std::vector<double> pool_pyramid_a(const S2CodeMap& codes, int p) {
    check_codes(codes, p);
    return signed_max(codes, p, pyramid(codes, {1, 3}));
}

std::vector<double> pool_pyramid_b(const S2CodeMap& codes, int p) {
    check_codes(codes, p);
    return polarity_max(codes, p, pyramid(codes, {1, 2, 4}));
}

std::vector<double> c2_features(const S2CodeMap& codes, int p, SpmMode mode) {
    check_codes(codes, p);
    switch (mode) {
        case SpmMode::kGlobalMax: return signed_max(codes, p, pyramid(codes, {1}));
        case SpmMode::kSpm3: return signed_max(codes, p, pyramid(codes, {1, 2, 4}));
        case SpmMode::kSpm3Polarity: return pool_pyramid_b(codes, p);
        case SpmMode::kFull: break;
    }
    const auto a = pool_pyramid_a(codes, p);
    const auto b = pool_pyramid_b(codes, p);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(p) * kFeaturesPerTemplate);
    for (int t = 0; t < p; ++t) {
        const auto ab = a.begin() + static_cast<std::ptrdiff_t>(t) * kPyramidARegions;
        const auto bb = b.begin() + static_cast<std::ptrdiff_t>(t) * 2 * kPyramidBRegions;
        out.insert(out.end(), ab, ab + kPyramidARegions);
        out.insert(out.end(), bb, bb + 2 * kPyramidBRegions);
    }
    return out;
}

}  // namespace hmax
