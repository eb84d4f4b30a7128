/**
 * @file filterbank.h
 * @brief S1 kernels: first-derivative-of-Gaussian edges plus an optional spot.
 *
 * An edge filter at orientation theta responds to edges running along theta:
 * it is the Gaussian derivative taken along the normal theta + 90 degrees.
 * Angles are measured counterclockwise from the +x (column) axis with y
 * pointing up, i.e. towards lower row indices. All kernels are whitened and
 * unit-normalized.
 */
#pragma once

#include <span>
#include <vector>

namespace hmax {

enum class FilterKind { kEdge, kSpot };

struct Filter {
    int size = 0;                    ///< odd kernel side
    std::vector<double> weights;     ///< size*size, row-major
    FilterKind kind = FilterKind::kEdge;
    double orientation_deg = 0.0;    ///< meaningful for edges only

    double at(int r, int c) const { return weights[static_cast<std::size_t>(r) * size + c]; }
    bool operator==(const Filter&) const = default;
};

struct FilterBank {
    std::vector<Filter> filters;  ///< edges by increasing orientation, spot last
    int n_orientations = 0;
    bool has_spot = false;

    int kernel_size() const { return filters.empty() ? 0 : filters.front().size; }
    bool operator==(const FilterBank&) const = default;
};

/// size / 4, which keeps roughly 95% of the Gaussian mass inside the kernel.
inline double default_sigma(int size) { return size / 4.0; }

Filter make_edge_filter(double orientation_deg, int size, double sigma);
Filter make_spot_filter(int size, double sigma);
FilterBank build_filter_bank(int n_orientations, bool include_spot, int size, double sigma);

}  // namespace hmax
