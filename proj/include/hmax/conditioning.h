/**
 * @file conditioning.h
 * @brief Per-patch signal conditioning for S-layer inputs, stored filters and templates.
 *
 * Incoming patches are partially whitened, y = (x - alpha*mu) / (sigma + beta),
 * then scaled to unit length. Stored filters and templates are fully whitened
 * (mean removed, no saturation) and scaled to unit length.
 */
#pragma once

#include <span>
#include <vector>

namespace hmax {

/// Norms at or below this are treated as the zero vector.
inline constexpr double kZeroNormEpsilon = 1e-12;

enum class WhiteningMode {
    kPartial,  ///< y = (x - alpha*mu) / (sigma + beta), then unit length
    kBypass,   ///< raw patch, unit length only
};

struct WhiteningParams {
    double alpha = 0.98;  ///< fraction of the patch mean that is removed
    double beta = 3.0;    ///< semi-saturation constant added to sigma
    WhiteningMode mode = WhiteningMode::kPartial;

    void validate() const;
};

struct PatchStats {
    double mean = 0.0;
    double stddev = 0.0;  ///< population convention (divide by n)
};

PatchStats patch_stats(std::span<const double> x);

std::vector<double> partial_whiten(std::span<const double> patch, const WhiteningParams& params);
std::vector<double> unit_normalize(std::span<const double> patch);
std::vector<double> full_whiten_unit(std::span<const double> vec);

/// partial_whiten followed by unit_normalize, written into `out`.
///
/// Unlike partial_whiten this never throws on sigma + beta == 0: the divide is
/// a positive rescale that unit normalization removes, so it is skipped.
/// Returns the norm of the whitened patch before normalization.
double condition_patch(std::span<const double> patch, const WhiteningParams& params,
                       std::span<double> out);

/// In-place full whitening and unit normalization.
void full_whiten_unit_inplace(std::span<double> vec);

}  // namespace hmax
