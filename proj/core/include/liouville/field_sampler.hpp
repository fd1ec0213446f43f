#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "liouville/grid.hpp"
#include "liouville/kernels.hpp"

namespace liouville {

/// Thrown when a covariance admits neither a nonnegative circulant spectrum
/// (after one embedding enlargement) nor the dense fallback.
class CovarianceNotRepresentable : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Draws centered stationary Gaussian samples on a square grid whose
/// covariance matches a radial kernel at every in-grid lag.
///
/// Periodic grids use circulant embedding: the kernel is laid out on a torus
/// twice the grid side with minimal-image distances, the spectrum comes from
/// one FFT, and each sample is one FFT of spectrally colored white noise.
/// Negative spectrum entries within -1e-10 * trace are clamped; beyond that
/// the embedding torus is doubled once before giving up. Non-periodic grids
/// fall back to a dense factorization and are capped at 128 x 128.
///
/// Samplers are immutable after construction and safe to share across
/// threads; sample() allocates per-call scratch.
class StationaryFieldSampler {
public:
    StationaryFieldSampler(const KernelSpec& kernel, const GridSpec& grid);
    ~StationaryFieldSampler();

    StationaryFieldSampler(StationaryFieldSampler&&) noexcept;
    StationaryFieldSampler& operator=(StationaryFieldSampler&&) noexcept;

    /// One sample; deterministic in (kernel, grid, stream_seed).
    Grid2D sample(std::uint64_t stream_seed) const;

    const GridSpec& grid() const { return grid_; }
    /// Torus side actually used by the embedding (0 for the dense path).
    int embedding_side() const;

private:
    struct Impl;
    GridSpec grid_;
    std::unique_ptr<Impl> impl_;
};

/// One sample of decomposition layer n. Convenience wrapper over a
/// throwaway sampler; loops should build the sampler once instead.
Grid2D sample_layer(const SimulationParams& params, int n, const GridSpec& grid,
                    std::uint64_t master_seed, std::uint64_t replica = 0);

/// Layered field samples Y_1..Y_N with their partial sums X_n. A full stack
/// carries every level with its layer; a collapsed stack (LevelFieldSampler)
/// carries a single level and no layers.
struct FieldStack {
    GridSpec grid;
    SimulationParams params;
    std::vector<int> level_ids;        // level number behind each slot
    std::vector<Grid2D> layers;        // parallel to level_ids; may be empty
    std::vector<Grid2D> partial_sums;  // parallel to level_ids
    std::uint64_t seed = 0;

    int top_level() const { return level_ids.empty() ? 0 : level_ids.back(); }
    int index_of_level(int n) const;
    bool has_level(int n) const;

    /// Var X_n on the grid; also the normalization used by the measures.
    double level_variance(int n) const { return params.cumulative_variance(n); }
};

/// Builds the partial sums X_n = Y_1 + ... + Y_n from per-layer samples.
/// All layers must share one grid; sums are exact (ordered additions).
FieldStack assemble(const GridSpec& grid, const SimulationParams& params,
                    std::vector<Grid2D> layers, std::uint64_t seed);

/// Samples all N layers of a replica and assembles the stack. Layer k of
/// replica j draws from the stream (master, j, k).
FieldStack sample_stack(const SimulationParams& params, const GridSpec& grid,
                        std::uint64_t master_seed, std::uint64_t replica = 0);

/// Per-layer samplers reusable across replicas (spectra and tables are
/// built once). The cheapest way to run many-replica experiments.
class StackSampler {
public:
    StackSampler(const SimulationParams& params, const GridSpec& grid);

    FieldStack sample(std::uint64_t master_seed, std::uint64_t replica) const;

    /// Fresh sample of layer n alone (used by coupling experiments that
    /// redraw the top layer on a fixed lower stack).
    Grid2D sample_layer_only(int n, std::uint64_t master_seed,
                             std::uint64_t replica) const;

    const SimulationParams& params() const { return params_; }
    const GridSpec& grid() const { return grid_; }

private:
    SimulationParams params_;
    GridSpec grid_;
    std::vector<std::shared_ptr<StationaryFieldSampler>> layer_samplers_;
};

/// Samples X_n directly with the cumulative covariance (one synthesis
/// instead of n). Equal in law to assembling n layers; used by experiments
/// that only consume a single level. The returned stack exposes just that
/// level.
class LevelFieldSampler {
public:
    LevelFieldSampler(const SimulationParams& params, int level,
                      const GridSpec& grid);

    FieldStack sample(std::uint64_t master_seed, std::uint64_t replica) const;

    int level() const { return level_; }

private:
    SimulationParams params_;
    int level_;
    GridSpec grid_;
    std::shared_ptr<StationaryFieldSampler> sampler_;
};

/// Replaces the top layer of a stack with a fresh draw and rebuilds the top
/// partial sum. The lower levels stay untouched, which is exactly the
/// conditional resampling the martingale checks need.
void resample_top_layer(FieldStack& stack, const StackSampler& sampler,
                        std::uint64_t replica);

/// Bilinear interpolation of X_n at p. Exact at grid nodes. Non-periodic
/// grids reject points outside the extent; periodic grids wrap.
double field_at(const FieldStack& stack, int n, const Point& p);

/// Bilinear interpolation on a bare grid sample (same conventions).
double grid_value_at(const Grid2D& values, const GridSpec& grid, const Point& p);

}  // namespace liouville
