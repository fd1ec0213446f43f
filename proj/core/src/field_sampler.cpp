#include "liouville/field_sampler.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>

#include <Eigen/Dense>

#include "liouville/rng.hpp"

namespace liouville {

namespace {

// FFTW planning is not thread safe; execution on distinct buffers is.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

struct PlanHandle {
    fftw_plan plan = nullptr;
    ~PlanHandle() {
        if (plan) {
            std::lock_guard<std::mutex> lock(fftw_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

// One in-place forward c2c plan per torus side, shared process-wide.
fftw_plan forward_plan(int side) {
    static std::map<int, std::unique_ptr<PlanHandle>> plans;
    std::lock_guard<std::mutex> lock(fftw_mutex());
    auto it = plans.find(side);
    if (it == plans.end()) {
        const std::size_t n = static_cast<std::size_t>(side) * side;
        fftw_complex* buf = fftw_alloc_complex(n);
        auto handle = std::make_unique<PlanHandle>();
        handle->plan =
            fftw_plan_dft_2d(side, side, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_free(buf);
        it = plans.emplace(side, std::move(handle)).first;
    }
    return it->second->plan;
}

struct FftwBuffer {
    fftw_complex* data = nullptr;
    explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

double kernel_lag_value(const KernelSpec& spec, const RadialTable* table,
                        double r) {
    if (table) return (*table)(r);
    if (r == 0) return *spec.value_at_zero();
    return spec.evaluate(r);
}

}  // namespace

// ---------------------------------------------------------------------------
// StationaryFieldSampler

struct StationaryFieldSampler::Impl {
    enum class Mode { circulant, dense };
    Mode mode = Mode::circulant;

    // Circulant path.
    int embed = 0;
    std::vector<double> colored_scale;  // sqrt(eigenvalue) / embed per mode

    // Dense path: factor F with F F^T = Gram, row major, res^2 x res^2.
    Eigen::MatrixXd dense_factor;

    bool build_circulant(const KernelSpec& kernel, const GridSpec& grid,
                         int embed_side) {
        const double h = grid.spacing();
        const std::size_t n = static_cast<std::size_t>(embed_side) * embed_side;

        std::unique_ptr<RadialTable> table;
        if (kernel.variant == KernelVariant::layer ||
            kernel.variant == KernelVariant::k_seed) {
            const double r_max =
                0.5 * std::sqrt(2.0) * embed_side * h + 2.0 * h;
            table = std::make_unique<RadialTable>(kernel, r_max);
        }

        FftwBuffer buf(n);
        const int half = embed_side / 2;
        for (int i = 0; i < embed_side; ++i) {
            const int di = i <= half ? i : embed_side - i;
            for (int j = 0; j < embed_side; ++j) {
                const int dj = j <= half ? j : embed_side - j;
                const double r = h * std::sqrt(double(di) * di + double(dj) * dj);
                const std::size_t idx = static_cast<std::size_t>(i) * embed_side + j;
                buf.data[idx][0] = kernel_lag_value(kernel, table.get(), r);
                buf.data[idx][1] = 0.0;
            }
        }

        fftw_plan plan = forward_plan(embed_side);
        fftw_execute_dft(plan, buf.data, buf.data);

        const double variance = kernel_lag_value(kernel, table.get(), 0.0);
        const double tolerance = 1e-10 * variance * static_cast<double>(n);
        double min_eig = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            min_eig = std::min(min_eig, buf.data[k][0]);
        }
        if (min_eig < -tolerance) return false;

        colored_scale.resize(n);
        const double inv_side = 1.0 / embed_side;
        for (std::size_t k = 0; k < n; ++k) {
            const double eig = std::max(buf.data[k][0], 0.0);
            colored_scale[k] = std::sqrt(eig) * inv_side;
        }
        embed = embed_side;
        mode = Mode::circulant;
        return true;
    }

    bool build_dense(const KernelSpec& kernel, const GridSpec& grid) {
        const int res = grid.resolution;
        if (res > 128) return false;
        const std::size_t n = static_cast<std::size_t>(res) * res;
        const double h = grid.spacing();

        Eigen::MatrixXd gram(n, n);
        const double variance = *kernel.value_at_zero();
        for (std::size_t a = 0; a < n; ++a) {
            const int ia = static_cast<int>(a) / res, ja = static_cast<int>(a) % res;
            gram(a, a) = variance;
            for (std::size_t b = a + 1; b < n; ++b) {
                const int ib = static_cast<int>(b) / res, jb = static_cast<int>(b) % res;
                const double di = (ia - ib) * h, dj = (ja - jb) * h;
                const double v = kernel.evaluate(std::sqrt(di * di + dj * dj));
                gram(a, b) = v;
                gram(b, a) = v;
            }
        }

        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() == Eigen::Success) {
            dense_factor = llt.matrixL();
            mode = Mode::dense;
            return true;
        }

        // Discretization can leave tiny negative eigenvalues; clip them.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success) return false;
        const double tolerance = 1e-10 * gram.trace();
        if (eig.eigenvalues().minCoeff() < -tolerance) return false;
        Eigen::VectorXd scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        dense_factor = eig.eigenvectors() * scale.asDiagonal();
        mode = Mode::dense;
        return true;
    }
};

StationaryFieldSampler::StationaryFieldSampler(const KernelSpec& kernel,
                                               const GridSpec& grid)
    : grid_(grid), impl_(std::make_unique<Impl>()) {
    grid.validate();
    kernel.validate();
    if (!kernel.samplable()) {
        throw CovarianceNotRepresentable(
            "sampler: kernel '" + to_string(kernel.variant) +
            "' has no finite variance");
    }

    if (impl_->build_circulant(kernel, grid, 2 * grid.resolution)) return;
    if (impl_->build_circulant(kernel, grid, 4 * grid.resolution)) return;
    if (!grid.periodic && impl_->build_dense(kernel, grid)) return;
    throw CovarianceNotRepresentable(
        "covariance not representable at this resolution");
}

StationaryFieldSampler::~StationaryFieldSampler() = default;
StationaryFieldSampler::StationaryFieldSampler(StationaryFieldSampler&&) noexcept =
    default;
StationaryFieldSampler& StationaryFieldSampler::operator=(
    StationaryFieldSampler&&) noexcept = default;

int StationaryFieldSampler::embedding_side() const {
    return impl_->mode == Impl::Mode::circulant ? impl_->embed : 0;
}

Grid2D StationaryFieldSampler::sample(std::uint64_t stream_seed) const {
    const int res = grid_.resolution;
    Grid2D out(res);
    GaussianRng rng(stream_seed);

    if (impl_->mode == Impl::Mode::dense) {
        const std::size_t n = static_cast<std::size_t>(res) * res;
        Eigen::VectorXd z(n);
        for (std::size_t i = 0; i < n; ++i) z(i) = rng.normal();
        Eigen::VectorXd x = impl_->dense_factor * z;
        std::copy(x.data(), x.data() + n, out.data().begin());
        return out;
    }

    const int embed = impl_->embed;
    const std::size_t n = static_cast<std::size_t>(embed) * embed;
    FftwBuffer buf(n);
    const double* scale = impl_->colored_scale.data();
    for (std::size_t k = 0; k < n; ++k) {
        const double a = rng.normal();
        const double b = rng.normal();
        buf.data[k][0] = scale[k] * a;
        buf.data[k][1] = scale[k] * b;
    }
    fftw_execute_dft(forward_plan(embed), buf.data, buf.data);
    // The real part of the colored transform carries the target covariance.
    for (int i = 0; i < res; ++i) {
        for (int j = 0; j < res; ++j) {
            out.at(i, j) = buf.data[static_cast<std::size_t>(i) * embed + j][0];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Layers and stacks.

namespace {

std::uint64_t layer_stream(std::uint64_t master, std::uint64_t replica, int layer) {
    return derive_stream(
        master, replica,
        static_cast<std::uint64_t>(StreamPurpose::field_layer_base) +
            static_cast<std::uint64_t>(layer));
}

}  // namespace

Grid2D sample_layer(const SimulationParams& params, int n, const GridSpec& grid,
                    std::uint64_t master_seed, std::uint64_t replica) {
    params.validate();
    if (n == 1) return Grid2D(grid.resolution, 0.0);
    StationaryFieldSampler sampler(KernelSpec::layer_kernel(params, n), grid);
    return sampler.sample(layer_stream(master_seed, replica, n));
}

FieldStack assemble(const GridSpec& grid, const SimulationParams& params,
                    std::vector<Grid2D> layers, std::uint64_t seed) {
    params.validate();
    if (layers.empty()) throw ParameterError("assemble: no layers");
    for (const auto& layer : layers) {
        if (layer.resolution() != grid.resolution)
            throw ParameterError("assemble: layer does not match the grid");
    }

    FieldStack stack;
    stack.grid = grid;
    stack.params = params;
    stack.seed = seed;
    stack.layers = std::move(layers);
    stack.level_ids.resize(stack.layers.size());
    for (std::size_t i = 0; i < stack.layers.size(); ++i)
        stack.level_ids[i] = static_cast<int>(i) + 1;

    stack.partial_sums.reserve(stack.layers.size());
    stack.partial_sums.push_back(stack.layers.front());
    for (std::size_t n = 1; n < stack.layers.size(); ++n) {
        Grid2D sum = stack.partial_sums.back();
        const auto& layer = stack.layers[n].data();
        auto& dst = sum.data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += layer[k];
        stack.partial_sums.push_back(std::move(sum));
        // Re-derive the stored layer from the rounded sums so that
        // partial_sums[n] - partial_sums[n-1] == layers[n] holds bit for bit.
        auto& stored = stack.layers[n].data();
        const auto& hi = stack.partial_sums[n].data();
        const auto& lo = stack.partial_sums[n - 1].data();
        for (std::size_t k = 0; k < stored.size(); ++k) stored[k] = hi[k] - lo[k];
    }
    return stack;
}

FieldStack sample_stack(const SimulationParams& params, const GridSpec& grid,
                        std::uint64_t master_seed, std::uint64_t replica) {
    return StackSampler(params, grid).sample(master_seed, replica);
}

StackSampler::StackSampler(const SimulationParams& params, const GridSpec& grid)
    : params_(params), grid_(grid) {
    params_.validate();
    grid_.validate();
    layer_samplers_.resize(params_.truncation);
    for (int n = 2; n <= params_.truncation; ++n) {
        layer_samplers_[n - 1] = std::make_shared<StationaryFieldSampler>(
            KernelSpec::layer_kernel(params_, n), grid_);
    }
}

Grid2D StackSampler::sample_layer_only(int n, std::uint64_t master_seed,
                                       std::uint64_t replica) const {
    if (n < 1 || n > params_.truncation)
        throw ParameterError("stack sampler: layer index out of range");
    if (n == 1) return Grid2D(grid_.resolution, 0.0);
    return layer_samplers_[n - 1]->sample(layer_stream(master_seed, replica, n));
}

FieldStack StackSampler::sample(std::uint64_t master_seed,
                                std::uint64_t replica) const {
    std::vector<Grid2D> layers;
    layers.reserve(params_.truncation);
    for (int n = 1; n <= params_.truncation; ++n) {
        layers.push_back(sample_layer_only(n, master_seed, replica));
    }
    return assemble(grid_, params_, std::move(layers), master_seed);
}

LevelFieldSampler::LevelFieldSampler(const SimulationParams& params, int level,
                                     const GridSpec& grid)
    : params_(params), level_(level), grid_(grid) {
    params_.validate();
    grid_.validate();
    if (level < 1 || level > params_.truncation)
        throw ParameterError("level sampler: level out of range");
    if (level > 1) {
        // X_n is Gaussian with the cumulative covariance, so one synthesis
        // with the [1, c_n] kernel is equal in law to summing n layers.
        KernelSpec spec;
        spec.variant = KernelVariant::layer;
        spec.mass = params_.mass;
        spec.schedule = {1.0, params_.scale_schedule[level - 1]};
        spec.layer_index = 2;
        sampler_ = std::make_shared<StationaryFieldSampler>(spec, grid_);
    }
}

FieldStack LevelFieldSampler::sample(std::uint64_t master_seed,
                                     std::uint64_t replica) const {
    FieldStack stack;
    stack.grid = grid_;
    stack.params = params_;
    stack.seed = master_seed;
    stack.level_ids = {level_};
    if (sampler_) {
        stack.partial_sums.push_back(
            sampler_->sample(layer_stream(master_seed, replica, level_)));
    } else {
        stack.partial_sums.emplace_back(grid_.resolution, 0.0);
    }
    return stack;
}

void resample_top_layer(FieldStack& stack, const StackSampler& sampler,
                        std::uint64_t replica) {
    if (stack.layers.size() != stack.partial_sums.size() || stack.layers.empty())
        throw ParameterError("resample: stack does not carry its layers");
    const int top = stack.top_level();
    const int idx = stack.index_of_level(top);
    Grid2D fresh = sampler.sample_layer_only(top, stack.seed, replica);

    const Grid2D zero(stack.grid.resolution, 0.0);
    const auto& below =
        idx >= 1 ? stack.partial_sums[idx - 1].data() : zero.data();
    auto& sum = stack.partial_sums[idx].data();
    auto& stored = stack.layers[idx].data();
    const auto& draw = fresh.data();
    for (std::size_t k = 0; k < sum.size(); ++k) {
        sum[k] = below[k] + draw[k];
        stored[k] = sum[k] - below[k];
    }
}

// ---------------------------------------------------------------------------
// Interpolation.

int FieldStack::index_of_level(int n) const {
    for (std::size_t i = 0; i < level_ids.size(); ++i) {
        if (level_ids[i] == n) return static_cast<int>(i);
    }
    throw ParameterError("field stack: level not present");
}

bool FieldStack::has_level(int n) const {
    for (int id : level_ids) {
        if (id == n) return true;
    }
    return false;
}

double grid_value_at(const Grid2D& values, const GridSpec& grid, const Point& p) {
    const int res = grid.resolution;
    const double h = grid.spacing();
    double u = (p.x + 0.5 * grid.extent) / h;
    double v = (p.y + 0.5 * grid.extent) / h;

    if (grid.periodic) {
        const double span = res;
        u -= span * std::floor(u / span);
        v -= span * std::floor(v / span);
    } else {
        if (!grid.contains(p))
            throw DomainError("field: point outside the grid extent");
        u = std::clamp(u, 0.0, double(res - 1));
        v = std::clamp(v, 0.0, double(res - 1));
    }

    int i0 = static_cast<int>(u);
    int j0 = static_cast<int>(v);
    if (!grid.periodic) {
        i0 = std::min(i0, res - 2);
        j0 = std::min(j0, res - 2);
    }
    const double fu = u - i0;
    const double fv = v - j0;
    const int i1 = grid.periodic ? (i0 + 1) % res : i0 + 1;
    const int j1 = grid.periodic ? (j0 + 1) % res : j0 + 1;
    const int iw = grid.periodic ? i0 % res : i0;
    const int jw = grid.periodic ? j0 % res : j0;

    const double a = values.at(iw, jw);
    const double b = values.at(iw, j1);
    const double c = values.at(i1, jw);
    const double d = values.at(i1, j1);
    return (1 - fu) * ((1 - fv) * a + fv * b) + fu * ((1 - fv) * c + fv * d);
}

double field_at(const FieldStack& stack, int n, const Point& p) {
    const int idx = stack.index_of_level(n);
    return grid_value_at(stack.partial_sums[idx], stack.grid, p);
}

}  // namespace liouville
