#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <tuple>

#include <fftw3.h>

#include "ktns/grid.hpp"

namespace ktns {

/// Cached FFTW plans for n-dimensional complex transforms on a Grid.
///
/// Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED and executed through
/// the new-array interface, which is thread-safe once a plan exists.
class FourierEngine {
public:
    /// Unnormalized forward transform in place: c_k = sum_x f(x) e^{-i xi.x}.
    static void forward(const Grid& grid, std::span<std::complex<double>> data)
    {
        execute(grid, data, FFTW_FORWARD);
    }

    /// Unnormalized backward transform in place (no 1/N^n factor).
    static void backward(const Grid& grid, std::span<std::complex<double>> data)
    {
        execute(grid, data, FFTW_BACKWARD);
    }

private:
    static void execute(const Grid& grid, std::span<std::complex<double>> data, int sign)
    {
        if (data.size() != grid.size()) throw ConfigurationError("FFT buffer does not match grid size");
        fftw_plan plan = plan_for(grid.dim(), grid.points(), sign);
        auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(plan, ptr, ptr);
    }

    static fftw_plan plan_for(int dim, int points, int sign)
    {
        static std::mutex mutex;
        static std::map<std::tuple<int, int, int>, fftw_plan> plans;
        std::lock_guard<std::mutex> lock(mutex);
        auto key = std::make_tuple(dim, points, sign);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        int dims[3] = {points, points, points};
        std::size_t total = 1;
        for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(points);
        auto* scratch = fftw_alloc_complex(total);
        fftw_plan plan = fftw_plan_dft(dim, dims, scratch, scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        plans.emplace(key, plan);
        return plan;
    }
};

}  // namespace ktns
