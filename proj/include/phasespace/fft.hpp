#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include <Eigen/Dense>

namespace phasespace::fft {

using Complex = std::complex<double>;

namespace detail {

// One cached in-place plan per (length, count, stride, dist, sign).
// FFTW planning is not thread safe; execution on distinct buffers is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int n, int howmany, int stride, int dist, int sign, fftw_complex* buf) {
        std::lock_guard<std::mutex> lock(mutex_);
        Key key{n, howmany, stride, dist, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        fftw_plan p = fftw_plan_many_dft(1, &n, howmany, buf, nullptr, stride, dist,
                                         buf, nullptr, stride, dist, sign,
                                         FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
        return p;
    }

private:
    using Key = std::tuple<int, int, int, int, int>;
    PlanCache() = default;
    std::mutex mutex_;
    std::map<Key, fftw_plan> plans_;
};

inline void exec_many(Eigen::MatrixXcd& data, int n, int howmany, int stride, int dist, int sign) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan p = PlanCache::instance().get(n, howmany, stride, dist, sign, buf);
    fftw_execute_dft(p, buf, buf);
}

} // namespace detail

/// In-place unnormalized DFT along the column direction (axis 0, length = rows).
inline void transform_axis0(Eigen::MatrixXcd& data, int sign) {
    detail::exec_many(data, static_cast<int>(data.rows()), static_cast<int>(data.cols()),
                      1, static_cast<int>(data.rows()), sign);
}

/// In-place unnormalized DFT along the row direction (axis 1, length = cols).
inline void transform_axis1(Eigen::MatrixXcd& data, int sign) {
    detail::exec_many(data, static_cast<int>(data.cols()), static_cast<int>(data.rows()),
                      static_cast<int>(data.rows()), 1, sign);
}

/// In-place unnormalized DFT of a vector.
inline void transform(Eigen::VectorXcd& data, int sign) {
    Eigen::MatrixXcd& as_mat = reinterpret_cast<Eigen::MatrixXcd&>(data);
    detail::exec_many(as_mat, static_cast<int>(data.size()), 1, 1,
                      static_cast<int>(data.size()), sign);
}

/// Signed FFT frequency 2*pi*m/(n*d) for bin index j (FFTW layout, Nyquist negative).
inline double frequency(int j, int n, double d) {
    return 2.0 * M_PI * ((j < n / 2) ? j : j - n) / (n * d);
}

} // namespace phasespace::fft
