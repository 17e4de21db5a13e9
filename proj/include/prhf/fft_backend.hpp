#pragma once

#include <complex>
#include <map>
#include <mutex>

#include <fftw3.h>

namespace prhf::detail {

// Cached FFTW plans per (n, sign). Plans are created with FFTW_ESTIMATE |
// FFTW_UNALIGNED so they can execute on any caller buffer; results are
// deterministic for a fixed grid.
template <class Real>
struct FftBackend;

template <>
struct FftBackend<double> {
    static void run(int n, std::complex<double>* data, int sign) {
        static std::map<std::pair<int, int>, fftw_plan> plans;
        static std::mutex mtx;
        fftw_plan p;
        {
            std::lock_guard<std::mutex> lk(mtx);
            auto key = std::make_pair(n, sign);
            auto it = plans.find(key);
            if (it == plans.end()) {
                p = fftw_plan_dft_3d(n, n, n, reinterpret_cast<fftw_complex*>(data),
                                     reinterpret_cast<fftw_complex*>(data), sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
                plans.emplace(key, p);
            } else {
                p = it->second;
            }
        }
        fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }
};

template <>
struct FftBackend<long double> {
    static void run(int n, std::complex<long double>* data, int sign) {
        static std::map<std::pair<int, int>, fftwl_plan> plans;
        static std::mutex mtx;
        fftwl_plan p;
        {
            std::lock_guard<std::mutex> lk(mtx);
            auto key = std::make_pair(n, sign);
            auto it = plans.find(key);
            if (it == plans.end()) {
                p = fftwl_plan_dft_3d(n, n, n, reinterpret_cast<fftwl_complex*>(data),
                                      reinterpret_cast<fftwl_complex*>(data), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
                plans.emplace(key, p);
            } else {
                p = it->second;
            }
        }
        fftwl_execute_dft(p, reinterpret_cast<fftwl_complex*>(data),
                          reinterpret_cast<fftwl_complex*>(data));
    }
};

} // namespace prhf::detail
