#include "tposeen/grid.hpp"

#include <fftw3.h>

#include <mutex>

#include "tposeen/parallel.hpp"

namespace tposeen {

namespace {

std::once_flag fftw_threads_flag;

void init_fftw_threads() {
    std::call_once(fftw_threads_flag, [] {
        fftw_init_threads();
        fftw_plan_with_nthreads(static_cast<int>(thread_count()));
    });
}

std::mutex plan_mutex;

}  // namespace

Fft3::Fft3(int n) : n_(n) {
    init_fftw_threads();
    std::lock_guard<std::mutex> lock(plan_mutex);
    std::vector<Complex> scratch(static_cast<std::size_t>(n) * n * n);
    auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
    plan_fwd_ = fftw_plan_dft_3d(n, n, n, ptr, ptr, FFTW_FORWARD, FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_3d(n, n, n, ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft3::~Fft3() {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void Fft3::forward(Complex* data) const {
    auto* ptr = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), ptr, ptr);
}

void Fft3::backward(Complex* data) const {
    auto* ptr = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), ptr, ptr);
}

void spectral_forward(const GridSpec& g, const Fft3& fft, std::vector<Complex>& field3) {
    const double h3 = g.h() * g.h() * g.h();
    const std::size_t nn = g.nodes();
    for (int c = 0; c < 3; ++c) {
        Complex* comp = field3.data() + c * nn;
        fft.forward(comp);
        for (std::size_t i = 0; i < nn; ++i) comp[i] *= h3;
    }
}

void spectral_backward(const GridSpec& g, const Fft3& fft, std::vector<Complex>& field3) {
    const double scale = 1.0 / (g.h() * g.h() * g.h() * static_cast<double>(g.nodes()));
    const std::size_t nn = g.nodes();
    for (int c = 0; c < 3; ++c) {
        Complex* comp = field3.data() + c * nn;
        fft.backward(comp);
        for (std::size_t i = 0; i < nn; ++i) comp[i] *= scale;
    }
}

}  // namespace tposeen
