#ifndef TPOSEEN_GRID_HPP
#define TPOSEEN_GRID_HPP

#include <vector>

#include "tposeen/geometry.hpp"

namespace tposeen {

/// Uniform periodic grid on [-L, L)^3 in FFT index order:
/// coord(i) = i*h for i < n/2, (i-n)*h otherwise.
struct GridSpec {
    int n = 64;
    double half_length = 16.0;

    double h() const { return 2.0 * half_length / n; }
    double coord(int i) const {
        return (i < n / 2 ? i : i - n) * h();
    }
    /// angular frequency of index i: 2*pi*fftfreq
    double freq(int i) const {
        return (i < n / 2 ? i : i - n) * (M_PI / half_length);
    }
    std::size_t nodes() const {
        return static_cast<std::size_t>(n) * n * n;
    }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n + j) * n + k;
    }
    Vec3 node(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
};

/// In-place complex-to-complex 3D FFT (FFTW, deterministic ESTIMATE plans,
/// threaded). forward: e^{-i xi x}; backward: unnormalized inverse.
class Fft3 {
  public:
    explicit Fft3(int n);
    ~Fft3();
    Fft3(const Fft3&) = delete;
    Fft3& operator=(const Fft3&) = delete;

    void forward(Complex* data) const;
    void backward(Complex* data) const;
    int size() const { return n_; }

  private:
    int n_;
    void* plan_fwd_;
    void* plan_bwd_;
};

/// Continuum-scaled transforms: fhat(xi_j) = h^3 * DFT, f(x) = IDFT/(h^3 N^3).
void spectral_forward(const GridSpec& g, const Fft3& fft, std::vector<Complex>& field3);
void spectral_backward(const GridSpec& g, const Fft3& fft, std::vector<Complex>& field3);

}  // namespace tposeen

#endif
