#ifndef TPOSEEN_GEOMETRY_HPP
#define TPOSEEN_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace tposeen {

using Complex = std::complex<double>;

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double a) const { return {a * x, a * y, a * z}; }
    Vec3 operator/(double a) const { return {x / a, y / a, z / a}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double a) { x *= a; y *= a; z *= a; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm2() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double a, const Vec3& v) { return v * a; }

/// Complex 3-vector; arises as one temporal Fourier mode of a real field.
struct CVec3 {
    Complex x{0, 0}, y{0, 0}, z{0, 0};

    CVec3() = default;
    CVec3(Complex x_, Complex y_, Complex z_) : x(x_), y(y_), z(z_) {}
    explicit CVec3(const Vec3& v) : x(v.x), y(v.y), z(v.z) {}

    Complex& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    Complex operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    CVec3 operator+(const CVec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    CVec3 operator-(const CVec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    CVec3& operator+=(const CVec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    CVec3 operator*(Complex a) const { return {a * x, a * y, a * z}; }
    CVec3 operator*(double a) const { return {a * x, a * y, a * z}; }

    CVec3 cross(const CVec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    Vec3 real() const { return {x.real(), y.real(), z.real()}; }
    double norm() const {
        return std::sqrt(std::norm(x) + std::norm(y) + std::norm(z));
    }
};

inline CVec3 operator*(Complex a, const CVec3& v) { return v * a; }

/// 3x3 real matrix, row-major.
struct Mat3 {
    std::array<double, 9> a{};

    double& operator()(int i, int j) { return a[3 * i + j]; }
    double operator()(int i, int j) const { return a[3 * i + j]; }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = a[i] + o.a[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = a[i] - o.a[i];
        return r;
    }
    Mat3 operator*(double s) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = s * a[i];
        return r;
    }
    Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) a[i] += o.a[i];
        return *this;
    }
    Vec3 operator*(const Vec3& v) const {
        return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
                a[3] * v.x + a[4] * v.y + a[5] * v.z,
                a[6] * v.x + a[7] * v.y + a[8] * v.z};
    }
    static Mat3 identity() {
        Mat3 r;
        r(0, 0) = r(1, 1) = r(2, 2) = 1;
        return r;
    }
    double frobenius() const {
        double s = 0;
        for (double v : a) s += v * v;
        return std::sqrt(s);
    }
};

inline Mat3 operator*(double s, const Mat3& m) { return m * s; }

/// Third-order tensor T(m,j,l) = partial_m Gamma0_{jl}; m slowest.
struct Tensor3x3x3 {
    std::array<double, 27> a{};
    double& operator()(int m, int j, int l) { return a[9 * m + 3 * j + l]; }
    double operator()(int m, int j, int l) const { return a[9 * m + 3 * j + l]; }
    double frobenius() const {
        double s = 0;
        for (double v : a) s += v * v;
        return std::sqrt(s);
    }
};

/// Drift speed and time period of the flow; everything is dimensionless.
struct FlowParams {
    double lambda;
    double period;

    FlowParams(double lambda_, double period_) : lambda(lambda_), period(period_) {
        if (!(lambda > 0)) throw std::invalid_argument("FlowParams: lambda must be positive");
        if (!(period > 0)) throw std::invalid_argument("FlowParams: period must be positive");
    }

    /// k-th temporal mode frequency 2*pi*k/period.
    double mode_frequency(int k) const { return 2.0 * M_PI * k / period; }
};

}  // namespace tposeen

#endif
