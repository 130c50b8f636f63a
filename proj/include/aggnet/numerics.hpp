#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace aggnet {

using Vector = std::vector<double>;

/// Dense row-major matrix of 64-bit floats.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::string shape_str() const;
};

/// Deterministic splitmix64 generator. A given seed produces the same
/// stream of draws on every platform; never shared between threads.
struct Rng {
    std::uint64_t state = 0;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double next_double();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform over {0, ..., n-1}; n must be > 0.
    std::size_t uniform_index(std::size_t n);
};

/// Stateless mix of a base seed and a salt, for deriving independent
/// substreams (per-trial, per-tree) from one run seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

Matrix matmul(const Matrix& a, const Matrix& b);
/// m x, with x read as a column vector.
Vector matvec(const Matrix& m, const Vector& x);
/// m^T y.
Vector matvec_transposed(const Matrix& m, const Vector& y);
/// Outer product u v^T as a (u.size() x v.size()) matrix.
Matrix outer(const Vector& u, const Vector& v);

Vector hadamard(const Vector& a, const Vector& b);
double dot(const Vector& a, const Vector& b);
/// y += alpha * x.
void axpy(double alpha, const Vector& x, Vector& y);

double sigmoid_scalar(double x);
Vector sigmoid(const Vector& x);
Vector tanh_vec(const Vector& x);
/// Max-subtracted softmax; output sums to 1 and never overflows.
Vector softmax(const Vector& x);

/// Central-difference gradient (f(x+eps e_i) - f(x-eps e_i)) / (2 eps).
/// Throws if f evaluates to a non-finite value.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& x,
                        double eps = 1e-5);

/// Matrix with entries i.i.d. uniform in [-scale, +scale].
Matrix rand_uniform(Rng& rng, std::size_t rows, std::size_t cols, double scale);
Vector rand_uniform_vec(Rng& rng, std::size_t len, double scale);

}  // namespace aggnet
