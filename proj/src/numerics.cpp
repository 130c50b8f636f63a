#include "aggnet/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace aggnet {

std::string Matrix::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

std::uint64_t Rng::next_u64() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::next_double() {
    // Top 53 bits give a uniform double in [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
    return static_cast<std::size_t>(next_u64() % n);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    Rng r(seed ^ (salt * 0xD1B54A32D192ED03ULL));
    return r.next_u64();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: dimension mismatch " + a.shape_str() + " x " +
                                    b.shape_str());
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Vector matvec(const Matrix& m, const Vector& x) {
    if (m.cols != x.size()) {
        throw std::invalid_argument("matvec: dimension mismatch " + m.shape_str() + " x " +
                                    std::to_string(x.size()));
    }
    Vector out(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.data.data() + i * m.cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
    return out;
}

Vector matvec_transposed(const Matrix& m, const Vector& y) {
    if (m.rows != y.size()) {
        throw std::invalid_argument("matvec_transposed: dimension mismatch " + m.shape_str() +
                                    "^T x " + std::to_string(y.size()));
    }
    Vector out(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double yi = y[i];
        if (yi == 0.0) continue;
        const double* row = m.data.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) out[j] += row[j] * yi;
    }
    return out;
}

Matrix outer(const Vector& u, const Vector& v) {
    Matrix out(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double ui = u[i];
        for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = ui * v[j];
    }
    return out;
}

Vector hadamard(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("hadamard: length mismatch " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
    }
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: length mismatch " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const Vector& x, Vector& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("axpy: length mismatch " + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()));
    }
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double sigmoid_scalar(double x) {
    // Branch on sign so exp never overflows.
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Vector sigmoid(const Vector& x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid_scalar(x[i]);
    return out;
}

Vector tanh_vec(const Vector& x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
    return out;
}

Vector softmax(const Vector& x) {
    if (x.empty()) throw std::invalid_argument("softmax: empty input");
    double mx = x[0];
    for (double v : x) mx = std::max(mx, v);
    Vector out(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& x,
                        double eps) {
    if (eps <= 0.0) throw std::invalid_argument("finite_diff_grad: eps must be > 0");
    Vector grad(x.size());
    Vector probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + eps;
        const double fp = f(probe);
        probe[i] = orig - eps;
        const double fm = f(probe);
        probe[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw std::runtime_error("finite_diff_grad: non-finite function value at coordinate " +
                                     std::to_string(i));
        }
        grad[i] = (fp - fm) / (2.0 * eps);
    }
    return grad;
}

Matrix rand_uniform(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
    if (scale <= 0.0) throw std::invalid_argument("rand_uniform: scale must be > 0");
    Matrix out(rows, cols);
    for (double& v : out.data) v = rng.uniform(-scale, scale);
    return out;
}

Vector rand_uniform_vec(Rng& rng, std::size_t len, double scale) {
    if (scale <= 0.0) throw std::invalid_argument("rand_uniform_vec: scale must be > 0");
    Vector out(len);
    for (double& v : out) v = rng.uniform(-scale, scale);
    return out;
}

}  // namespace aggnet
