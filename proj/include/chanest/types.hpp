#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanest {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

// Error categories the CLI maps to distinct exit codes.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double norm2(std::span<const cplx> v) {
    double s = 0.0;
    for (const cplx& z : v) s += std::norm(z);
    return s;
}

inline double norm(std::span<const cplx> v) { return std::sqrt(norm2(v)); }

// a^H b
inline cplx dotc(std::span<const cplx> a, std::span<const cplx> b) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double ar = a[k].real(), ai = a[k].imag();
        const double br = b[k].real(), bi = b[k].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

inline void axpy(const cplx& alpha, std::span<const cplx> x, std::span<cplx> y) {
    for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

}  // namespace chanest
