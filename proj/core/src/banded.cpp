#include "avoidwalk/banded.hpp"

#include <cmath>
#include <stdexcept>

namespace avoidwalk {

BandedLU::BandedLU(std::size_t n, std::size_t band)
    : n_(n), band_(band), stride_(2 * band + 1), a_(n * stride_, 0.0) {}

double& BandedLU::at(std::size_t row, std::size_t col) {
    return a_[row * stride_ + (col - row + band_)];
}

double BandedLU::get(std::size_t row, std::size_t col) const {
    return a_[row * stride_ + (col - row + band_)];
}

void BandedLU::factor() {
    for (std::size_t k = 0; k < n_; ++k) {
        const double piv = get(k, k);
        if (std::abs(piv) < 1e-300)
            throw std::runtime_error("BandedLU: vanishing pivot");
        const std::size_t imax = std::min(n_ - 1, k + band_);
        for (std::size_t i = k + 1; i <= imax; ++i) {
            const double m = get(i, k) / piv;
            at(i, k) = m;  // store L factor
            if (m == 0.0) continue;
            const std::size_t jmax = std::min(n_ - 1, k + band_);
            for (std::size_t j = k + 1; j <= jmax; ++j) at(i, j) -= m * get(k, j);
        }
    }
    factored_ = true;
}

void BandedLU::solve(std::vector<double>& b) const {
    if (!factored_) throw std::logic_error("BandedLU: solve before factor");
    if (b.size() != n_) throw std::invalid_argument("BandedLU: rhs size mismatch");
    for (std::size_t k = 0; k < n_; ++k) {
        const std::size_t imax = std::min(n_ - 1, k + band_);
        const double bk = b[k];
        if (bk == 0.0) continue;
        for (std::size_t i = k + 1; i <= imax; ++i) b[i] -= get(i, k) * bk;
    }
    for (std::size_t k = n_; k-- > 0;) {
        double x = b[k];
        const std::size_t jmax = std::min(n_ - 1, k + band_);
        for (std::size_t j = k + 1; j <= jmax; ++j) x -= get(k, j) * b[j];
        b[k] = x / get(k, k);
    }
}

}  // namespace avoidwalk
