#pragma once

#include <cstddef>
#include <vector>

namespace avoidwalk {

// LU factorization of a banded matrix without pivoting. The systems solved
// here are I - P with P substochastic (M-matrices, weakly diagonally
// dominant), where elimination without pivoting is stable; solve() checks
// nothing, factor() rejects vanishing pivots.
class BandedLU {
  public:
    BandedLU(std::size_t n, std::size_t band);

    // valid for |static_cast<long long>(col) - row| <= band
    double& at(std::size_t row, std::size_t col);
    double get(std::size_t row, std::size_t col) const;

    void factor();
    // solves A x = b in place
    void solve(std::vector<double>& b) const;

    std::size_t size() const { return n_; }

  private:
    std::size_t n_, band_, stride_;
    bool factored_ = false;
    std::vector<double> a_;
};

}  // namespace avoidwalk
