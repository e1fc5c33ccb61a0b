#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hyperchoq {

/// Symmetric positive definite banded matrix in lower band storage:
/// band[d][j] = A(j+d, j) for d = 0..kb, j = 0..n-1-d. cholesky() factors in
/// place; solve() then applies the usual forward/back substitution.
class BandedSPD {
  public:
    BandedSPD(std::vector<std::vector<double>> band)
        : band_(std::move(band)) {
        if (band_.empty() || band_[0].empty()) throw std::invalid_argument("empty band matrix");
        n_ = band_[0].size();
        kb_ = band_.size() - 1;
        if (kb_ >= n_) throw std::invalid_argument("bandwidth exceeds matrix size");
        for (std::size_t d = 1; d <= kb_; ++d)
            if (band_[d].size() != n_ - d) throw std::invalid_argument("band diagonal has wrong length");
    }

    void cholesky() {
        for (std::size_t j = 0; j < n_; ++j) {
            std::size_t k0 = j > kb_ ? j - kb_ : 0;
            double diag = band_[0][j];
            for (std::size_t k = k0; k < j; ++k) {
                double l = band_[j - k][k];
                diag -= l * l;
            }
            if (!(diag > 0.0)) throw std::runtime_error("banded matrix is not positive definite");
            diag = std::sqrt(diag);
            band_[0][j] = diag;
            std::size_t dmax = std::min(kb_, n_ - 1 - j);
            for (std::size_t d = 1; d <= dmax; ++d) {
                std::size_t i = j + d;
                double v = band_[d][j];
                std::size_t kk0 = i > kb_ ? i - kb_ : 0;
                for (std::size_t k = std::max(k0, kk0); k < j; ++k)
                    v -= band_[i - k][k] * band_[j - k][k];
                band_[d][j] = v / diag;
            }
        }
        factored_ = true;
    }

    std::vector<double> solve(std::vector<double> rhs) const {
        if (!factored_) throw std::logic_error("solve before cholesky");
        if (rhs.size() != n_) throw std::invalid_argument("rhs size mismatch");
        for (std::size_t j = 0; j < n_; ++j) {
            rhs[j] /= band_[0][j];
            std::size_t dmax = std::min(kb_, n_ - 1 - j);
            for (std::size_t d = 1; d <= dmax; ++d) rhs[j + d] -= band_[d][j] * rhs[j];
        }
        for (std::size_t jj = n_; jj-- > 0;) {
            std::size_t dmax = std::min(kb_, n_ - 1 - jj);
            double v = rhs[jj];
            for (std::size_t d = 1; d <= dmax; ++d) v -= band_[d][jj] * rhs[jj + d];
            rhs[jj] = v / band_[0][jj];
        }
        return rhs;
    }

    std::size_t size() const { return n_; }

  private:
    std::vector<std::vector<double>> band_;
    std::size_t n_ = 0, kb_ = 0;
    bool factored_ = false;
};

}  // namespace hyperchoq
