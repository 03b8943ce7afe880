#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qgergo/field.hpp"

namespace qgergo {

/// Which factor of the series to sample on the collocation grid.
enum class Sample { Value, DervX, DervY };

/// Collocation plan for the double-sine basis on the interior grid
/// x_j = j/(M+1), j = 1..M, with M = ceil(3N/2) + 1 points per direction.
///
/// The grid obeys the 2/3 rule: a pointwise product of two degree-N sine
/// series has pure double-sine content of degree <= 2N (derivatives pair a
/// cosine factor with a sine factor in each direction), and the type-I
/// discrete sine quadrature on M points integrates sine content up to
/// degree 2(M+1)-N-1 > 2N exactly.  project() therefore returns the exact
/// Galerkin projection of such products, up to roundoff.
///
/// Plans hold scratch buffers and must not be shared between workers.
class SineBasisPlan {
public:
    explicit SineBasisPlan(int truncation)
        : n_(truncation), m_((3 * truncation + 3) / 2) {
        if (truncation < 1)
            throw std::domain_error("SineBasisPlan: truncation must be >= 1");
        const double h = 1.0 / (m_ + 1);
        sin_.resize(static_cast<std::size_t>(m_) * n_);
        cos_.resize(static_cast<std::size_t>(m_) * n_);
        sin_t_.resize(static_cast<std::size_t>(n_) * m_);
        for (int j = 0; j < m_; ++j) {
            const double x = (j + 1) * h;
            for (int m = 1; m <= n_; ++m) {
                sin_[idx_mn(j, m)] = std::sin(m * kPi * x);
                cos_[idx_mn(j, m)] = std::cos(m * kPi * x);
                sin_t_[static_cast<std::size_t>(m - 1) * m_ + j] = sin_[idx_mn(j, m)];
            }
        }
        stage_.resize(static_cast<std::size_t>(n_) * m_);
    }

    int truncation() const { return n_; }
    int grid_points() const { return m_; }
    double grid_coord(int j) const { return (j + 1) / static_cast<double>(m_ + 1); }

    /// Sample the series (or one first derivative) on the M x M grid.
    /// out is row-major over (j, i) = (x index, y index).
    void evaluate(const SpectralField& f, Sample what, std::vector<double>& out) {
        if (f.truncation() != n_)
            throw std::invalid_argument("SineBasisPlan: field truncation mismatch");
        out.assign(static_cast<std::size_t>(m_) * m_, 0.0);

        // stage_[m][i] = sum_n c_{mn} * vy_n(y_i), vy = sin or n*pi*cos
        const bool dy = (what == Sample::DervY);
        const std::vector<double>& ybasis = dy ? cos_ : sin_;
        for (int m = 1; m <= n_; ++m) {
            double* row = &stage_[static_cast<std::size_t>(m - 1) * m_];
            for (int i = 0; i < m_; ++i) {
                double s = 0.0;
                const double* cm = f.data() + static_cast<std::size_t>(m - 1) * n_;
                const double* by = &ybasis[static_cast<std::size_t>(i) * n_];
                for (int n = 1; n <= n_; ++n) {
                    const double w = dy ? n * kPi : 1.0;
                    s += cm[n - 1] * w * by[n - 1];
                }
                row[i] = s;
            }
        }

        // out[j][i] += 2 * ux_m(x_j) * stage_[m][i], ux = sin or m*pi*cos
        const bool dx = (what == Sample::DervX);
        const std::vector<double>& xbasis = dx ? cos_ : sin_;
        for (int j = 0; j < m_; ++j) {
            double* orow = &out[static_cast<std::size_t>(j) * m_];
            for (int m = 1; m <= n_; ++m) {
                const double w = 2.0 * (dx ? m * kPi : 1.0) * xbasis[idx_mn(j, m)];
                const double* srow = &stage_[static_cast<std::size_t>(m - 1) * m_];
                for (int i = 0; i < m_; ++i) orow[i] += w * srow[i];
            }
        }
    }

    /// Exact Galerkin projection of a gridded function with pure double-sine
    /// content of degree <= 2N onto the truncated basis.
    SpectralField project(const std::vector<double>& grid) {
        if (grid.size() != static_cast<std::size_t>(m_) * m_)
            throw std::invalid_argument("SineBasisPlan: grid size mismatch");
        SpectralField out(n_);

        // stage_[m][i] = sum_j sin(m pi x_j) grid[j][i]
        for (int m = 1; m <= n_; ++m) {
            double* row = &stage_[static_cast<std::size_t>(m - 1) * m_];
            for (int i = 0; i < m_; ++i) row[i] = 0.0;
            for (int j = 0; j < m_; ++j) {
                const double w = sin_[idx_mn(j, m)];
                const double* grow = &grid[static_cast<std::size_t>(j) * m_];
                for (int i = 0; i < m_; ++i) row[i] += w * grow[i];
            }
        }

        const double quad = 2.0 / (static_cast<double>(m_ + 1) * (m_ + 1));
        for (int m = 1; m <= n_; ++m) {
            const double* row = &stage_[static_cast<std::size_t>(m - 1) * m_];
            for (int n = 1; n <= n_; ++n) {
                const double* st = &sin_t_[static_cast<std::size_t>(n - 1) * m_];
                double s = 0.0;
                for (int i = 0; i < m_; ++i) s += row[i] * st[i];
                out.at(m, n) = quad * s;
            }
        }
        return out;
    }

private:
    std::size_t idx_mn(int j, int m) const {
        return static_cast<std::size_t>(j) * n_ + static_cast<std::size_t>(m - 1);
    }

    int n_;
    int m_;
    std::vector<double> sin_;   // [j][m]
    std::vector<double> cos_;   // [j][m]
    std::vector<double> sin_t_; // [m][j]
    std::vector<double> stage_;
};

} // namespace qgergo
