#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qgergo/modes.hpp"

namespace qgergo {

/// Real coefficient table over the truncated sine eigenbasis.  Entry (m,n),
/// 1 <= m,n <= N, is the coefficient of e_{m,n} = 2 sin(m pi x) sin(n pi y);
/// the represented function vanishes on the boundary by construction.
/// Storage is m-major: index (m-1)*N + (n-1).
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(int truncation)
        : n_(truncation), coeff_(static_cast<std::size_t>(truncation) * truncation, 0.0) {
        if (truncation < 1)
            throw std::domain_error("SpectralField: truncation must be >= 1");
    }

    int truncation() const { return n_; }
    std::size_t size() const { return coeff_.size(); }

    double& at(int m, int n) { return coeff_[flat(m, n)]; }
    double at(int m, int n) const { return coeff_[flat(m, n)]; }

    double* data() { return coeff_.data(); }
    const double* data() const { return coeff_.data(); }

    /// Sum of squared coefficients; equals ||f||_L2^2 in the orthonormal basis.
    double norm_sq() const {
        double s = 0.0;
        for (double c : coeff_) s += c * c;
        return s;
    }

    bool finite() const {
        for (double c : coeff_)
            if (!std::isfinite(c)) return false;
        return true;
    }

    /// Pointwise sample of the represented function at (x,y) in [0,1]^2.
    double evaluate(double x, double y) const {
        double s = 0.0;
        for (int m = 1; m <= n_; ++m)
            for (int n = 1; n <= n_; ++n)
                s += at(m, n) * eigenfunction_eval(m, n, x, y);
        return s;
    }

    friend SpectralField operator-(const SpectralField& a, const SpectralField& b) {
        if (a.n_ != b.n_)
            throw std::invalid_argument("SpectralField: truncation mismatch");
        SpectralField out(a.n_);
        for (std::size_t i = 0; i < a.coeff_.size(); ++i)
            out.coeff_[i] = a.coeff_[i] - b.coeff_[i];
        return out;
    }

private:
    std::size_t flat(int m, int n) const {
        if (m < 1 || m > n_ || n < 1 || n > n_)
            throw std::out_of_range("SpectralField: wavenumber outside truncation");
        return static_cast<std::size_t>(m - 1) * n_ + static_cast<std::size_t>(n - 1);
    }

    int n_ = 0;
    std::vector<double> coeff_;
};

/// Physical constants and discretization of one model instance.
///
/// The flow model assumes ekman_r > 0; ekman_r = 0 is accepted for
/// diagnostic runs and flagged by validate().
struct ModelParams {
    double nu = 1.0;     ///< viscosity, > 0
    double ekman_r = 0.1; ///< Ekman friction constant, >= 0
    double beta = 0.0;   ///< meridional Coriolis gradient, >= 0
    int truncation = 32; ///< wavenumbers per direction
    double dt = 1e-3;    ///< step size, > 0

    /// Throws on invalid values; returns true when ekman_r = 0 (diagnostics
    /// only) so callers can flag the run.
    bool validate() const {
        if (!(nu > 0.0)) throw std::domain_error("ModelParams: nu must be > 0");
        if (!(ekman_r >= 0.0)) throw std::domain_error("ModelParams: r must be >= 0");
        if (!(beta >= 0.0)) throw std::domain_error("ModelParams: beta must be >= 0");
        if (truncation < 1) throw std::domain_error("ModelParams: truncation must be >= 1");
        if (!(dt > 0.0)) throw std::domain_error("ModelParams: dt must be > 0");
        return ekman_r == 0.0;
    }
};

} // namespace qgergo
