#pragma once

#include <vector>

#include "qgergo/field.hpp"
#include "qgergo/transforms.hpp"

namespace qgergo {

/// Stream function from vorticity: psi_hat = -omega_hat / ((m^2+n^2) pi^2),
/// so that Laplacian(psi) = omega holds exactly in the truncated basis.
inline SpectralField poisson_solve(const SpectralField& omega) {
    const int n = omega.truncation();
    SpectralField psi(n);
    for (int m = 1; m <= n; ++m)
        for (int nn = 1; nn <= n; ++nn)
            psi.at(m, nn) = -omega.at(m, nn) /
                            ((static_cast<double>(m) * m + static_cast<double>(nn) * nn) * kPiSq);
    return psi;
}

/// Coefficientwise Laplacian: hat(Lap f)_{mn} = -(m^2+n^2) pi^2 f_{mn}.
inline SpectralField laplacian_apply(const SpectralField& f) {
    const int n = f.truncation();
    SpectralField out(n);
    for (int m = 1; m <= n; ++m)
        for (int nn = 1; nn <= n; ++nn)
            out.at(m, nn) = -(static_cast<double>(m) * m + static_cast<double>(nn) * nn) *
                            kPiSq * f.at(m, nn);
    return out;
}

/// Galerkin projection of J(psi, omega) = psi_x omega_y - psi_y omega_x,
/// computed pseudo-spectrally on the dealiased collocation grid.
inline SpectralField jacobian(SineBasisPlan& plan, const SpectralField& psi,
                              const SpectralField& omega) {
    if (psi.truncation() != omega.truncation())
        throw std::invalid_argument("jacobian: truncation mismatch");
    thread_local std::vector<double> px, py, ox, oy;
    plan.evaluate(psi, Sample::DervX, px);
    plan.evaluate(psi, Sample::DervY, py);
    plan.evaluate(omega, Sample::DervX, ox);
    plan.evaluate(omega, Sample::DervY, oy);
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = px[i] * oy[i] - py[i] * ox[i];
    return plan.project(px);
}

/// Dense projection matrix taking x-wavenumber c sine coefficients to the
/// x-wavenumber m sine coefficients of the x-derivative:
///   hat(f_x)_{mn} = sum_c D[m][c] f_{cn},  D[m][c] = 4 c m / (m^2 - c^2)
/// for m+c odd, zero otherwise.  The x-derivative of a sine series is a
/// cosine series; projecting it back mixes wavenumbers of opposite parity.
inline std::vector<double> make_x_derivative_projection(int truncation) {
    std::vector<double> d(static_cast<std::size_t>(truncation) * truncation, 0.0);
    for (int m = 1; m <= truncation; ++m)
        for (int c = 1; c <= truncation; ++c)
            if ((m + c) % 2 == 1)
                d[static_cast<std::size_t>(m - 1) * truncation + (c - 1)] =
                    4.0 * c * m / (static_cast<double>(m) * m - static_cast<double>(c) * c);
    return d;
}

/// Galerkin projection of beta * psi_x onto the sine basis, using the
/// closed-form parity-mixing projection above.
inline SpectralField beta_term(const SpectralField& psi, double beta) {
    if (!(beta >= 0.0))
        throw std::domain_error("beta_term: beta must be >= 0");
    const int nt = psi.truncation();
    SpectralField out(nt);
    if (beta == 0.0) return out;
    const std::vector<double> d = make_x_derivative_projection(nt);
    for (int m = 1; m <= nt; ++m) {
        const double* drow = &d[static_cast<std::size_t>(m - 1) * nt];
        for (int n = 1; n <= nt; ++n) {
            double s = 0.0;
            for (int c = 1; c <= nt; ++c) s += drow[c - 1] * psi.at(c, n);
            out.at(m, n) = beta * s;
        }
    }
    return out;
}

/// beta_term with a caller-provided projection matrix (avoids rebuilding it
/// every step).
inline void beta_term_into(const SpectralField& psi, double beta,
                           const std::vector<double>& x_deriv_projection,
                           SpectralField& out) {
    const int nt = psi.truncation();
    for (int m = 1; m <= nt; ++m) {
        const double* drow = &x_deriv_projection[static_cast<std::size_t>(m - 1) * nt];
        for (int n = 1; n <= nt; ++n) {
            double s = 0.0;
            for (int c = 1; c <= nt; ++c) s += drow[c - 1] * psi.at(c, n);
            out.at(m, n) = beta * s;
        }
    }
}

} // namespace qgergo
