#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

// Eigenstructure of A = nu*Laplacian on the unit square with Dirichlet
// conditions.  The basis functions are e_{m,n}(x,y) = 2 sin(m pi x) sin(n pi y),
// normalized to unit L2 norm, with eigenvalues -nu (m^2+n^2) pi^2.
//
// Linear mode index convention: k = 1,2,... enumerates pairs (m,n) with
// 1 <= m,n <= N sorted by ascending m^2+n^2, ties broken by ascending m,
// then n.  k = 1 is (1,1), matching the usual eigenvalue ordering
// 0 > lambda_1 > lambda_2 >= lambda_3 >= ...

namespace qgergo {

inline constexpr double kPi = std::numbers::pi_v<double>;
inline constexpr double kPiSq = kPi * kPi;

struct ModeIndex {
    int m = 0;       ///< x wavenumber, >= 1
    int n = 0;       ///< y wavenumber, >= 1
    std::size_t k = 0; ///< 1-based linear index in the (m^2+n^2, m, n) order
};

/// Eigenvalue of A = nu*Laplacian at mode (m,n): -nu (m^2+n^2) pi^2.
inline double eigenvalue_A(int m, int n, double nu) {
    if (m < 1 || n < 1)
        throw std::domain_error("eigenvalue_A: wavenumbers must be positive integers");
    if (!(nu > 0.0))
        throw std::domain_error("eigenvalue_A: viscosity must be positive");
    return -nu * (static_cast<double>(m) * m + static_cast<double>(n) * n) * kPiSq;
}

/// Unit-L2-norm eigenfunction value 2 sin(m pi x) sin(n pi y).
inline double eigenfunction_eval(int m, int n, double x, double y) {
    if (m < 1 || n < 1)
        throw std::domain_error("eigenfunction_eval: wavenumbers must be positive integers");
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
        throw std::domain_error("eigenfunction_eval: point outside the closed unit square");
    return 2.0 * std::sin(m * kPi * x) * std::sin(n * kPi * y);
}

/// The k <-> (m,n) bijection for a truncation of N wavenumbers per direction.
class ModeTable {
public:
    explicit ModeTable(int truncation) : n_(truncation) {
        if (truncation < 1)
            throw std::domain_error("ModeTable: truncation must be >= 1");
        modes_.reserve(static_cast<std::size_t>(n_) * n_);
        for (int m = 1; m <= n_; ++m)
            for (int n = 1; n <= n_; ++n)
                modes_.push_back(ModeIndex{m, n, 0});
        std::sort(modes_.begin(), modes_.end(), [](const ModeIndex& a, const ModeIndex& b) {
            const long sa = static_cast<long>(a.m) * a.m + static_cast<long>(a.n) * a.n;
            const long sb = static_cast<long>(b.m) * b.m + static_cast<long>(b.n) * b.n;
            if (sa != sb) return sa < sb;
            if (a.m != b.m) return a.m < b.m;
            return a.n < b.n;
        });
        k_of_.assign(modes_.size(), 0);
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            modes_[i].k = i + 1;
            k_of_[flat(modes_[i].m, modes_[i].n)] = i + 1;
        }
    }

    int truncation() const { return n_; }
    std::size_t size() const { return modes_.size(); }

    /// Mode for 1-based linear index k.
    const ModeIndex& mode(std::size_t k) const {
        if (k < 1 || k > modes_.size())
            throw std::out_of_range("ModeTable: linear index outside truncation");
        return modes_[k - 1];
    }

    /// 1-based linear index of (m,n).
    std::size_t k_of(int m, int n) const {
        if (m < 1 || m > n_ || n < 1 || n > n_)
            throw std::out_of_range("ModeTable: wavenumber outside truncation");
        return k_of_[flat(m, n)];
    }

    /// Position of mode k in m-major coefficient storage (the SpectralField
    /// layout).  Per-k loops that touch coefficient arrays go through this.
    std::size_t storage_index(std::size_t k) const {
        const ModeIndex& mi = mode(k);
        return static_cast<std::size_t>(mi.m - 1) * n_ + static_cast<std::size_t>(mi.n - 1);
    }

    /// m^2 + n^2 for linear index k.
    double wavenumber_sq(std::size_t k) const {
        const ModeIndex& mi = mode(k);
        return static_cast<double>(mi.m) * mi.m + static_cast<double>(mi.n) * mi.n;
    }

    /// Eigenvalue of A at linear index k for viscosity nu.
    double lambda(std::size_t k, double nu) const { return -nu * wavenumber_sq(k) * kPiSq; }

    const std::vector<ModeIndex>& modes() const { return modes_; }

private:
    std::size_t flat(int m, int n) const {
        return static_cast<std::size_t>(m - 1) * n_ + static_cast<std::size_t>(n - 1);
    }

    int n_;
    std::vector<ModeIndex> modes_;
    std::vector<std::size_t> k_of_;
};

} // namespace qgergo
