#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgergo/modes.hpp"

namespace qgergo {

/// Spatial coloring of the white-in-time forcing.  The covariance operator
/// is diagonal in the eigenbasis of A with per-mode amplitudes alpha_k >= 0
/// (so Q e_k = alpha_k^2 e_k), where k is the linear mode index.
///
/// Built-in amplitude laws: a power law alpha_k = c k^{-p}, an explicit
/// finite table, and zero.  gamma is the exponent of the admissibility
/// condition sum_k alpha_k^2 / |lambda_k|^{1-gamma} < infinity and must lie
/// strictly in (0,1).
struct NoiseSpec {
    enum class Law { Zero, Power, Table };

    Law law = Law::Zero;
    double c = 0.0;            ///< power-law prefactor, >= 0
    double p = 0.0;            ///< power-law exponent
    std::vector<double> table; ///< explicit alpha_k, size N^2, entries >= 0
    double gamma = 0.5;        ///< admissibility exponent, in (0,1)
    int truncation = 1;        ///< wavenumbers per direction; K = N^2 modes

    static NoiseSpec zero(int truncation, double gamma = 0.5) {
        NoiseSpec s;
        s.law = Law::Zero;
        s.truncation = truncation;
        s.gamma = gamma;
        return s;
    }

    static NoiseSpec power(int truncation, double c, double p, double gamma) {
        NoiseSpec s;
        s.law = Law::Power;
        s.truncation = truncation;
        s.c = c;
        s.p = p;
        s.gamma = gamma;
        return s;
    }

    static NoiseSpec from_table(int truncation, std::vector<double> alphas, double gamma) {
        NoiseSpec s;
        s.law = Law::Table;
        s.truncation = truncation;
        s.table = std::move(alphas);
        s.gamma = gamma;
        return s;
    }

    std::size_t mode_count() const {
        return static_cast<std::size_t>(truncation) * truncation;
    }

    void validate() const {
        if (truncation < 1)
            throw std::domain_error("NoiseSpec: truncation must be >= 1");
        if (!(gamma > 0.0 && gamma < 1.0))
            throw std::domain_error("NoiseSpec: gamma must lie strictly in (0, 1)");
        switch (law) {
        case Law::Zero:
            break;
        case Law::Power:
            if (!(c >= 0.0))
                throw std::domain_error("NoiseSpec: power-law prefactor must be >= 0");
            break;
        case Law::Table:
            if (table.size() != mode_count())
                throw std::domain_error("NoiseSpec: table must have one entry per mode (N^2)");
            for (double a : table)
                if (!(a >= 0.0) || !std::isfinite(a))
                    throw std::domain_error("NoiseSpec: table entries must be finite and >= 0");
            break;
        }
    }

    /// Per-mode amplitude alpha_k for 1-based linear index k.
    double alpha(std::size_t k) const {
        if (k < 1 || k > mode_count())
            throw std::out_of_range("NoiseSpec: mode index outside truncation");
        switch (law) {
        case Law::Zero:
            return 0.0;
        case Law::Power:
            return c * std::pow(static_cast<double>(k), -p);
        case Law::Table:
            return table[k - 1];
        }
        return 0.0;
    }

    /// True when every mode inside the truncation is forced.
    bool all_modes_positive() const {
        switch (law) {
        case Law::Zero:
            return false;
        case Law::Power:
            return c > 0.0;
        case Law::Table:
            for (double a : table)
                if (!(a > 0.0)) return false;
            return true;
        }
        return false;
    }

    std::string law_name() const {
        switch (law) {
        case Law::Zero: return "zero";
        case Law::Power: return "power";
        case Law::Table: return "table";
        }
        return "?";
    }
};

} // namespace qgergo
