#pragma once

#include <algorithm>
#include <cmath>

#include "qgergo/modes.hpp"

// Uniform bounds on the eigenfunctions and their gradients: |e_k| <= 2 by
// construction, and |grad e_k| <= C sqrt(|lambda_k|) with the minimal C
// over the truncation reported here.  For this basis the sup of a
// derivative is 2 pi max(m,n), so the per-mode ratio is
//   2 max(m,n) / (sqrt(nu) sqrt(m^2+n^2)) <= 2 / sqrt(nu).

namespace qgergo {

struct EigenfunctionBoundReport {
    double sup_bound = 2.0;  ///< uniform bound on |e_k|, exact for every mode
    double c_constant = 0;   ///< max_k sup|grad e_k| / sqrt(|lambda_k|)
    double c_limit = 0;      ///< analytic ceiling 2/sqrt(nu)
    std::size_t argmax = 1;  ///< mode attaining c_constant
    bool within_limit = false;
};

inline EigenfunctionBoundReport eigenfunction_bound_check(int truncation, double nu) {
    if (!(nu > 0.0)) throw std::domain_error("eigenfunction_bound_check: nu must be > 0");
    const ModeTable table(truncation);
    EigenfunctionBoundReport rep;
    rep.c_limit = 2.0 / std::sqrt(nu);
    for (std::size_t k = 1; k <= table.size(); ++k) {
        const ModeIndex mi = table.mode(k);
        const double grad_sup = 2.0 * kPi * std::max(mi.m, mi.n);
        const double ratio = grad_sup / std::sqrt(std::abs(table.lambda(k, nu)));
        if (ratio > rep.c_constant) {
            rep.c_constant = ratio;
            rep.argmax = k;
        }
    }
    rep.within_limit = rep.c_constant <= rep.c_limit;
    return rep;
}

} // namespace qgergo
