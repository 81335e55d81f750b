#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace sbalc {

/// Radical inverse of i in the given base (van der Corput).
inline double radical_inverse(std::size_t i, unsigned base) {
    double inv_base = 1.0 / base;
    double scale = inv_base;
    double value = 0.0;
    while (i > 0) {
        value += static_cast<double>(i % base) * scale;
        i /= base;
        scale *= inv_base;
    }
    return value;
}

inline std::vector<unsigned> first_primes(std::size_t count) {
    std::vector<unsigned> primes;
    unsigned candidate = 2;
    while (primes.size() < count) {
        bool is_prime = true;
        for (unsigned p : primes) {
            if (p * p > candidate) break;
            if (candidate % p == 0) { is_prime = false; break; }
        }
        if (is_prime) primes.push_back(candidate);
        ++candidate;
    }
    return primes;
}

/// Hammersley point set in [0,1)^d: row i = (i/n, phi_2(i), phi_3(i), ...).
inline Eigen::MatrixXd hammersley(std::size_t n, std::size_t d) {
    if (n < 1 || d < 1)
        throw std::invalid_argument("hammersley: n and d must be >= 1");
    auto primes = first_primes(d > 0 ? d - 1 : 0);
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        pts(static_cast<Eigen::Index>(i), 0) =
            static_cast<double>(i) / static_cast<double>(n);
        for (std::size_t j = 1; j < d; ++j)
            pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                radical_inverse(i, primes[j - 1]);
    }
    return pts;
}

} // namespace sbalc
