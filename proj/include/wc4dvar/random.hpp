#pragma once

#include "wc4dvar/types.hpp"

#include <cstdint>
#include <random>

namespace wc4dvar {

// Seeded stream of standard normal variates. mt19937_64 plus an explicit
// Box-Muller transform so that draws are identical across platforms and
// standard-library implementations; each normal consumes exactly two raw
// 64-bit outputs.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

    double next() {
        const std::uint64_t a = gen_();
        const std::uint64_t b = gen_();
        // 53-bit mantissas; u1 in (0,1] keeps the log finite.
        const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi_ * u2);
    }

    // Column-major fill order, pinned for reproducibility.
    void fill(Eigen::Ref<Matrix> m) {
        for (Index j = 0; j < m.cols(); ++j)
            for (Index i = 0; i < m.rows(); ++i) m(i, j) = next();
    }

    Vector draw(Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v(i) = next();
        return v;
    }

private:
    static constexpr double two_pi_ = 6.283185307179586476925286766559;
    std::mt19937_64 gen_;
};

}  // namespace wc4dvar
