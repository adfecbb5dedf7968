#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random numbers keyed by (seed, path, step, lane). Stateless,
// so draws are reproducible regardless of how paths are scheduled across
// threads. Gaussians go through the inverse CDF for cross-platform bit
// stability.

namespace bpc::rng {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t path,
                                  std::uint64_t step, std::uint64_t lane) {
    std::uint64_t h = mix64(seed ^ 0x8f1bbcdcbfa53e0bULL);
    h = mix64(h ^ path);
    h = mix64(h ^ (step * 0xd2b74407b1ce6e93ULL));
    h = mix64(h ^ (lane * 0xca5a826395121157ULL));
    return h;
}

/// Uniform draw strictly inside (0,1).
inline double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                        std::uint64_t lane) {
    const std::uint64_t h = counter_hash(seed, path, step, lane);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1p-53;
}

/// Inverse standard normal CDF (Wichura's AS241, double precision).
inline double inverse_normal_cdf(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -x : x;
}

/// Standard normal draw for the given counter.
inline double gaussian(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                       std::uint64_t lane) {
    return inverse_normal_cdf(uniform01(seed, path, step, lane));
}

}  // namespace bpc::rng
