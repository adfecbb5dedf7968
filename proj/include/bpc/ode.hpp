#pragma once

#include <functional>
#include <vector>

namespace bpc::ode {

enum class Scheme { Rk4, Euler };

/// One fixed step of y' = f(t, y) from t to t + h.
template <typename State, typename Rhs>
State step(const Rhs& f, double t, const State& y, double h, Scheme scheme) {
    if (scheme == Scheme::Euler) {
        return y + h * f(t, y);
    }
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, State(y + 0.5 * h * k1));
    const State k3 = f(t + 0.5 * h, State(y + 0.5 * h * k2));
    const State k4 = f(t + h, State(y + h * k3));
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrate from t0 to t1 (either direction) on a uniform grid of `steps`
/// intervals, calling observe(index, t, y) at every node including the first.
template <typename State, typename Rhs, typename Observer>
void integrate(const Rhs& f, double t0, double t1, State y, int steps, Scheme scheme,
               const Observer& observe) {
    const double h = (t1 - t0) / steps;
    observe(0, t0, y);
    for (int k = 0; k < steps; ++k) {
        const double t = t0 + k * h;
        y = step(f, t, y, h, scheme);
        observe(k + 1, t0 + (k + 1) * h, y);
    }
}

}  // namespace bpc::ode
