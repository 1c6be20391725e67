#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace bootlaw {

struct BfgsOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;   // on the gradient infinity norm
};

struct BfgsOutcome {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Dense inverse-Hessian BFGS with Armijo backtracking, sized for the small
/// parameter counts here (<= 7).  `f(x, grad)` returns the objective and fills
/// the gradient.  A failed line search ends the run unconverged but keeps the
/// best point found: near a Huber kink the search can stall at a point that is
/// still a perfectly good candidate for the multistart argmin.
template <typename F>
BfgsOutcome bfgs_minimize(F&& f, std::vector<double> x, const BfgsOptions& opt = {}) {
    const int d = static_cast<int>(x.size());
    std::vector<double> g(d), x_new(d), g_new(d), dir(d), s(d), y(d), hy(d);
    std::vector<double> h(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) h[i * d + i] = 1.0;

    auto inf_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double t : v) m = std::max(m, std::abs(t));
        return m;
    };

    BfgsOutcome out;
    double fx = f(x.data(), g.data());
    if (!std::isfinite(fx)) {
        out.x = std::move(x);
        out.value = fx;
        return out;
    }

    bool first_step = true;
    int stalled = 0;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        if (inf_norm(g) < opt.gradient_tolerance) {
            out.converged = true;
            break;
        }

        // dir = -H g; fall back to steepest descent if H has drifted away
        // from positive definiteness.
        double g_dot_dir = 0.0;
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += h[i * d + j] * g[j];
            dir[i] = -acc;
        }
        for (int i = 0; i < d; ++i) g_dot_dir += g[i] * dir[i];
        if (!(g_dot_dir < 0.0)) {
            std::fill(h.begin(), h.end(), 0.0);
            for (int i = 0; i < d; ++i) {
                h[i * d + i] = 1.0;
                dir[i] = -g[i];
            }
            g_dot_dir = 0.0;
            for (int i = 0; i < d; ++i) g_dot_dir += g[i] * dir[i];
            if (!(g_dot_dir < 0.0)) break;
        }

        // Unit step is the right default once H carries curvature; before
        // that, temper the raw gradient so huge first directions cannot jump
        // out of the useful region.
        double step = 1.0;
        if (first_step) step = std::min(1.0, 1.0 / std::max(1.0, inf_norm(g)));

        constexpr double c1 = 1e-4;
        double f_new = fx;
        bool accepted = false;
        for (int halvings = 0; halvings < 40; ++halvings) {
            for (int i = 0; i < d; ++i) x_new[i] = x[i] + step * dir[i];
            f_new = f(x_new.data(), g_new.data());
            if (std::isfinite(f_new) && f_new <= fx + c1 * step * g_dot_dir) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        double ys = 0.0, yy = 0.0, ss = 0.0;
        for (int i = 0; i < d; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
            ys += y[i] * s[i];
            yy += y[i] * y[i];
            ss += s[i] * s[i];
        }

        if (first_step && ys > 0.0 && yy > 0.0) {
            // Rescale the identity to the first observed curvature before the
            // first update; makes unit steps meaningful immediately.
            const double scale = ys / yy;
            for (int i = 0; i < d; ++i) h[i * d + i] = scale;
        }

        // Curvature guard: skip the update (keep H) when y's component along
        // s is too small to be trustworthy, e.g. straddling a Huber knee.
        if (ys > 1e-12 * std::sqrt(ss * yy)) {
            const double rho = 1.0 / ys;
            double y_h_y = 0.0;
            for (int i = 0; i < d; ++i) {
                double acc = 0.0;
                for (int j = 0; j < d; ++j) acc += h[i * d + j] * y[j];
                hy[i] = acc;
            }
            for (int i = 0; i < d; ++i) y_h_y += y[i] * hy[i];
            const double ss_coef = rho * (1.0 + rho * y_h_y);
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) {
                    h[i * d + j] += ss_coef * s[i] * s[j] -
                                    rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }

        // Progress test: accepted steps that no longer move the objective by
        // more than rounding noise mean the run is numerically done (dead-flat
        // valley or Huber-kink crawl); burning the remaining iteration budget
        // cannot change the outcome.  The run still ends unconverged unless
        // the gradient test below passes.
        const double decrease = fx - f_new;
        if (decrease <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(fx)) {
            ++stalled;
        } else {
            stalled = 0;
        }

        x.swap(x_new);
        g.swap(g_new);
        fx = f_new;
        first_step = false;
        if (stalled >= 4) {
            ++iter;
            break;
        }
    }

    if (!out.converged && inf_norm(g) < opt.gradient_tolerance) out.converged = true;
    out.x = std::move(x);
    out.value = fx;
    out.iterations = iter;
    return out;
}

} // namespace bootlaw
