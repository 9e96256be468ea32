#pragma once

// Fidelity, purity, ensemble statistics over trajectory records, threshold
// location on a sweep, and oscillation-frequency extraction.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "steersim/linalg.hpp"
#include "steersim/trajectory.hpp"

namespace steersim {

template <int D>
double fidelity(const Mat<D>& rho, const Vec<D>& target) {
    const double f = herm_expect(rho, outer(target, target));
    if (f < -1e-9 || f > 1.0 + 1e-9) throw std::runtime_error("fidelity outside [0,1]");
    return std::clamp(f, 0.0, 1.0);
}

// Tr(rho^2) with eigenvalues inside [-1e-9, 0) clipped to zero first.
template <int D>
double purity(const Mat<D>& rho_bar) {
    const auto ev = eigvals_hermitian(rho_bar);
    if (ev[0] < -kEigvalTol)
        throw std::runtime_error("purity: averaged state has eigenvalue below -1e-9");
    double p = 0;
    for (double l : ev) {
        const double lc = std::max(l, 0.0);
        p += lc * lc;
    }
    return p;
}

struct SweepPoint {
    double gamma = 0;
    double mean_fidelity = 0;
    double fidelity_variance = 0;  // unbiased across trajectories
    double purity = 0;             // of the trajectory-and-time averaged state
    int n_trajectories = 0;
};

// Time-average each record over the final window, then aggregate across
// trajectories. Purity is computed from the window- and trajectory-averaged
// state (snapshots must cover the window).
template <int NQ>
SweepPoint late_time_stats(std::span<const TrajectoryRecord<NQ>> records, double window_fraction) {
    constexpr int D = SystemTraits<NQ>::dim;
    if (records.size() < 2) throw std::invalid_argument("late_time_stats needs at least 2 records");
    if (!(window_fraction > 0.0) || window_fraction > 1.0)
        throw std::invalid_argument("window_fraction must be in (0,1]");

    std::vector<double> means;
    means.reserve(records.size());
    Mat<D> rho_acc;
    long n_snap = 0;
    for (const auto& rec : records) {
        const int win = std::max(1, static_cast<int>(std::lround(window_fraction * rec.n_steps)));
        const int start = rec.n_steps - win;  // steps with index > start (1-based step > start)
        if (rec.n_steps <= 0 || start >= rec.n_steps)
            throw std::invalid_argument("late_time_stats: empty window");
        double s = 0;
        for (int t = start; t < rec.n_steps; ++t) s += rec.f_target[static_cast<std::size_t>(t)];
        means.push_back(s / win);
        for (std::size_t k = 0; k < rec.snapshot_steps.size(); ++k) {
            if (rec.snapshot_steps[k] > start) {
                rho_acc += rec.snapshots[k];
                ++n_snap;
            }
        }
    }
    if (n_snap == 0)
        throw std::invalid_argument("late_time_stats: no state snapshots inside the window");

    SweepPoint pt;
    pt.n_trajectories = static_cast<int>(records.size());
    double m = 0;
    for (double v : means) m += v;
    m /= static_cast<double>(means.size());
    double var = 0;
    for (double v : means) var += (v - m) * (v - m);
    var /= static_cast<double>(means.size() - 1);
    pt.mean_fidelity = m;
    pt.fidelity_variance = var;
    pt.purity = purity((1.0 / static_cast<double>(n_snap)) * rho_acc);
    return pt;
}

// Threshold rate from the purity dip of a log-spaced sweep. The located point
// is the smallest gamma whose purity is within `plateau_tol` of the global
// minimum (robust when the minimum is a flat plateau), refined by quadratic
// interpolation in log(gamma) when the neighbourhood supports it.
struct ThresholdEstimate {
    double gamma_c = 0;
    double min_purity = 0;
    int grid_index = 0;
};

inline ThresholdEstimate locate_threshold(std::span<const SweepPoint> sweep,
                                          double plateau_tol = 0.02) {
    if (sweep.size() < 5) throw std::invalid_argument("locate_threshold needs at least 5 points");
    for (std::size_t i = 1; i < sweep.size(); ++i)
        if (!(sweep[i].gamma > sweep[i - 1].gamma))
            throw std::invalid_argument("sweep points must have increasing gamma");

    double pmin = sweep[0].purity;
    for (const auto& p : sweep) pmin = std::min(pmin, p.purity);

    std::size_t sel = 0;
    while (sel < sweep.size() && sweep[sel].purity > pmin + plateau_tol) ++sel;

    if (sel == 0 || sel + 1 >= sweep.size())
        throw std::runtime_error("locate_threshold: minimum sits at the grid boundary (grid too narrow)");

    ThresholdEstimate est;
    est.grid_index = static_cast<int>(sel);
    est.min_purity = pmin;
    est.gamma_c = sweep[sel].gamma;

    // quadratic vertex in log(gamma) through the selected point and neighbours
    const double x0 = std::log(sweep[sel - 1].gamma), y0 = sweep[sel - 1].purity;
    const double x1 = std::log(sweep[sel].gamma), y1 = sweep[sel].purity;
    const double x2 = std::log(sweep[sel + 1].gamma), y2 = sweep[sel + 1].purity;
    const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    const double d0 = (y1 - y0) / (x1 - x0);
    const double d1 = (y2 - y1) / (x2 - x1);
    if (d1 > d0 && std::abs(den) > 1e-300) {  // positive curvature only
        const double xv = x1 - 0.5 * num / den;
        if (xv > x0 && xv < x2) est.gamma_c = std::exp(xv);
    }
    return est;
}

// Peak of the discrete Fourier magnitude spectrum (zero bin excluded) of a
// detrended, Hann-windowed trace. Returns the angular frequency and the
// peak-to-median ratio as a crude significance measure.
struct FrequencyPeak {
    double omega = 0;
    double snr = 0;
};

inline FrequencyPeak dominant_frequency(std::span<const double> trace, double dt) {
    const int n = static_cast<int>(trace.size());
    if (n < 256) throw std::invalid_argument("dominant_frequency needs at least 256 samples");
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");

    // remove linear trend, apply Hann window
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += i;
        sy += trace[static_cast<std::size_t>(i)];
        sxx += static_cast<double>(i) * i;
        sxy += i * trace[static_cast<std::size_t>(i)];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
    const double icept = (sy - slope * sx) / n;
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (n - 1)));
        y[static_cast<std::size_t>(i)] = (trace[static_cast<std::size_t>(i)] - icept - slope * i) * w;
    }

    // Goertzel magnitude per bin
    const int n_bins = n / 2;
    std::vector<double> mag(static_cast<std::size_t>(n_bins) + 1, 0.0);
    for (int k = 1; k <= n_bins; ++k) {
        const double w = 2.0 * kPi * k / n;
        const double coef = 2.0 * std::cos(w);
        double s0 = 0, s1 = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            s0 = y[static_cast<std::size_t>(i)] + coef * s1 - s2;
            s2 = s1;
            s1 = s0;
        }
        mag[static_cast<std::size_t>(k)] =
            std::sqrt(std::max(0.0, s1 * s1 + s2 * s2 - coef * s1 * s2));
    }

    int pk = 1;
    for (int k = 2; k <= n_bins; ++k)
        if (mag[static_cast<std::size_t>(k)] > mag[static_cast<std::size_t>(pk)]) pk = k;

    std::vector<double> sorted(mag.begin() + 1, mag.end());
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double med = sorted[sorted.size() / 2];
    const double peak_mag = mag[static_cast<std::size_t>(pk)];
    if (peak_mag < 1e-12 * n) throw std::runtime_error("dominant_frequency: flat trace, no peak");

    double k_ref = pk;
    if (pk > 1 && pk < n_bins) {
        const double l0 = std::log(std::max(mag[static_cast<std::size_t>(pk) - 1], 1e-300));
        const double l1 = std::log(peak_mag);
        const double l2 = std::log(std::max(mag[static_cast<std::size_t>(pk) + 1], 1e-300));
        const double dd = l0 - 2 * l1 + l2;
        if (dd < 0) k_ref = pk + 0.5 * (l0 - l2) / dd;
    }

    FrequencyPeak out;
    out.omega = 2.0 * kPi * k_ref / (n * dt);
    out.snr = med > 0 ? peak_mag / med : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace steersim
