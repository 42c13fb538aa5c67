#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "varsolve/catalog.hpp"

namespace varsolve {

/// Even, nonnegative, continuous nonlinearity whose primitive F alternates
/// superquadratic peaks with long flat plateaus, so that the quotient
/// F(t)/t^2 oscillates between m^2 at the peaks b_m and 1/m^2 at the plateau
/// ends c_m. Stage m places a triangular spike on [b_m/2, b_m] sized so that
/// F(b_m) = m^2 b_m^2 exactly.
///
/// Two regimes: peaks marching to +infinity (b_{m+1} = 2 c_m, c_m = m^2 b_m)
/// or accumulating at 0 (b_{m+1} = b_m / (2 (m+1)^2)). Spike widths scale
/// with b_m, keeping every slope at most 16 m^2 regardless of magnitude.
class SpikeTrain {
public:
    static SpikeTrain at_infinity(int stages) {
        if (stages < 1) throw InvalidDimensionError("spike train needs >= 1 stage");
        std::vector<double> b(stages), c(stages), target(stages);
        b[0] = 2.0;
        for (int m = 1; m <= stages; ++m) {
            if (m > 1) b[m - 1] = 2.0 * c[m - 2];
            c[m - 1] = static_cast<double>(m) * m * b[m - 1];
            target[m - 1] = static_cast<double>(m) * m * b[m - 1] * b[m - 1];
        }
        std::vector<std::pair<double, double>> pts;
        pts.emplace_back(0.0, 0.0);
        double accumulated = 0.0;
        for (int m = 1; m <= stages; ++m) {
            const double lo = b[m - 1] / 2.0;
            const double area = target[m - 1] - accumulated;
            const double height = 4.0 * area / b[m - 1];
            if (pts.back().first < lo) pts.emplace_back(lo, 0.0);
            pts.emplace_back(0.75 * b[m - 1], height);
            pts.emplace_back(b[m - 1], 0.0);
            accumulated = target[m - 1];
        }
        // closing plateau out to the last c_m
        pts.emplace_back(c[stages - 1] + 1.0, 0.0);
        return SpikeTrain(Regime::at_infinity, std::move(b), std::move(c),
                          std::move(target), std::move(pts));
    }

    static SpikeTrain at_zero(int stages) {
        if (stages < 1) throw InvalidDimensionError("spike train needs >= 1 stage");
        std::vector<double> b(stages), c(stages), target(stages);
        b[0] = 0.5;
        for (int m = 2; m <= stages; ++m)
            b[m - 1] = b[m - 2] / (2.0 * m * m);
        for (int m = 1; m <= stages; ++m)
            target[m - 1] = static_cast<double>(m) * m * b[m - 1] * b[m - 1];
        c[0] = 4.0 * b[0];
        for (int m = 2; m <= stages; ++m) c[m - 1] = b[m - 2] / 2.0;

        // Walk stages from the innermost spike outward so abscissas ascend.
        std::vector<std::pair<double, double>> pts;
        pts.emplace_back(0.0, 0.0);
        double accumulated = 0.0; // mass below the current spike
        for (int m = stages; m >= 1; --m) {
            const double lo = b[m - 1] / 2.0;
            const double area = target[m - 1] - accumulated;
            const double height = 4.0 * area / b[m - 1];
            pts.emplace_back(lo, 0.0);
            pts.emplace_back(0.75 * b[m - 1], height);
            pts.emplace_back(b[m - 1], 0.0);
            accumulated = target[m - 1];
        }
        pts.emplace_back(c[0] + 1.0, 0.0);
        return SpikeTrain(Regime::at_zero, std::move(b), std::move(c),
                          std::move(target), std::move(pts));
    }

    Regime regime() const { return regime_; }
    int stages() const { return static_cast<int>(peaks_.size()); }

    /// Peak positions b_m, one per stage.
    const std::vector<double>& peaks() const { return peaks_; }
    /// Plateau-end positions c_m (the witness sequence for the A-quotient).
    const std::vector<double>& plateau_ends() const { return plateau_ends_; }
    /// F(b_m) targets m^2 b_m^2.
    const std::vector<double>& primitive_at_peaks() const { return targets_; }

    double operator()(double t) const { return (*profile_)(std::abs(t)); }

    double primitive(double t) const {
        const double v = profile_->primitive(std::abs(t));
        return t < 0.0 ? -v : v;
    }

    double slope(double t) const {
        const double s = profile_->slope(std::abs(t));
        return t < 0.0 ? -s : s;
    }

    ComponentFunction component() const {
        auto self = *this;
        return ComponentFunction([self](double t) { return self(t); },
                                 [self](double t) { return self.primitive(t); },
                                 [self](double t) { return self.slope(t); });
    }

private:
    SpikeTrain(Regime r, std::vector<double> b, std::vector<double> c,
               std::vector<double> targets, std::vector<std::pair<double, double>> pts)
        : regime_(r), peaks_(std::move(b)), plateau_ends_(std::move(c)),
          targets_(std::move(targets)),
          profile_(std::make_shared<PiecewiseLinear>(std::move(pts))) {}

    Regime regime_;
    std::vector<double> peaks_;
    std::vector<double> plateau_ends_;
    std::vector<double> targets_;
    std::shared_ptr<PiecewiseLinear> profile_;
};

} // namespace varsolve
