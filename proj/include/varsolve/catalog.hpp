#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "varsolve/nonlinearity.hpp"

namespace varsolve {

/// f(t) = sum c_i t^i with exact primitive and derivative.
inline ComponentFunction polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) coeffs.push_back(0.0);
    auto c = std::make_shared<std::vector<double>>(std::move(coeffs));
    auto eval = [c](double t) {
        double v = 0.0;
        for (auto it = c->rbegin(); it != c->rend(); ++it) v = v * t + *it;
        return v;
    };
    auto prim = [c](double t) {
        double v = 0.0;
        const int d = static_cast<int>(c->size());
        for (int i = d - 1; i >= 0; --i) v = v * t + (*c)[i] / (i + 1);
        return v * t;
    };
    auto deriv = [c](double t) {
        double v = 0.0;
        const int d = static_cast<int>(c->size());
        for (int i = d - 1; i >= 1; --i) v = v * t + (*c)[i] * i;
        return v;
    };
    return ComponentFunction(eval, prim, deriv);
}

/// f(t) = a sin(b t); primitive a (1 - cos(b t)) / b.
inline ComponentFunction sine(double amplitude, double frequency) {
    if (frequency == 0.0) return polynomial({0.0});
    auto eval = [=](double t) { return amplitude * std::sin(frequency * t); };
    auto prim = [=](double t) {
        return amplitude * (1.0 - std::cos(frequency * t)) / frequency;
    };
    auto deriv = [=](double t) {
        return amplitude * frequency * std::cos(frequency * t);
    };
    return ComponentFunction(eval, prim, deriv);
}

/// f(t) = a cos(b t); primitive a sin(b t) / b.
inline ComponentFunction cosine(double amplitude, double frequency) {
    if (frequency == 0.0) return polynomial({amplitude});
    auto eval = [=](double t) { return amplitude * std::cos(frequency * t); };
    auto prim = [=](double t) { return amplitude * std::sin(frequency * t) / frequency; };
    auto deriv = [=](double t) {
        return -amplitude * frequency * std::sin(frequency * t);
    };
    return ComponentFunction(eval, prim, deriv);
}

inline ComponentFunction zero_function() { return polynomial({0.0}); }

/// Piecewise-linear interpolant of (x, y) breakpoints with constant
/// extension outside the table. The primitive is the exact piecewise
/// quadratic anchored so that it vanishes at 0.
class PiecewiseLinear {
public:
    explicit PiecewiseLinear(std::vector<std::pair<double, double>> points) {
        if (points.size() < 2)
            throw InvalidDimensionError("piecewise-linear table needs >= 2 points");
        std::sort(points.begin(), points.end());
        for (std::size_t i = 1; i < points.size(); ++i)
            if (points[i].first == points[i - 1].first)
                throw StructuralError("piecewise-linear table has a duplicate abscissa");
        xs_.reserve(points.size());
        ys_.reserve(points.size());
        for (auto& [x, y] : points) {
            xs_.push_back(x);
            ys_.push_back(y);
        }
        // Cumulative integral from xs_[0], exact trapezoids per segment.
        cum_.assign(xs_.size(), 0.0);
        for (std::size_t i = 1; i < xs_.size(); ++i)
            cum_[i] = cum_[i - 1] +
                      0.5 * (ys_[i] + ys_[i - 1]) * (xs_[i] - xs_[i - 1]);
        anchor_ = raw_integral(0.0);
    }

    double operator()(double t) const {
        if (t <= xs_.front()) return ys_.front();
        if (t >= xs_.back()) return ys_.back();
        const std::size_t i = segment(t);
        const double w = (t - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return ys_[i] + w * (ys_[i + 1] - ys_[i]);
    }

    /// Integral from 0 to t.
    double primitive(double t) const { return raw_integral(t) - anchor_; }

    /// Segment slope; right-continuous at breakpoints, constant-extension
    /// slope 0 outside the table.
    double slope(double t) const {
        if (t < xs_.front() || t >= xs_.back()) return 0.0;
        const std::size_t i = segment(t);
        return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
    }

    const std::vector<double>& abscissas() const { return xs_; }

private:
    std::size_t segment(double t) const {
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
        return std::min(std::max<std::size_t>(i, 1) - 1, xs_.size() - 2);
    }

    double raw_integral(double t) const {
        if (t <= xs_.front()) return ys_.front() * (t - xs_.front());
        if (t >= xs_.back()) return cum_.back() + ys_.back() * (t - xs_.back());
        const std::size_t i = segment(t);
        const double dt = t - xs_[i];
        const double m = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
        return cum_[i] + ys_[i] * dt + 0.5 * m * dt * dt;
    }

    std::vector<double> xs_, ys_, cum_;
    double anchor_ = 0.0;
};

inline ComponentFunction table_function(std::vector<std::pair<double, double>> points) {
    auto pl = std::make_shared<PiecewiseLinear>(std::move(points));
    return ComponentFunction([pl](double t) { return (*pl)(t); },
                             [pl](double t) { return pl->primitive(t); },
                             [pl](double t) { return pl->slope(t); });
}

} // namespace varsolve
