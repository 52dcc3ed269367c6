#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "tsvf/state.hpp"

namespace tsvf {

// Width and coupling of one pointer. The centre of the pointer wavepacket is
// translated by shift() = epsilon * width on branches that occupy the coupled
// mode.
struct PointerConfig {
    double width = 1.0;   // Gaussian width parameter of the wavefunction
    double epsilon = 0.0; // dimensionless coupling strength

    PointerConfig() = default;
    PointerConfig(double width_, double epsilon_) : width(width_), epsilon(epsilon_) {
        if (!(width > 0.0)) throw ConfigError("pointer width must be positive");
        if (!std::isfinite(epsilon)) throw ConfigError("coupling strength must be finite");
    }

    double shift() const { return epsilon * width; }
};

// <g_a|g_b> for unit-norm Gaussians of common width: exp(-(a-b)^2 / (4 width^2)).
inline double gaussian_overlap(double a, double b, double width) {
    const double d = a - b;
    return std::exp(-d * d / (4.0 * width * width));
}

// A pointer wavefunction as a finite sum of equal-width Gaussians:
// psi(x) = sum_i w_i g_{a_i}(x), g_a(x) = (pi width^2)^{-1/4} exp(-(x-a)^2 / (2 width^2)).
class GaussianSum {
  public:
    struct Term {
        Complex weight;
        double center;
    };

    GaussianSum(double width, std::vector<Term> terms) : width_(width), terms_(std::move(terms)) {
        if (!(width_ > 0.0)) throw ConfigError("GaussianSum width must be positive");
    }

    static GaussianSum single(double width, double center = 0.0, Complex weight = {1.0, 0.0}) {
        return GaussianSum(width, {Term{weight, center}});
    }

    double width() const { return width_; }
    const std::vector<Term>& terms() const { return terms_; }

    Complex amplitude(double x) const {
        const double norm_c = std::pow(std::numbers::pi * width_ * width_, -0.25);
        Complex s{0.0, 0.0};
        for (const auto& t : terms_) {
            const double d = x - t.center;
            s += t.weight * norm_c * std::exp(-d * d / (2.0 * width_ * width_));
        }
        return s;
    }

    double density(double x) const { return std::norm(amplitude(x)); }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& ti : terms_)
            for (const auto& tj : terms_)
                s += (std::conj(ti.weight) * tj.weight).real() *
                     gaussian_overlap(ti.center, tj.center, width_);
        return s;
    }

    // Exact <x> over the density |psi(x)|^2.
    double mean_position() const {
        double num = 0.0;
        double den = 0.0;
        for (const auto& ti : terms_)
            for (const auto& tj : terms_) {
                const double ov = gaussian_overlap(ti.center, tj.center, width_);
                const double re = (std::conj(ti.weight) * tj.weight).real();
                num += re * 0.5 * (ti.center + tj.center) * ov;
                den += re * ov;
            }
        if (den <= 0.0) throw StructureError("mean_position: zero-norm pointer state");
        return num / den;
    }

    // Exact <p> (hbar = 1). Purely a cross-term effect; nonzero only when the
    // weights carry relative phases between displaced components.
    double mean_momentum() const {
        Complex num{0.0, 0.0};
        double den = 0.0;
        for (const auto& ti : terms_)
            for (const auto& tj : terms_) {
                const double ov = gaussian_overlap(ti.center, tj.center, width_);
                const Complex cw = std::conj(ti.weight) * tj.weight;
                num += cw * Complex{0.0, 1.0} * (ti.center - tj.center) /
                       (2.0 * width_ * width_) * ov;
                den += cw.real() * ov;
            }
        if (den <= 0.0) throw StructureError("mean_momentum: zero-norm pointer state");
        return num.real() / den;
    }

  private:
    double width_;
    std::vector<Term> terms_;
};

inline double pointer_expectation(const GaussianSum& pointer) { return pointer.mean_position(); }

} // namespace tsvf
