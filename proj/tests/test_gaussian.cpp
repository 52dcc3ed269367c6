#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "tsvf/gaussian.hpp"
#include "tsvf/pointer_lab.hpp"

using namespace tsvf;
using Catch::Matchers::WithinAbs;

namespace {

// Composite Simpson rule on [lo, hi].
double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 4000) {
    if (n % 2 != 0) ++n;
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

} // namespace

TEST_CASE("single Gaussian is unit-normalized with variance width^2/2") {
    const double w = 0.8;
    const GaussianSum g = GaussianSum::single(w, 0.3);
    const double total = simpson([&](double x) { return g.density(x); }, 0.3 - 10 * w, 0.3 + 10 * w);
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-9));

    const double var = simpson([&](double x) { return (x - 0.3) * (x - 0.3) * g.density(x); },
                               0.3 - 10 * w, 0.3 + 10 * w);
    REQUIRE_THAT(var, WithinAbs(w * w / 2.0, 1e-9));
}

TEST_CASE("pairwise overlap matches direct quadrature") {
    const double w = 1.3, a = 0.4, b = -0.9;
    const GaussianSum ga = GaussianSum::single(w, a);
    const GaussianSum gb = GaussianSum::single(w, b);
    const double quad = simpson(
        [&](double x) { return (std::conj(ga.amplitude(x)) * gb.amplitude(x)).real(); }, -14, 14);
    REQUIRE_THAT(gaussian_overlap(a, b, w), WithinAbs(quad, 1e-9));
    REQUIRE(gaussian_overlap(a, a, w) == 1.0);
}

TEST_CASE("closed-form moments of a displaced superposition match quadrature") {
    const double w = 0.8;
    const GaussianSum psi(w, {{Complex{0.6, 0.3}, 0.2}, {Complex{-0.4, 0.5}, 1.1}});

    const double nrm = simpson([&](double x) { return psi.density(x); }, -12, 14);
    REQUIRE_THAT(psi.norm_squared(), WithinAbs(nrm, 1e-9));

    const double xq = simpson([&](double x) { return x * psi.density(x); }, -12, 14) / nrm;
    REQUIRE_THAT(psi.mean_position(), WithinAbs(xq, 1e-9));

    // <p> via Im(conj(psi) dpsi/dx) with an analytic term-wise derivative.
    auto dpsi = [&](double x) {
        const double nc = std::pow(std::numbers::pi * w * w, -0.25);
        Complex s{0.0, 0.0};
        for (const auto& t : psi.terms()) {
            const double d = x - t.center;
            s += t.weight * nc * std::exp(-d * d / (2 * w * w)) * (-d / (w * w));
        }
        return s;
    };
    const double pq =
        simpson([&](double x) { return (std::conj(psi.amplitude(x)) * dpsi(x)).imag(); }, -12, 14) /
        nrm;
    REQUIRE_THAT(psi.mean_momentum(), WithinAbs(pq, 1e-9));
}

TEST_CASE("momentum reading is a pure cross-term effect") {
    const double w = 1.0;
    const GaussianSum real_weights(w, {{Complex{0.7, 0.0}, 0.0}, {Complex{0.3, 0.0}, 0.5}});
    REQUIRE_THAT(real_weights.mean_momentum(), WithinAbs(0.0, 1e-15));

    const GaussianSum phased(w, {{Complex{0.7, 0.0}, 0.0}, {Complex{0.0, 0.3}, 0.5}});
    REQUIRE(std::abs(phased.mean_momentum()) > 1e-3);
    const GaussianSum single = GaussianSum::single(w, 2.0);
    REQUIRE_THAT(single.mean_momentum(), WithinAbs(0.0, 1e-15));
}

TEST_CASE("degenerate pointer configurations are rejected") {
    REQUIRE_THROWS_AS(PointerConfig(0.0, 0.1), ConfigError);
    REQUIRE_THROWS_AS(PointerConfig(-1.0, 0.1), ConfigError);
    REQUIRE_THROWS_AS(PointerConfig(1.0, std::nan("")), ConfigError);
    REQUIRE(PointerConfig(2.0, 0.0).shift() == 0.0);
    REQUIRE_THAT(PointerConfig(2.0, 0.1).shift(), WithinAbs(0.2, 1e-15));

    const GaussianSum zero(1.0, {{Complex{1.0, 0.0}, 0.0}, {Complex{-1.0, 0.0}, 0.0}});
    REQUIRE_THROWS_AS(zero.mean_position(), StructureError);
}

TEST_CASE("dark-output flux ratio matches quadrature of the interfering pointer") {
    for (const double eps : {0.01, 0.05, 0.1, 0.2}) {
        const double w = 1.0;
        const double d = eps * w;
        // One branch shifted, one not, combining with opposite signs at the
        // dark output of a balanced splitter.
        const GaussianSum dark(w, {{Complex{0.5, 0.0}, d}, {Complex{-0.5, 0.0}, 0.0}});
        const double quad = simpson([&](double x) { return dark.density(x); }, -12, 12, 8000);

        const LeakRatio lr = leak_ratio(eps);
        INFO("epsilon " << eps);
        REQUIRE_THAT(lr.exact, WithinAbs(quad, 1e-9));
        // Small-coupling model within the stated band.
        REQUIRE(lr.exact / lr.asymptotic >= 1.0 - eps * eps / 4.0);
        REQUIRE(lr.exact / lr.asymptotic <= 1.0 + eps * eps / 4.0);
        REQUIRE_THAT(lr.asymptotic, WithinAbs(eps * eps / 8.0, 1e-18));
    }
    REQUIRE(leak_ratio(0.0).exact == 0.0);
    REQUIRE(leak_ratio(0.0).asymptotic == 0.0);
    REQUIRE_THROWS_AS(leak_ratio(-0.1), ConfigError);
    REQUIRE_THROWS_AS(leak_ratio(std::nan("")), ConfigError);
}

TEST_CASE("frozen dark-flux values stay pinned") {
    // Reference values computed independently at 17 significant digits.
    REQUIRE_THAT(leak_ratio(0.01).exact, WithinAbs(1.2499843751290207e-05, 1e-17));
    REQUIRE_THAT(leak_ratio(0.05).exact, WithinAbs(0.00031240236409185718, 1e-15));
    REQUIRE_THAT(leak_ratio(0.1).exact, WithinAbs(0.0012484388012699577, 1e-15));
    REQUIRE_THAT(leak_ratio(0.2).exact, WithinAbs(0.0049750831254159467, 1e-15));
}
