#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

#include "tsvf/pointer_lab.hpp"
#include "tsvf/scenarios.hpp"

using namespace tsvf;
using Catch::Matchers::WithinAbs;

namespace {

double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 4000) {
    if (n % 2 != 0) ++n;
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

std::vector<PointerBundle::Term> sorted_terms(const PointerBundle& b) {
    auto ts = b.terms;
    std::sort(ts.begin(), ts.end(),
              [](const auto& a, const auto& b) { return a.centers < b.centers; });
    return ts;
}

} // namespace

TEST_CASE("coupling two probes inside the nested loop yields three exact branches") {
    const Scenario sc = load_scenario("nested_mzi");
    const PointerConfig cfg(1.0, 0.1);
    const double d = cfg.shift();
    const JointState joint =
        couple(sc.circuit, sc.pre, {Coupling{"B", cfg}, Coupling{"C", cfg}});
    const PostSelected ps = postselect(joint, parse_post_selection("D2"));

    const auto ts = sorted_terms(ps.bundle);
    REQUIRE(ts.size() == 3);
    // centers sorted lexicographically: (0,0), (0,d), (d,0)
    REQUIRE_THAT(std::abs(ts[0].weight - Complex(0.0, 0.5)), WithinAbs(0.0, 1e-12));
    REQUIRE(ts[0].centers == std::vector<double>{0.0, 0.0});
    REQUIRE_THAT(std::abs(ts[1].weight - Complex(0.0, -0.25)), WithinAbs(0.0, 1e-12));
    REQUIRE(ts[1].centers == std::vector<double>{0.0, d});
    REQUIRE_THAT(std::abs(ts[2].weight - Complex(0.0, 0.25)), WithinAbs(0.0, 1e-12));
    REQUIRE(ts[2].centers == std::vector<double>{d, 0.0});

    REQUIRE_THAT(ps.probability, WithinAbs(0.25062344010091475, 1e-14));
    REQUIRE_THAT(ps.bundle.mean(0), WithinAbs(0.049875466676144953, 1e-14));
    REQUIRE_THAT(ps.bundle.mean(1), WithinAbs(-0.049626710972902006, 1e-14));
}

TEST_CASE("detector outcomes are exhaustive and exclusive") {
    const Scenario sc = load_scenario("nested_mzi");
    const PointerConfig cfg(1.0, 0.1);
    std::vector<Coupling> all;
    for (const auto& [name, pt] : sc.circuit.marked_points()) all.push_back({name, cfg});
    const JointState joint = couple(sc.circuit, sc.pre, all);

    double total = 0.0;
    for (const auto& oc : enumerate_outcomes(joint)) {
        REQUIRE(oc.probability >= 0.0);
        total += oc.probability;
    }
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
}

TEST_CASE("single-probe conditional mean matches the frozen reference") {
    const Scenario sc = load_scenario("nested_mzi");
    const PointerConfig cfg(1.0, 0.1);
    const JointState joint = couple(sc.circuit, sc.pre, {Coupling{"C", cfg}});
    const PostSelected ps = postselect(joint, parse_post_selection("D2"));
    REQUIRE_THAT(ps.probability, WithinAbs(0.25093632910095254, 1e-14));
    REQUIRE_THAT(ps.bundle.mean(0), WithinAbs(-0.049626865865015579, 1e-14));

    const double again = exact_conditional_mean(sc.circuit, sc.pre, parse_post_selection("D2"),
                                                "C", cfg);
    REQUIRE_THAT(again, WithinAbs(-0.049626865865015579, 1e-14));

    // A pointer in the dead arm never moves, at any order.
    REQUIRE_THAT(exact_conditional_mean(sc.circuit, sc.pre, parse_post_selection("D2"), "E", cfg),
                 WithinAbs(0.0, 1e-14));
}

TEST_CASE("marginal density integrates to the outcome weight and reproduces the mean") {
    const Scenario sc = load_scenario("nested_mzi");
    const PointerConfig cfg(1.0, 0.1);
    const JointState joint =
        couple(sc.circuit, sc.pre, {Coupling{"B", cfg}, Coupling{"C", cfg}});
    const PointerBundle bundle = postselect(joint, parse_post_selection("D2")).bundle;

    for (std::size_t k : {std::size_t{0}, std::size_t{1}}) {
        const double mass =
            simpson([&](double x) { return bundle.marginal_density(k, x); }, -10, 10, 8000);
        REQUIRE_THAT(mass, WithinAbs(bundle.norm_squared(), 1e-9));
        const double mean_q =
            simpson([&](double x) { return x * bundle.marginal_density(k, x); }, -10, 10, 8000) /
            mass;
        REQUIRE_THAT(bundle.mean(k), WithinAbs(mean_q, 1e-9));
    }
}

TEST_CASE("single-pointer bundles convert to plain Gaussian sums") {
    const Scenario sc = load_scenario("nested_mzi");
    const PointerConfig cfg(1.0, 0.1);
    const JointState joint = couple(sc.circuit, sc.pre, {Coupling{"C", cfg}});
    const PointerBundle bundle = postselect(joint, parse_post_selection("D2")).bundle;

    const GaussianSum g = bundle.as_gaussian_sum();
    REQUIRE_THAT(g.mean_position(), WithinAbs(bundle.mean(0), 1e-14));
    REQUIRE_THAT(g.norm_squared(), WithinAbs(bundle.norm_squared(), 1e-14));

    const JointState two = couple(sc.circuit, sc.pre, {Coupling{"B", cfg}, Coupling{"C", cfg}});
    REQUIRE_THROWS_AS(postselect(two, parse_post_selection("D2")).bundle.as_gaussian_sum(),
                      StructureError);
}

TEST_CASE("coupling configuration is checked") {
    const Scenario sc = load_scenario("nested_mzi");
    const PointerConfig cfg(1.0, 0.1);
    REQUIRE_THROWS_AS(couple(sc.circuit, sc.pre, {Coupling{"B", cfg}, Coupling{"B", cfg}}),
                      ConfigError);
    REQUIRE_THROWS_AS(couple(sc.circuit, sc.pre, {Coupling{"nowhere", cfg}}), ConfigError);
    REQUIRE_THROWS_AS(
        postselect(couple(sc.circuit, sc.pre, {}), parse_post_selection("D9")), ConfigError);
}

TEST_CASE("zero coupling leaves a single unshifted branch") {
    const Scenario sc = load_scenario("nested_mzi");
    const PointerConfig cfg(1.0, 0.0);
    const JointState joint = couple(sc.circuit, sc.pre, {Coupling{"C", cfg}});
    const PostSelected ps = postselect(joint, parse_post_selection("D2"));
    REQUIRE(ps.bundle.terms.size() == 1);
    REQUIRE_THAT(ps.probability, WithinAbs(0.25, 1e-12));
    REQUIRE_THAT(ps.bundle.mean(0), WithinAbs(0.0, 1e-15));
}

TEST_CASE("impossible outcomes surface as zero probability or a typed error") {
    const Scenario sc = load_scenario("wheeler_closed");
    const PointerConfig off(1.0, 0.0);
    const JointState joint = couple(sc.circuit, sc.pre, {Coupling{"upper", off}});
    REQUIRE_THAT(postselect(joint, parse_post_selection("D1")).probability, WithinAbs(0.0, 1e-15));
    REQUIRE_THROWS_AS(
        exact_conditional_mean(sc.circuit, sc.pre, parse_post_selection("D1"), "upper", off),
        ImpossiblePostSelection);

    // With the probes on, the dark port opens at second order.
    const PointerConfig on(1.0, 0.1);
    const JointState lit =
        couple(sc.circuit, sc.pre, {Coupling{"upper", on}, Coupling{"lower", on}});
    REQUIRE_THAT(postselect(lit, parse_post_selection("D1")).probability,
                 WithinAbs(0.0024937604036588956, 1e-14));
}

TEST_CASE("projecting the probes back onto their initial packet anti-correlates") {
    const Scenario sc = load_scenario("wheeler_closed");
    const PointerConfig cfg(1.0, 0.1);
    const JointState joint =
        couple(sc.circuit, sc.pre, {Coupling{"upper", cfg}, Coupling{"lower", cfg}});

    const ReadoutResult ru = projective_readout(joint, parse_post_selection("D2"), "upper");
    REQUIRE_THAT(ru.p_found + ru.p_orthogonal, WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(ru.p_found, WithinAbs(0.99875000260416014, 1e-14));
    REQUIRE_THAT(ru.p_orthogonal, WithinAbs(0.0012499973958398701, 1e-14));

    // Given one probe was disturbed, the other is certainly undisturbed.
    const std::size_t lower = joint.coupling_index("lower");
    const ReadoutResult rl = readout(ru.orthogonal, lower);
    REQUIRE_THAT(rl.p_orthogonal, WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(rl.p_found, WithinAbs(1.0, 1e-12));

    // Same anti-correlation through the leaked dark port.
    const ReadoutResult du = projective_readout(joint, parse_post_selection("D1"), "upper");
    REQUIRE_THAT(du.p_found, WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(du.p_orthogonal, WithinAbs(0.5, 1e-12));
    const ReadoutResult dl = readout(du.orthogonal, lower);
    REQUIRE_THAT(dl.p_orthogonal, WithinAbs(0.0, 1e-12));
}

TEST_CASE("first-order shift is the coupling times the real part") {
    const WeakValue wv{Complex{-0.5, 0.3}, "P[C]"};
    REQUIRE_THAT(first_order_shift(wv, PointerConfig(1.0, 0.1)), WithinAbs(-0.05, 1e-15));
    REQUIRE_THAT(first_order_shift(wv, PointerConfig(2.0, 0.1)), WithinAbs(-0.1, 1e-15));
}
