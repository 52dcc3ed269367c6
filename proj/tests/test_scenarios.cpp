#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tsvf/pointer_lab.hpp"
#include "tsvf/scenarios.hpp"

using namespace tsvf;
using Catch::Matchers::WithinAbs;

TEST_CASE("the shipped catalogue lists exactly the five presets") {
    const auto ids = list_scenarios();
    REQUIRE(ids == std::vector<std::string>{"ancilla_marker", "nested_mzi", "polarization_marker",
                                            "wheeler_closed", "wheeler_open"});
    REQUIRE_THROWS_AS(load_scenario("flux_capacitor"), ConfigError);
    REQUIRE_THROWS_AS(list_scenarios("/nonexistent"), ConfigError);
}

TEST_CASE("every shipped preset is structurally sound") {
    for (const auto& id : list_scenarios()) {
        INFO("scenario " << id);
        const Scenario sc = load_scenario(id);
        REQUIRE(sc.circuit.validate().empty());
        REQUIRE(sc.pre.state.has_value());
        REQUIRE_THAT(sc.pre.state->norm(), WithinAbs(1.0, 1e-9));
        REQUIRE_FALSE(sc.post_selections.empty());
        for (const auto& post : sc.post_selections) {
            const Selection sel = parse_post_selection(post);
            REQUIRE(sc.circuit.has_detector(sel.detector));
            REQUIRE_NOTHROW(sc.circuit.seed_state(sel));
        }
        REQUIRE_FALSE(sc.ideal_probabilities.empty());
        REQUIRE_FALSE(sc.weak_values.empty());
    }
}

TEST_CASE("shipped probability tables match a fresh computation") {
    for (const auto& id : list_scenarios()) {
        const Scenario sc = load_scenario(id);
        const JointState joint = couple(sc.circuit, sc.pre, {});
        double total = 0.0;
        std::size_t covered = 0;
        for (const auto& oc : enumerate_outcomes(joint)) {
            const auto it = sc.ideal_probabilities.find(oc.selection.describe());
            if (it != sc.ideal_probabilities.end()) {
                INFO("scenario " << id << " outcome " << oc.selection.describe());
                REQUIRE_THAT(oc.probability, WithinAbs(it->second, 1e-12));
                ++covered;
            }
            total += oc.probability;
        }
        REQUIRE(covered == sc.ideal_probabilities.size());
        REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("shipped weak-value tables match a fresh computation") {
    for (const auto& id : list_scenarios()) {
        const Scenario sc = load_scenario(id);
        for (const auto& [post, points] : sc.weak_values) {
            for (const auto& [point, expected] : points) {
                INFO("scenario " << id << " post " << post << " point " << point);
                const auto tsv = two_state_at(sc.circuit, sc.pre, parse_post_selection(post), point);
                const Complex got =
                    weak_value(tsv, LocalProjector::on_path(sc.circuit.marked_point(point).mode))
                        .value;
                REQUIRE_THAT(std::abs(got - expected), WithinAbs(0.0, 1e-12));
            }
        }
    }
}

TEST_CASE("circular-projector tables match a fresh computation") {
    const Scenario sc = load_scenario("polarization_marker");
    REQUIRE_FALSE(sc.circular_weak_values.empty());
    for (const auto& [post, points] : sc.circular_weak_values) {
        for (const auto& [point, expected] : points) {
            INFO("post " << post << " point " << point);
            const auto tsv = two_state_at(sc.circuit, sc.pre, parse_post_selection(post), point);
            const LocalProjector op = LocalProjector::on_path(sc.circuit.marked_point(point).mode)
                                          .with_polarization(circular_right());
            REQUIRE_THAT(std::abs(weak_value(tsv, op).value - expected), WithinAbs(0.0, 1e-12));
        }
    }
}

TEST_CASE("polarization marker: plain and circular weak values at the frozen points") {
    const Scenario sc = load_scenario("polarization_marker");
    const Selection post = parse_post_selection("D2|H");

    const auto tsv_a = two_state_at(sc.circuit, sc.pre, post, "A");
    const auto tsv_b = two_state_at(sc.circuit, sc.pre, post, "B");
    REQUIRE_THAT(std::abs(weak_value(tsv_a, LocalProjector::on_path("A")).value - Complex(1, 0)),
                 WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(std::abs(weak_value(tsv_b, LocalProjector::on_path("B")).value), WithinAbs(0.0, 1e-12));

    const Complex circ_a =
        weak_value(tsv_a, LocalProjector::on_path("A").with_polarization(circular_right())).value;
    const Complex circ_b =
        weak_value(tsv_b, LocalProjector::on_path("B").with_polarization(circular_right())).value;
    REQUIRE_THAT(std::abs(circ_a - Complex(0.5, 0.0)), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(std::abs(circ_b - Complex(0.0, -0.5)), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(std::abs(circ_a), WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(std::abs(circ_b), WithinAbs(0.5, 1e-12));
}

TEST_CASE("ancilla marker: the marked arm carries no local weak value") {
    const Scenario sc = load_scenario("ancilla_marker");
    const Selection post = parse_post_selection("D2|up");
    const auto tsv = two_state_at(sc.circuit, sc.pre, post, "B");

    const Complex pb = weak_value(tsv, LocalProjector::on_path("B")).value;
    REQUIRE_THAT(std::abs(pb), WithinAbs(0.0, 1e-12));
    for (const Ancilla a : {Ancilla::up, Ancilla::down}) {
        const Complex v =
            weak_value(tsv, LocalProjector::on_path("B").with_ancilla(ancilla_projector(a))).value;
        REQUIRE_THAT(std::abs(v), WithinAbs(0.0, 1e-12));
    }
    const Complex pa =
        weak_value(tsv, LocalProjector::on_path("A")).value; // everything sits in the other arm
    REQUIRE_THAT(std::abs(pa - Complex(1.0, 0.0)), WithinAbs(0.0, 1e-12));
}

TEST_CASE("nested interferometer: the dark output of the inner loop stays dark") {
    const Scenario sc = load_scenario("nested_mzi");
    const MarkedPoint& e = sc.circuit.marked_point("E");
    const PureState slice = sc.circuit.forward_propagate(*sc.pre.state, e.boundary);
    REQUIRE_THAT(std::abs(slice.amplitude(parse_label("E"))), WithinAbs(0.0, 1e-12));

    // Detector probabilities of the uncoupled circuit.
    const PureState out = sc.circuit.forward_propagate(*sc.pre.state, sc.circuit.final_boundary());
    const std::vector<std::pair<std::string, double>> expect{
        {"D1", 0.25}, {"D2", 0.25}, {"D3", 0.5}};
    for (const auto& [name, p] : expect) {
        INFO("detector " << name);
        const std::string& mode = sc.circuit.detector(name).mode;
        REQUIRE_THAT(std::norm(out.amplitude(parse_label(mode))), WithinAbs(p, 1e-12));
    }
}

TEST_CASE("delayed-choice pair differs by exactly one stage") {
    const Scenario closed = load_scenario("wheeler_closed");
    const Scenario open = load_scenario("wheeler_open");
    REQUIRE(closed.circuit.stage_count() == open.circuit.stage_count());
    REQUIRE(open.circuit.stages()[1].empty());      // the recombiner is removed...
    REQUIRE(closed.circuit.stages()[1].size() == 1); // ...and nothing else changes
    REQUIRE(*closed.circuit.space() == *open.circuit.space());
}

TEST_CASE("slice overlap is boundary-independent for every preset and post-selection") {
    for (const auto& id : list_scenarios()) {
        const Scenario sc = load_scenario(id);
        for (const auto& post : sc.post_selections) {
            const Selection sel = parse_post_selection(post);
            Complex ref{0.0, 0.0};
            bool first = true;
            for (std::size_t b = 0; b <= sc.circuit.final_boundary(); ++b) {
                const Complex ov = inner_product(sc.circuit.backward_propagate(sel, b),
                                                 sc.circuit.forward_propagate(*sc.pre.state, b));
                if (first) {
                    ref = ov;
                    first = false;
                }
                INFO("scenario " << id << " post " << post << " boundary " << b);
                REQUIRE_THAT(std::abs(ov - ref), WithinAbs(0.0, 1e-12));
            }
        }
    }
}
