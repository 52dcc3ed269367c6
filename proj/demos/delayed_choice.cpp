// Two copies of the same two-arm interferometer, one with the recombining
// beam splitter removed. With it in place both arm projectors carry weak
// value 1/2 and the two arm pointers are strictly anti-correlated: a run in
// which one pointer is found displaced is a run in which the other certainly
// is not.

#include <cstdio>

#include <tsvf/tsvf.hpp>

using namespace tsvf;

namespace {

void print_arm_values(const Scenario& sc) {
    std::printf("%s:\n", sc.id.c_str());
    for (const auto& post_text : sc.post_selections) {
        const Selection post = parse_post_selection(post_text);
        std::printf("  %-4s", post_text.c_str());
        for (const auto& [name, pt] : sc.circuit.marked_points()) {
            try {
                const auto tsv = two_state_at(sc.circuit, sc.pre, post, name);
                const Complex v = weak_value(tsv, LocalProjector::on_path(pt.mode)).value;
                std::printf("  %s = %5.2f%+5.2fi", name.c_str(), v.real(), v.imag());
            } catch (const ImpossiblePostSelection&) {
                std::printf("  %s = (never clicks)", name.c_str());
            }
        }
        std::printf("\n");
    }
}

} // namespace

int main() {
    print_arm_values(load_scenario("wheeler_open"));
    print_arm_values(load_scenario("wheeler_closed"));

    const Scenario sc = load_scenario("wheeler_closed");
    const PointerConfig cfg(1.0, 0.1);
    const JointState joint = couple(sc.circuit, sc.pre, {{"upper", cfg}, {"lower", cfg}});
    const PostSelected ps = postselect(joint, parse_post_selection("D2"));

    std::printf("\nwheeler_closed, D2, coupling strength %.2f on both arms:\n", 0.1);
    std::printf("  click probability           %.12f\n", ps.probability);

    const ReadoutResult upper = readout(ps.bundle, 0);
    std::printf("  P(upper pointer displaced)  %.12f\n", upper.p_orthogonal);
    const ReadoutResult then_lower = readout(upper.orthogonal, 1);
    std::printf("  ... then P(lower displaced) %.12f\n", then_lower.p_orthogonal);
    std::printf("  ... then P(lower at rest)   %.12f\n", then_lower.p_found);
    std::printf("\nBoth pointers are never displaced together: finding one moved pins the\n"
                "other to its initial wavepacket exactly.\n");
    return 0;
}
