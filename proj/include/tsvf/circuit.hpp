#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tsvf/state.hpp"

namespace tsvf {

// Optical elements. Within a stage each mode may be touched by at most one
// element; elements in one stage commute and are applied as a single unitary.
struct BeamSplitter {
    std::string mode_a;
    std::string mode_b;
    double theta = std::numbers::pi / 4; // pi/4 with phi = 0 gives a 50/50 splitter
    double phi = 0.0;
};

struct Mirror {
    std::string mode_from;
    std::string mode_to;
};

struct PhaseShifter {
    std::string mode;
    double phase = 0.0;
};

struct PolarizationRotator {
    std::string mode;
    double angle = 0.0;
};

// Flips the ancilla qubit on branches occupying `mode`.
struct AncillaFlip {
    std::string mode;
};

// Absorbing readout of one mode in the final stage.
struct Detector {
    std::string mode;
    std::string name;
};

using Element =
    std::variant<BeamSplitter, Mirror, PhaseShifter, PolarizationRotator, AncillaFlip, Detector>;

inline std::vector<std::string> touched_modes(const Element& e) {
    return std::visit(
        [](const auto& el) -> std::vector<std::string> {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, BeamSplitter>) return {el.mode_a, el.mode_b};
            else if constexpr (std::is_same_v<T, Mirror>) return {el.mode_from, el.mode_to};
            else if constexpr (std::is_same_v<T, PhaseShifter>) return {el.mode};
            else if constexpr (std::is_same_v<T, PolarizationRotator>) return {el.mode};
            else if constexpr (std::is_same_v<T, AncillaFlip>) return {el.mode};
            else return {el.mode};
        },
        e);
}

// A named reference point: the state slice after `boundary` stages, at `mode`.
struct MarkedPoint {
    std::size_t boundary = 0;
    std::string mode;
};

// Pre-selection (an input state) or post-selection (a detector click with all
// internal factors pinned, e.g. "D2|H").
struct Selection {
    enum class Kind { input_state, detector_click };

    Kind kind = Kind::input_state;
    std::optional<PureState> state;
    std::string detector;
    std::optional<Polarization> pol;
    std::optional<Ancilla> anc;

    static Selection input(PureState s) {
        Selection sel;
        sel.kind = Kind::input_state;
        sel.state = std::move(s);
        return sel;
    }

    static Selection click(std::string detector_name, std::optional<Polarization> pol = {},
                           std::optional<Ancilla> anc = {}) {
        Selection sel;
        sel.kind = Kind::detector_click;
        sel.detector = std::move(detector_name);
        sel.pol = pol;
        sel.anc = anc;
        return sel;
    }

    // "D2", "D2|H", "D2|up", "D2|H|up"
    std::string describe() const {
        if (kind == Kind::input_state) return "input";
        std::string s = detector;
        if (pol) { s += '|'; s += to_string(*pol); }
        if (anc) { s += '|'; s += to_string(*anc); }
        return s;
    }
};

// Parses "D2", "D2|H", "D2|up", "D2|H|up".
inline Selection parse_post_selection(const std::string& text) {
    BasisLabel l = parse_label(text);
    return Selection::click(l.path, l.pol, l.anc);
}

namespace detail {

// Mixes two mode slots with the 2x2 matrix [[uaa, uab], [uba, ubb]], applied
// identically to every internal component.
inline void mix_modes(const HilbertSpace& h, std::vector<Complex>& a, std::size_t pa,
                      std::size_t pb, Complex uaa, Complex uab, Complex uba, Complex ubb) {
    for (std::size_t p = 0; p < h.pol_dim(); ++p)
        for (std::size_t q = 0; q < h.anc_dim(); ++q) {
            const std::size_t i = h.index(pa, p, q);
            const std::size_t j = h.index(pb, p, q);
            const Complex x = a[i];
            const Complex y = a[j];
            a[i] = uaa * x + uab * y;
            a[j] = uba * x + ubb * y;
        }
}

inline void apply_element(const HilbertSpace& h, std::vector<Complex>& a, const Element& e,
                          bool adjoint) {
    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
        const double th = adjoint ? -bs->theta : bs->theta;
        const Complex c{std::cos(th), 0.0};
        const Complex s = Complex{0.0, 1.0} * std::sin(th);
        const Complex eip = std::polar(1.0, bs->phi);
        mix_modes(h, a, h.path_index(bs->mode_a), h.path_index(bs->mode_b), c, s * eip,
                  s * std::conj(eip), c);
    } else if (const auto* m = std::get_if<Mirror>(&e)) {
        mix_modes(h, a, h.path_index(m->mode_from), h.path_index(m->mode_to), {0, 0}, {1, 0},
                  {1, 0}, {0, 0});
    } else if (const auto* ph = std::get_if<PhaseShifter>(&e)) {
        const Complex f = std::polar(1.0, adjoint ? -ph->phase : ph->phase);
        const std::size_t pi_ = h.path_index(ph->mode);
        for (std::size_t p = 0; p < h.pol_dim(); ++p)
            for (std::size_t q = 0; q < h.anc_dim(); ++q) a[h.index(pi_, p, q)] *= f;
    } else if (const auto* r = std::get_if<PolarizationRotator>(&e)) {
        const double ang = adjoint ? -r->angle : r->angle;
        const double c = std::cos(ang);
        const double s = std::sin(ang);
        const std::size_t pi_ = h.path_index(r->mode);
        for (std::size_t q = 0; q < h.anc_dim(); ++q) {
            const std::size_t iH = h.index(pi_, 0, q);
            const std::size_t iV = h.index(pi_, 1, q);
            const Complex hamp = a[iH];
            const Complex vamp = a[iV];
            a[iH] = c * hamp - s * vamp;
            a[iV] = s * hamp + c * vamp;
        }
    } else if (const auto* fl = std::get_if<AncillaFlip>(&e)) {
        const std::size_t pi_ = h.path_index(fl->mode);
        for (std::size_t p = 0; p < h.pol_dim(); ++p)
            std::swap(a[h.index(pi_, p, 0)], a[h.index(pi_, p, 1)]);
    }
    // Detector: identity for propagation; the readout happens by conditioning
    // on the detector's mode at the final boundary.
}

} // namespace detail

// Staged interferometer over declared modes. Immutable after construction.
class Circuit {
  public:
    Circuit(std::vector<std::string> modes, bool has_polarization, bool has_ancilla,
            std::vector<std::vector<Element>> stages,
            std::map<std::string, MarkedPoint> marked_points)
        : space_(HilbertSpace::make(std::move(modes), has_polarization, has_ancilla)),
          stages_(std::move(stages)), marked_points_(std::move(marked_points)) {
        if (!stages_.empty())
            for (const auto& e : stages_.back())
                if (const auto* d = std::get_if<Detector>(&e)) detectors_.push_back(*d);
    }

    const SpacePtr& space() const { return space_; }
    std::size_t stage_count() const { return stages_.size(); }
    std::size_t final_boundary() const { return stages_.size(); }
    const std::vector<std::vector<Element>>& stages() const { return stages_; }
    const std::map<std::string, MarkedPoint>& marked_points() const { return marked_points_; }
    const std::vector<Detector>& detectors() const { return detectors_; }

    const MarkedPoint& marked_point(const std::string& name) const {
        auto it = marked_points_.find(name);
        if (it == marked_points_.end()) throw ConfigError("unknown marked point '" + name + "'");
        return it->second;
    }

    const Detector& detector(const std::string& name) const {
        for (const auto& d : detectors_)
            if (d.name == name) return d;
        throw ConfigError("unknown detector '" + name + "'");
    }

    bool has_detector(const std::string& name) const {
        for (const auto& d : detectors_)
            if (d.name == name) return true;
        return false;
    }

    // Structural checks; returns one message per violation, empty when valid.
    std::vector<std::string> validate() const {
        std::vector<std::string> diags;
        const HilbertSpace& h = *space_;
        for (std::size_t s = 0; s < stages_.size(); ++s) {
            std::map<std::string, int> touched;
            for (const auto& e : stages_[s]) {
                for (const auto& m : touched_modes(e)) {
                    if (!h.has_path(m))
                        diags.push_back("stage " + std::to_string(s) + ": undeclared mode '" + m + "'");
                    if (++touched[m] == 2)
                        diags.push_back("stage " + std::to_string(s) + ": mode '" + m +
                                        "' touched by two elements");
                }
                if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
                    if (bs->mode_a == bs->mode_b)
                        diags.push_back("stage " + std::to_string(s) +
                                        ": beam splitter needs two distinct modes");
                    if (!std::isfinite(bs->theta) || !std::isfinite(bs->phi))
                        diags.push_back("stage " + std::to_string(s) +
                                        ": beam splitter parameters must be finite");
                } else if (const auto* m = std::get_if<Mirror>(&e)) {
                    if (m->mode_from == m->mode_to)
                        diags.push_back("stage " + std::to_string(s) +
                                        ": mirror needs two distinct modes");
                } else if (const auto* ph = std::get_if<PhaseShifter>(&e)) {
                    if (!std::isfinite(ph->phase))
                        diags.push_back("stage " + std::to_string(s) + ": phase must be finite");
                } else if (const auto* r = std::get_if<PolarizationRotator>(&e)) {
                    if (!h.has_polarization())
                        diags.push_back("stage " + std::to_string(s) +
                                        ": polarization rotator in a circuit without polarization");
                    if (!std::isfinite(r->angle))
                        diags.push_back("stage " + std::to_string(s) + ": angle must be finite");
                } else if (std::get_if<AncillaFlip>(&e)) {
                    if (!h.has_ancilla())
                        diags.push_back("stage " + std::to_string(s) +
                                        ": ancilla flip in a circuit without an ancilla");
                } else if (std::get_if<Detector>(&e)) {
                    if (s + 1 != stages_.size())
                        diags.push_back("stage " + std::to_string(s) +
                                        ": detector before the final stage");
                }
            }
        }
        std::map<std::string, int> det_names;
        for (const auto& d : detectors_)
            if (++det_names[d.name] == 2) diags.push_back("duplicate detector name '" + d.name + "'");
        for (const auto& [name, pt] : marked_points_) {
            if (pt.boundary > stages_.size())
                diags.push_back("marked point '" + name + "': boundary " +
                                std::to_string(pt.boundary) + " out of range");
            if (!h.has_path(pt.mode))
                diags.push_back("marked point '" + name + "': undeclared mode '" + pt.mode + "'");
        }
        return diags;
    }

    void ensure_valid() const {
        auto diags = validate();
        if (diags.empty()) return;
        std::ostringstream os;
        os << "invalid circuit:";
        for (const auto& d : diags) os << "\n  - " << d;
        throw StructureError(os.str());
    }

    // State after stages [0, boundary).
    PureState forward_propagate(const PureState& input, std::size_t boundary) const {
        ensure_valid();
        check_boundary(boundary);
        if (!same_space(input.space(), space_))
            throw StructureError("forward_propagate: input state not on the circuit's space");
        std::vector<Complex> a = input.amplitudes();
        for (std::size_t s = 0; s < boundary; ++s) apply_stage(a, s, false);
        return PureState(space_, std::move(a));
    }

    // The basis state a detector click pins at the final boundary. All
    // internal factors of the space must be pinned by the selection so the
    // backward state is pure.
    PureState seed_state(const Selection& post) const {
        if (post.kind != Selection::Kind::detector_click)
            throw StructureError("seed_state: selection is not a detector click");
        const Detector& d = detector(post.detector);
        BasisLabel l;
        l.path = d.mode;
        if (space_->has_polarization()) {
            if (!post.pol)
                throw ConfigError("post-selection '" + post.detector +
                                  "' must pin the polarization (e.g. '" + post.detector + "|H')");
            l.pol = post.pol;
        } else if (post.pol) {
            throw ConfigError("post-selection pins polarization but the circuit has none");
        }
        if (space_->has_ancilla()) {
            if (!post.anc)
                throw ConfigError("post-selection '" + post.detector +
                                  "' must pin the ancilla (e.g. '" + post.detector + "|up')");
            l.anc = post.anc;
        } else if (post.anc) {
            throw ConfigError("post-selection pins an ancilla but the circuit has none");
        }
        return PureState::basis(space_, l);
    }

    // Seeds the click state at the final boundary and applies adjoint stages
    // down to `boundary`; the result is the backward state as a ket.
    PureState backward_propagate(const Selection& post, std::size_t boundary) const {
        ensure_valid();
        check_boundary(boundary);
        PureState seed = seed_state(post);
        std::vector<Complex> a = seed.amplitudes();
        for (std::size_t s = stages_.size(); s-- > boundary;) apply_stage(a, s, true);
        return PureState(space_, std::move(a));
    }

    void apply_stage(std::vector<Complex>& amplitudes, std::size_t stage, bool adjoint) const {
        for (const auto& e : stages_[stage]) detail::apply_element(*space_, amplitudes, e, adjoint);
    }

  private:
    void check_boundary(std::size_t boundary) const {
        if (boundary > stages_.size())
            throw StructureError("boundary " + std::to_string(boundary) + " out of range (max " +
                                 std::to_string(stages_.size()) + ")");
    }

    SpacePtr space_;
    std::vector<std::vector<Element>> stages_;
    std::map<std::string, MarkedPoint> marked_points_;
    std::vector<Detector> detectors_;
};

} // namespace tsvf
