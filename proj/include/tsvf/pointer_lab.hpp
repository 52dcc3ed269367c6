#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "tsvf/circuit.hpp"
#include "tsvf/gaussian.hpp"
#include "tsvf/two_state.hpp"

namespace tsvf {

// One weak von Neumann probe: a Gaussian pointer attached to a marked point.
struct Coupling {
    std::string point;
    PointerConfig config;
};

// Pointer wavefunction after conditioning on a detector outcome: a finite sum
// of products of Gaussians, one factor per coupled pointer. Unnormalized; the
// squared norm is the outcome probability.
struct PointerBundle {
    struct Term {
        Complex weight;
        std::vector<double> centers; // one centre per pointer, couplings order
    };

    std::vector<Coupling> couplings;
    std::vector<Term> terms;

    std::size_t pointer_count() const { return couplings.size(); }

    double pair_overlap(const Term& a, const Term& b) const {
        double ov = 1.0;
        for (std::size_t k = 0; k < couplings.size(); ++k)
            ov *= gaussian_overlap(a.centers[k], b.centers[k], couplings[k].config.width);
        return ov;
    }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : terms)
            for (const auto& b : terms)
                s += (std::conj(a.weight) * b.weight).real() * pair_overlap(a, b);
        return s;
    }

    // Exact mean position of pointer k over the joint density.
    double mean(std::size_t k) const {
        double num = 0.0;
        double den = 0.0;
        for (const auto& a : terms)
            for (const auto& b : terms) {
                const double ov = pair_overlap(a, b);
                const double re = (std::conj(a.weight) * b.weight).real();
                num += re * 0.5 * (a.centers[k] + b.centers[k]) * ov;
                den += re * ov;
            }
        if (den <= 0.0) throw StructureError("pointer mean: zero-norm bundle");
        return num / den;
    }

    // Exact mean momentum of pointer k (hbar = 1).
    double mean_momentum(std::size_t k) const {
        const double w2 = couplings[k].config.width * couplings[k].config.width;
        Complex num{0.0, 0.0};
        double den = 0.0;
        for (const auto& a : terms)
            for (const auto& b : terms) {
                const double ov = pair_overlap(a, b);
                const Complex cw = std::conj(a.weight) * b.weight;
                num += cw * Complex{0.0, 1.0} * (a.centers[k] - b.centers[k]) / (2.0 * w2) * ov;
                den += cw.real() * ov;
            }
        if (den <= 0.0) throw StructureError("pointer momentum: zero-norm bundle");
        return num.real() / den;
    }

    // Unnormalized marginal probability density of pointer k at x, the other
    // pointers integrated out.
    double marginal_density(std::size_t k, double x) const {
        const double width = couplings[k].config.width;
        const double norm_c = std::pow(std::numbers::pi * width * width, -0.5);
        double s = 0.0;
        for (const auto& a : terms)
            for (const auto& b : terms) {
                double rest = 1.0;
                for (std::size_t j = 0; j < couplings.size(); ++j)
                    if (j != k)
                        rest *= gaussian_overlap(a.centers[j], b.centers[j],
                                                 couplings[j].config.width);
                const double da = x - a.centers[k];
                const double db = x - b.centers[k];
                const double gg =
                    norm_c * std::exp(-(da * da + db * db) / (2.0 * width * width));
                s += (std::conj(a.weight) * b.weight).real() * gg * rest;
            }
        return s;
    }

    // Single-pointer bundles are plain Gaussian sums.
    GaussianSum as_gaussian_sum() const {
        if (couplings.size() != 1)
            throw StructureError("as_gaussian_sum: bundle has more than one pointer");
        std::vector<GaussianSum::Term> ts;
        ts.reserve(terms.size());
        for (const auto& t : terms) ts.push_back({t.weight, t.centers[0]});
        return GaussianSum(couplings[0].config.width, std::move(ts));
    }
};

namespace detail {

inline void merge_bundle_terms(std::vector<PointerBundle::Term>& terms) {
    std::map<std::vector<double>, Complex> merged;
    for (const auto& t : terms) merged[t.centers] += t.weight;
    terms.clear();
    for (auto& [centers, w] : merged)
        if (std::abs(w) > 1e-15) terms.push_back({w, centers});
}

} // namespace detail

// Joint particle-and-pointers state at the final circuit boundary, kept exact
// as a finite sum of (basis label, weight, pointer centres) terms.
class JointState {
  public:
    struct Term {
        std::size_t label; // dense index into the circuit space
        Complex weight;
        std::vector<double> centers;
    };

    JointState(SpacePtr space, std::vector<Detector> detectors, std::vector<Coupling> couplings,
               std::vector<Term> terms)
        : space_(std::move(space)), detectors_(std::move(detectors)),
          couplings_(std::move(couplings)), terms_(std::move(terms)) {}

    const SpacePtr& space() const { return space_; }
    const std::vector<Detector>& detectors() const { return detectors_; }
    const std::vector<Coupling>& couplings() const { return couplings_; }
    const std::vector<Term>& terms() const { return terms_; }

    std::size_t coupling_index(const std::string& point) const {
        for (std::size_t k = 0; k < couplings_.size(); ++k)
            if (couplings_[k].point == point) return k;
        throw ConfigError("point '" + point + "' is not coupled");
    }

  private:
    SpacePtr space_;
    std::vector<Detector> detectors_;
    std::vector<Coupling> couplings_;
    std::vector<Term> terms_;
};

// Evolves the pre-selected particle through every stage, translating pointer k
// by its shift on branches that occupy coupling k's marked point. Exact: the
// full interference bookkeeping is kept, with no expansion in epsilon.
inline JointState couple(const Circuit& circuit, const Selection& pre,
                         const std::vector<Coupling>& couplings) {
    circuit.ensure_valid();
    if (pre.kind != Selection::Kind::input_state || !pre.state)
        throw StructureError("couple: pre-selection must be an input state");
    if (!same_space(pre.state->space(), circuit.space()))
        throw StructureError("couple: input state not on the circuit's space");
    for (std::size_t i = 0; i < couplings.size(); ++i)
        for (std::size_t j = i + 1; j < couplings.size(); ++j)
            if (couplings[i].point == couplings[j].point)
                throw ConfigError("duplicate coupling at point '" + couplings[i].point + "'");

    const HilbertSpace& h = *circuit.space();
    struct PointInfo {
        std::size_t boundary;
        std::size_t path_i;
        double shift;
    };
    std::vector<PointInfo> pts;
    pts.reserve(couplings.size());
    for (const auto& c : couplings) {
        const MarkedPoint& mp = circuit.marked_point(c.point);
        pts.push_back({mp.boundary, h.path_index(mp.mode), c.config.shift()});
    }

    // Branches grouped by their pointer-centre history; each group holds a
    // dense amplitude vector the stage unitaries act on.
    std::map<std::vector<double>, std::vector<Complex>> groups;
    groups[std::vector<double>(couplings.size(), 0.0)] = pre.state->amplitudes();

    for (std::size_t b = 0; b <= circuit.stage_count(); ++b) {
        for (std::size_t k = 0; k < pts.size(); ++k) {
            if (pts[k].boundary != b || pts[k].shift == 0.0) continue;
            std::map<std::vector<double>, std::vector<Complex>> next;
            for (auto& [centers, amps] : groups) {
                std::vector<Complex> on(amps.size(), Complex{0.0, 0.0});
                bool any = false;
                for (std::size_t p = 0; p < h.pol_dim(); ++p)
                    for (std::size_t q = 0; q < h.anc_dim(); ++q) {
                        const std::size_t idx = h.index(pts[k].path_i, p, q);
                        if (amps[idx] != Complex{0.0, 0.0}) {
                            on[idx] = amps[idx];
                            amps[idx] = {0.0, 0.0};
                            any = true;
                        }
                    }
                auto add = [&next](const std::vector<double>& c, std::vector<Complex>&& v) {
                    auto it = next.find(c);
                    if (it == next.end()) {
                        next.emplace(c, std::move(v));
                    } else {
                        for (std::size_t i = 0; i < v.size(); ++i) it->second[i] += v[i];
                    }
                };
                if (any) {
                    std::vector<double> shifted = centers;
                    shifted[k] += pts[k].shift;
                    add(shifted, std::move(on));
                }
                add(centers, std::move(amps));
            }
            groups = std::move(next);
        }
        if (b < circuit.stage_count())
            for (auto& [centers, amps] : groups) circuit.apply_stage(amps, b, false);
    }

    std::vector<JointState::Term> terms;
    for (const auto& [centers, amps] : groups)
        for (std::size_t i = 0; i < amps.size(); ++i)
            if (std::abs(amps[i]) > 1e-15) terms.push_back({i, amps[i], centers});
    return JointState(circuit.space(), circuit.detectors(), couplings, std::move(terms));
}

struct PostSelected {
    PointerBundle bundle;
    double probability; // squared norm of the conditioned branch
};

// Projects the joint state onto one detector outcome (all internal factors
// pinned when present). The returned bundle is unnormalized; its squared norm
// is the outcome probability. Zero probability is a valid result, not an error.
inline PostSelected postselect(const JointState& joint, const Selection& post) {
    if (post.kind != Selection::Kind::detector_click)
        throw StructureError("postselect: selection is not a detector click");
    const HilbertSpace& h = *joint.space();
    const Detector* det = nullptr;
    for (const auto& d : joint.detectors())
        if (d.name == post.detector) det = &d;
    if (!det) throw ConfigError("unknown detector '" + post.detector + "'");

    BasisLabel l;
    l.path = det->mode;
    if (h.has_polarization()) {
        if (!post.pol)
            throw ConfigError("post-selection '" + post.detector + "' must pin the polarization");
        l.pol = post.pol;
    }
    if (h.has_ancilla()) {
        if (!post.anc)
            throw ConfigError("post-selection '" + post.detector + "' must pin the ancilla");
        l.anc = post.anc;
    }
    const std::size_t want = h.index(l);

    PointerBundle bundle;
    bundle.couplings = joint.couplings();
    for (const auto& t : joint.terms())
        if (t.label == want) bundle.terms.push_back({t.weight, t.centers});
    detail::merge_bundle_terms(bundle.terms);
    const double prob = bundle.norm_squared();
    return PostSelected{std::move(bundle), prob};
}

// All detector outcomes, internal factors enumerated in basis order.
struct Outcome {
    Selection selection;
    double probability;
};

inline std::vector<Outcome> enumerate_outcomes(const JointState& joint) {
    const HilbertSpace& h = *joint.space();
    std::vector<Outcome> out;
    for (const auto& d : joint.detectors())
        for (std::size_t p = 0; p < h.pol_dim(); ++p)
            for (std::size_t q = 0; q < h.anc_dim(); ++q) {
                Selection sel = Selection::click(
                    d.name,
                    h.has_polarization()
                        ? std::optional<Polarization>(p == 0 ? Polarization::H : Polarization::V)
                        : std::nullopt,
                    h.has_ancilla() ? std::optional<Ancilla>(q == 0 ? Ancilla::up : Ancilla::down)
                                    : std::nullopt);
                const double prob = postselect(joint, sel).probability;
                out.push_back({std::move(sel), prob});
            }
    return out;
}

// Result of projecting one pointer onto its initial wavepacket vs. the
// orthogonal complement. Probabilities are conditioned on the bundle.
struct ReadoutResult {
    double p_found;
    double p_orthogonal;
    PointerBundle found;
    PointerBundle orthogonal;
};

inline ReadoutResult readout(const PointerBundle& bundle, std::size_t k) {
    if (k >= bundle.pointer_count()) throw ConfigError("readout: pointer index out of range");
    const double total = bundle.norm_squared();
    if (total <= 0.0) throw StructureError("readout: zero-norm bundle");

    PointerBundle found;
    found.couplings = bundle.couplings;
    PointerBundle orth;
    orth.couplings = bundle.couplings;
    const double width = bundle.couplings[k].config.width;
    for (const auto& t : bundle.terms) {
        const double ov = gaussian_overlap(t.centers[k], 0.0, width);
        std::vector<double> at_zero = t.centers;
        at_zero[k] = 0.0;
        found.terms.push_back({t.weight * ov, at_zero});
        orth.terms.push_back({t.weight, t.centers});
        orth.terms.push_back({-t.weight * ov, std::move(at_zero)});
    }
    detail::merge_bundle_terms(found.terms);
    detail::merge_bundle_terms(orth.terms);
    return ReadoutResult{found.norm_squared() / total, orth.norm_squared() / total,
                         std::move(found), std::move(orth)};
}

// Post-selects on a detector outcome, then projects the pointer at `point`
// onto initial-vs-orthogonal.
inline ReadoutResult projective_readout(const JointState& joint, const Selection& post,
                                        const std::string& point) {
    const std::size_t k = joint.coupling_index(point);
    PostSelected ps = postselect(joint, post);
    if (ps.probability <= 0.0)
        throw StructureError("projective_readout: post-selection has zero probability");
    return readout(ps.bundle, k);
}

// First-order pointer shift: shift * Re(weak value).
inline double first_order_shift(const WeakValue& wv, const PointerConfig& cfg) {
    return cfg.shift() * wv.value.real();
}

struct LeakRatio {
    double exact;
    double asymptotic;
};

// Fraction of the inner interferometer's output flux that escapes through its
// dark output when one arm carries a pointer displaced by shift = eps * width,
// relative to the flux of the reference arm: exact (1 - e^{-eps^2/4}) / 2,
// asymptotically eps^2 / 8.
inline LeakRatio leak_ratio(double epsilon) {
    if (epsilon < 0.0 || !std::isfinite(epsilon))
        throw ConfigError("leak_ratio: coupling strength must be nonnegative");
    const double x = epsilon * epsilon / 4.0;
    return LeakRatio{0.5 * (1.0 - std::exp(-x)), epsilon * epsilon / 8.0};
}

// Exact conditional mean of a single pointer coupled at `point`, given the
// post-selected outcome.
inline double exact_conditional_mean(const Circuit& circuit, const Selection& pre,
                                     const Selection& post, const std::string& point,
                                     const PointerConfig& cfg) {
    JointState joint = couple(circuit, pre, {Coupling{point, cfg}});
    PostSelected ps = postselect(joint, post);
    if (ps.probability <= 0.0)
        throw ImpossiblePostSelection("impossible post-selection: " + post.describe() +
                                          " has zero probability",
                                      PureState::zero(circuit.space()),
                                      PureState::zero(circuit.space()));
    return ps.bundle.mean(0);
}

} // namespace tsvf
