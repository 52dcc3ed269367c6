#pragma once

#include <optional>
#include <string>
#include <utility>

#include "tsvf/circuit.hpp"
#include "tsvf/projector.hpp"

namespace tsvf {

// Relative overlap below which a post-selection is treated as impossible
// (exact dark port) rather than merely small.
inline constexpr double kImpossibleOverlapTol = 1e-10;

// Raised when the post-selected state is orthogonal to the forward state;
// carries both states so callers can inspect the degenerate pair.
class ImpossiblePostSelection : public std::runtime_error {
  public:
    ImpossiblePostSelection(std::string what, PureState forward, PureState backward)
        : std::runtime_error(std::move(what)), forward_(std::move(forward)),
          backward_(std::move(backward)) {}

    const PureState& forward() const { return forward_; }
    const PureState& backward() const { return backward_; }

  private:
    PureState forward_;
    PureState backward_;
};

// The pair of states describing the system at one slice boundary: the forward
// state evolved from the pre-selection and the backward state evolved from the
// post-selection.
struct TwoStateVector {
    PureState forward;
    PureState backward;
    std::size_t boundary;
    Complex overlap; // inner_product(backward, forward), cached

    TwoStateVector(PureState fwd, PureState bwd, std::size_t bdy)
        : forward(std::move(fwd)), backward(std::move(bwd)), boundary(bdy),
          overlap(inner_product(backward, forward)) {}
};

struct WeakValue {
    Complex value;
    std::string operator_id;
};

namespace detail {

inline void check_overlap(const Complex& ov, const PureState& fwd, const PureState& bwd,
                          const std::string& context) {
    if (std::abs(ov) < kImpossibleOverlapTol * fwd.norm() * bwd.norm())
        throw ImpossiblePostSelection("impossible post-selection: " + context, fwd, bwd);
}

} // namespace detail

// Builds the two-state vector at a named marked point of the circuit.
inline TwoStateVector two_state_at(const Circuit& circuit, const Selection& pre,
                                   const Selection& post, const std::string& point) {
    if (pre.kind != Selection::Kind::input_state || !pre.state)
        throw StructureError("two_state_at: pre-selection must be an input state");
    if (post.kind != Selection::Kind::detector_click)
        throw StructureError("two_state_at: post-selection must be a detector click");
    const MarkedPoint& pt = circuit.marked_point(point);
    PureState fwd = circuit.forward_propagate(*pre.state, pt.boundary);
    PureState bwd = circuit.backward_propagate(post, pt.boundary);
    Complex ov = inner_product(bwd, fwd);
    detail::check_overlap(ov, fwd, bwd, post.describe() + " never clicks for this input");
    return TwoStateVector(std::move(fwd), std::move(bwd), pt.boundary);
}

// O_w = <backward|O|forward> / <backward|forward>.
inline WeakValue weak_value(const TwoStateVector& tsv, const LocalProjector& op,
                            std::string operator_id = {}) {
    detail::check_overlap(tsv.overlap, tsv.forward, tsv.backward, "zero overlap two-state vector");
    Complex num = inner_product(tsv.backward, op.apply(tsv.forward));
    if (operator_id.empty()) {
        operator_id = "P[";
        bool first = true;
        for (const auto& p : op.paths()) {
            if (!first) operator_id += ',';
            operator_id += p;
            first = false;
        }
        operator_id += ']';
    }
    return WeakValue{num / tsv.overlap, std::move(operator_id)};
}

enum class Factor { particle, polarization, ancilla };

// Outcome of a subsystem reduction: either the reduced two-state vector or a
// reason the composite pair does not reduce.
struct ReductionOutcome {
    std::optional<TwoStateVector> tsv;
    std::string reason;

    bool reducible() const { return tsv.has_value(); }
};

namespace detail {

// Splits index i of the full space into (kept factor index, other index).
struct FactorSplit {
    std::size_t kept_dim;
    std::size_t rest_dim;
    // kept-major flattening of (kept, rest)
    std::vector<std::size_t> kept_of;
    std::vector<std::size_t> rest_of;
};

inline FactorSplit split_space(const HilbertSpace& h, Factor keep) {
    FactorSplit fs;
    const std::size_t n = h.dim();
    fs.kept_of.resize(n);
    fs.rest_of.resize(n);
    const std::size_t npath = h.paths().size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t path_i = i / h.internal_dim();
        const std::size_t rest = i % h.internal_dim();
        const std::size_t pol_i = rest / h.anc_dim();
        const std::size_t anc_i = rest % h.anc_dim();
        switch (keep) {
            case Factor::particle:
                fs.kept_of[i] = path_i;
                fs.rest_of[i] = pol_i * h.anc_dim() + anc_i;
                break;
            case Factor::polarization:
                fs.kept_of[i] = pol_i;
                fs.rest_of[i] = path_i * h.anc_dim() + anc_i;
                break;
            case Factor::ancilla:
                fs.kept_of[i] = anc_i;
                fs.rest_of[i] = path_i * h.pol_dim() + pol_i;
                break;
        }
    }
    switch (keep) {
        case Factor::particle:
            fs.kept_dim = npath;
            fs.rest_dim = h.internal_dim();
            break;
        case Factor::polarization:
            fs.kept_dim = h.pol_dim();
            fs.rest_dim = npath * h.anc_dim();
            break;
        case Factor::ancilla:
            fs.kept_dim = h.anc_dim();
            fs.rest_dim = npath * h.pol_dim();
            break;
    }
    return fs;
}

// Rank-1 factorization of M (kept x rest): M[i][j] = kept[i] * rest[j].
// Returns false when any 2x2 minor exceeds the tolerance.
inline bool rank_one_factor(const std::vector<std::vector<Complex>>& M, std::vector<Complex>& kept,
                            std::vector<Complex>& rest, double tol) {
    const std::size_t nk = M.size();
    const std::size_t nr = M.empty() ? 0 : M[0].size();
    std::size_t i0 = 0, j0 = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < nk; ++i)
        for (std::size_t j = 0; j < nr; ++j)
            if (std::abs(M[i][j]) > best) {
                best = std::abs(M[i][j]);
                i0 = i;
                j0 = j;
            }
    if (best <= tol) return false; // zero matrix has no meaningful factors
    for (std::size_t i = 0; i < nk; ++i)
        for (std::size_t j = 0; j < nr; ++j) {
            const Complex minor = M[i][j] * M[i0][j0] - M[i][j0] * M[i0][j];
            if (std::abs(minor) > tol * best * best) return false;
        }
    kept.assign(nk, Complex{0, 0});
    rest.assign(nr, Complex{0, 0});
    for (std::size_t i = 0; i < nk; ++i) kept[i] = M[i][j0];
    for (std::size_t j = 0; j < nr; ++j) rest[j] = M[i0][j] / M[i0][j0];
    return true;
}

} // namespace detail

// Reduces a composite two-state vector to the kept factor. Requires the
// backward state to factorize across (kept x rest); the effective forward
// state is the forward state contracted with the backward state's rest
// factor, which stays pure even when the forward state is entangled.
inline ReductionOutcome reduce_subsystem(const TwoStateVector& tsv, Factor keep) {
    const HilbertSpace& h = *tsv.forward.space();
    if (keep == Factor::polarization && !h.has_polarization())
        throw StructureError("reduce_subsystem: space has no polarization factor");
    if (keep == Factor::ancilla && !h.has_ancilla())
        throw StructureError("reduce_subsystem: space has no ancilla factor");
    if (keep == Factor::particle && !h.has_polarization() && !h.has_ancilla())
        return ReductionOutcome{tsv, ""}; // nothing to strip

    const auto fs = detail::split_space(h, keep);
    std::vector<std::vector<Complex>> B(fs.kept_dim, std::vector<Complex>(fs.rest_dim, Complex{0, 0}));
    std::vector<std::vector<Complex>> F(fs.kept_dim, std::vector<Complex>(fs.rest_dim, Complex{0, 0}));
    for (std::size_t i = 0; i < h.dim(); ++i) {
        B[fs.kept_of[i]][fs.rest_of[i]] = tsv.backward.amplitude(i);
        F[fs.kept_of[i]][fs.rest_of[i]] = tsv.forward.amplitude(i);
    }

    std::vector<Complex> bwd_kept, bwd_rest;
    if (!detail::rank_one_factor(B, bwd_kept, bwd_rest, 1e-12))
        return ReductionOutcome{std::nullopt,
                                "backward state does not factorize across the kept factor"};

    // Effective forward amplitudes: <rest_factor| contracted into the forward state.
    std::vector<Complex> fwd_kept(fs.kept_dim, Complex{0, 0});
    for (std::size_t i = 0; i < fs.kept_dim; ++i)
        for (std::size_t j = 0; j < fs.rest_dim; ++j)
            fwd_kept[i] += std::conj(bwd_rest[j]) * F[i][j];

    SpacePtr reduced_space;
    switch (keep) {
        case Factor::particle:
            reduced_space = HilbertSpace::make(h.paths(), false, false);
            break;
        case Factor::polarization:
            reduced_space = HilbertSpace::make({"unit"}, true, false);
            break;
        case Factor::ancilla:
            reduced_space = HilbertSpace::make({"unit"}, false, true);
            break;
    }
    PureState fwd(reduced_space, std::move(fwd_kept));
    PureState bwd(reduced_space, std::move(bwd_kept));
    if (fwd.norm() <= kImpossibleOverlapTol)
        return ReductionOutcome{std::nullopt,
                                "effective forward state vanishes for this post-selection"};
    return ReductionOutcome{TwoStateVector(fwd.normalize(), bwd.normalize(), tsv.boundary), ""};
}

} // namespace tsvf
