#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "tsvf/hilbert.hpp"

namespace tsvf {

using Complex = std::complex<double>;

inline constexpr double kAnalyticTol = 1e-12;

// A pure state: dense complex amplitudes over a HilbertSpace's basis.
// Values are immutable once built; all operations return new states.
class PureState {
  public:
    PureState(SpacePtr space, std::vector<Complex> amplitudes)
        : space_(std::move(space)), amps_(std::move(amplitudes)) {
        if (!space_) throw StructureError("PureState: null space");
        if (amps_.size() != space_->dim())
            throw StructureError("PureState: amplitude count does not match space dimension");
        normalized_ = std::abs(norm() - 1.0) <= kAnalyticTol;
    }

    static PureState zero(SpacePtr space) {
        std::vector<Complex> a(space->dim(), Complex{0.0, 0.0});
        return PureState(std::move(space), std::move(a));
    }

    static PureState basis(SpacePtr space, const BasisLabel& label) {
        std::vector<Complex> a(space->dim(), Complex{0.0, 0.0});
        a[space->index(label)] = 1.0;
        return PureState(std::move(space), std::move(a));
    }

    static PureState from_amplitudes(SpacePtr space, const std::map<std::string, Complex>& by_label) {
        std::vector<Complex> a(space->dim(), Complex{0.0, 0.0});
        for (const auto& [text, amp] : by_label) a[space->index(parse_label(text))] = amp;
        return PureState(std::move(space), std::move(a));
    }

    const SpacePtr& space() const { return space_; }
    const std::vector<Complex>& amplitudes() const { return amps_; }
    Complex amplitude(const BasisLabel& label) const { return amps_[space_->index(label)]; }
    Complex amplitude(std::size_t index) const { return amps_[index]; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return s;
    }
    double norm() const { return std::sqrt(norm_squared()); }
    bool normalized() const { return normalized_; }

    PureState normalize() const {
        double n = norm();
        if (n <= 0.0) throw StructureError("cannot normalize the zero state");
        return scaled(1.0 / n);
    }

    PureState scaled(Complex factor) const {
        std::vector<Complex> a = amps_;
        for (auto& x : a) x *= factor;
        return PureState(space_, std::move(a));
    }

    PureState plus(const PureState& other) const {
        if (!same_space(space_, other.space_)) throw StructureError("plus: states on different spaces");
        std::vector<Complex> a = amps_;
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += other.amps_[i];
        return PureState(space_, std::move(a));
    }

  private:
    SpacePtr space_;
    std::vector<Complex> amps_;
    bool normalized_ = false;
};

// <bra|ket>, conjugate-linear in the first argument.
inline Complex inner_product(const PureState& bra, const PureState& ket) {
    if (!same_space(bra.space(), ket.space()))
        throw StructureError("inner_product: states on different spaces");
    Complex s{0.0, 0.0};
    const auto& a = bra.amplitudes();
    const auto& b = ket.amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

// Product state over disjoint factor structures. The spatial factor may come
// from either operand but not both; likewise polarization and ancilla. A pure
// internal state (no spatial factor) is expressed on a one-mode space.
inline PureState tensor(const PureState& s1, const PureState& s2) {
    const HilbertSpace& h1 = *s1.space();
    const HilbertSpace& h2 = *s2.space();
    if (h1.has_polarization() && h2.has_polarization())
        throw StructureError("tensor: both operands carry a polarization factor");
    if (h1.has_ancilla() && h2.has_ancilla())
        throw StructureError("tensor: both operands carry an ancilla factor");

    // Exactly one operand may contribute spatial modes beyond a trivial
    // single-mode carrier; two genuine spatial factors would need a composite
    // path label, which no circuit here uses.
    const bool h2_internal_only = h2.paths().size() == 1 && (h2.has_polarization() || h2.has_ancilla());
    if (!h2_internal_only)
        throw StructureError("tensor: second operand must be a single-mode internal-factor state");

    auto space = HilbertSpace::make(h1.paths(), h1.has_polarization() || h2.has_polarization(),
                                    h1.has_ancilla() || h2.has_ancilla());
    std::vector<Complex> a(space->dim(), Complex{0.0, 0.0});
    for (std::size_t i = 0; i < h1.dim(); ++i) {
        if (s1.amplitude(i) == Complex{0.0, 0.0}) continue;
        BasisLabel l1 = h1.label(i);
        for (std::size_t j = 0; j < h2.dim(); ++j) {
            if (s2.amplitude(j) == Complex{0.0, 0.0}) continue;
            BasisLabel l2 = h2.label(j);
            BasisLabel out = l1;
            if (l2.pol) out.pol = l2.pol;
            if (l2.anc) out.anc = l2.anc;
            a[space->index(out)] += s1.amplitude(i) * s2.amplitude(j);
        }
    }
    return PureState(space, std::move(a));
}

} // namespace tsvf
