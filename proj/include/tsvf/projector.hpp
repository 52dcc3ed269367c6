#pragma once

#include <array>
#include <complex>
#include <set>
#include <string>

#include "tsvf/state.hpp"

namespace tsvf {

// 2x2 complex matrix acting on an internal two-level factor.
struct Mat2 {
    // Row-major: m[0]=00, m[1]=01, m[2]=10, m[3]=11.
    std::array<Complex, 4> m{Complex{0, 0}, Complex{0, 0}, Complex{0, 0}, Complex{0, 0}};

    static Mat2 identity() { return Mat2{{Complex{1, 0}, {0, 0}, {0, 0}, {1, 0}}}; }

    // Rank-1 projector |v><v| for v = (v0, v1), assumed normalized.
    static Mat2 outer(Complex v0, Complex v1) {
        return Mat2{{v0 * std::conj(v0), v0 * std::conj(v1), v1 * std::conj(v0), v1 * std::conj(v1)}};
    }

    Complex at(std::size_t row, std::size_t col) const { return m[2 * row + col]; }
};

// Projector onto right-circular polarization, (|H> + i|V>)/sqrt2.
inline Mat2 circular_right() {
    const double r = 1.0 / std::sqrt(2.0);
    return Mat2::outer(Complex{r, 0.0}, Complex{0.0, r});
}

// Projector onto |H><H| or |V><V|.
inline Mat2 polarization_projector(Polarization p) {
    return p == Polarization::H ? Mat2::outer({1, 0}, {0, 0}) : Mat2::outer({0, 0}, {1, 0});
}

inline Mat2 ancilla_projector(Ancilla a) {
    return a == Ancilla::up ? Mat2::outer({1, 0}, {0, 0}) : Mat2::outer({0, 0}, {1, 0});
}

// A local observable: projection onto a set of spatial modes, optionally
// composed with 2x2 operators on the internal factors. With no internal
// factor set, the operator acts as identity there.
class LocalProjector {
  public:
    explicit LocalProjector(std::set<std::string> paths) : paths_(std::move(paths)) {
        if (paths_.empty()) throw StructureError("LocalProjector: empty path set");
    }

    static LocalProjector on_path(const std::string& path) {
        return LocalProjector(std::set<std::string>{path});
    }

    LocalProjector with_polarization(Mat2 op) const {
        LocalProjector p = *this;
        p.pol_op_ = op;
        p.has_pol_op_ = true;
        return p;
    }

    LocalProjector with_ancilla(Mat2 op) const {
        LocalProjector p = *this;
        p.anc_op_ = op;
        p.has_anc_op_ = true;
        return p;
    }

    const std::set<std::string>& paths() const { return paths_; }
    bool has_polarization_op() const { return has_pol_op_; }
    bool has_ancilla_op() const { return has_anc_op_; }
    const Mat2& polarization_op() const { return pol_op_; }
    const Mat2& ancilla_op() const { return anc_op_; }

    PureState apply(const PureState& state) const {
        const HilbertSpace& h = *state.space();
        for (const auto& p : paths_)
            if (!h.has_path(p)) throw StructureError("LocalProjector: path '" + p + "' not in space");
        if (has_pol_op_ && !h.has_polarization())
            throw StructureError("LocalProjector: polarization operator on a space without polarization");
        if (has_anc_op_ && !h.has_ancilla())
            throw StructureError("LocalProjector: ancilla operator on a space without ancilla");

        std::vector<Complex> out(h.dim(), Complex{0.0, 0.0});
        for (std::size_t i = 0; i < h.dim(); ++i) {
            Complex amp = state.amplitude(i);
            if (amp == Complex{0.0, 0.0}) continue;
            BasisLabel in = h.label(i);
            if (paths_.count(in.path) == 0) continue;

            // Expand through each internal 2x2 factor that has an operator.
            struct Piece {
                BasisLabel label;
                Complex weight;
            };
            std::vector<Piece> pieces{{in, amp}};
            if (has_pol_op_) {
                std::vector<Piece> next;
                for (const auto& pc : pieces) {
                    const std::size_t col = pc.label.pol == Polarization::H ? 0 : 1;
                    for (std::size_t row = 0; row < 2; ++row) {
                        Complex w = pol_op_.at(row, col) * pc.weight;
                        if (w == Complex{0.0, 0.0}) continue;
                        Piece np = pc;
                        np.label.pol = row == 0 ? Polarization::H : Polarization::V;
                        np.weight = w;
                        next.push_back(np);
                    }
                }
                pieces = std::move(next);
            }
            if (has_anc_op_) {
                std::vector<Piece> next;
                for (const auto& pc : pieces) {
                    const std::size_t col = pc.label.anc == Ancilla::up ? 0 : 1;
                    for (std::size_t row = 0; row < 2; ++row) {
                        Complex w = anc_op_.at(row, col) * pc.weight;
                        if (w == Complex{0.0, 0.0}) continue;
                        Piece np = pc;
                        np.label.anc = row == 0 ? Ancilla::up : Ancilla::down;
                        np.weight = w;
                        next.push_back(np);
                    }
                }
                pieces = std::move(next);
            }
            for (const auto& pc : pieces) out[h.index(pc.label)] += pc.weight;
        }
        return PureState(state.space(), std::move(out));
    }

  private:
    std::set<std::string> paths_;
    Mat2 pol_op_ = Mat2::identity();
    Mat2 anc_op_ = Mat2::identity();
    bool has_pol_op_ = false;
    bool has_anc_op_ = false;
};

} // namespace tsvf
