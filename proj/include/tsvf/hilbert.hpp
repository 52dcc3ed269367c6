#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsvf/errors.hpp"

namespace tsvf {

enum class Polarization { H, V };
enum class Ancilla { up, down };

inline const char* to_string(Polarization p) { return p == Polarization::H ? "H" : "V"; }
inline const char* to_string(Ancilla a) { return a == Ancilla::up ? "up" : "down"; }

// One basis element of a composite space: a spatial mode, optionally a
// polarization component, optionally an ancilla component. A label is valid
// only relative to a HilbertSpace with the same factor structure.
struct BasisLabel {
    std::string path;
    std::optional<Polarization> pol;
    std::optional<Ancilla> anc;

    bool operator==(const BasisLabel&) const = default;

    // "A", "A|H", "A|H|up"
    std::string str() const {
        std::string s = path;
        if (pol) { s += '|'; s += to_string(*pol); }
        if (anc) { s += '|'; s += to_string(*anc); }
        return s;
    }
};

// Finite composite Hilbert space: spatial modes x optional polarization qubit
// x optional ancilla qubit. Immutable; states hold a shared pointer to it and
// store amplitudes densely in the index order defined here.
class HilbertSpace {
  public:
    HilbertSpace(std::vector<std::string> paths, bool has_polarization, bool has_ancilla)
        : paths_(std::move(paths)), has_pol_(has_polarization), has_anc_(has_ancilla) {
        if (paths_.empty()) throw StructureError("HilbertSpace: no spatial modes");
        for (std::size_t i = 0; i < paths_.size(); ++i)
            for (std::size_t j = i + 1; j < paths_.size(); ++j)
                if (paths_[i] == paths_[j])
                    throw StructureError("HilbertSpace: duplicate mode '" + paths_[i] + "'");
    }

    static std::shared_ptr<const HilbertSpace> make(std::vector<std::string> paths,
                                                    bool has_polarization = false,
                                                    bool has_ancilla = false) {
        return std::make_shared<const HilbertSpace>(std::move(paths), has_polarization, has_ancilla);
    }

    const std::vector<std::string>& paths() const { return paths_; }
    bool has_polarization() const { return has_pol_; }
    bool has_ancilla() const { return has_anc_; }

    std::size_t pol_dim() const { return has_pol_ ? 2 : 1; }
    std::size_t anc_dim() const { return has_anc_ ? 2 : 1; }
    std::size_t internal_dim() const { return pol_dim() * anc_dim(); }
    std::size_t dim() const { return paths_.size() * internal_dim(); }

    bool has_path(const std::string& name) const {
        for (const auto& p : paths_)
            if (p == name) return true;
        return false;
    }

    std::size_t path_index(const std::string& name) const {
        for (std::size_t i = 0; i < paths_.size(); ++i)
            if (paths_[i] == name) return i;
        throw StructureError("unknown mode '" + name + "'");
    }

    // Dense index: path-major, then polarization, then ancilla.
    std::size_t index(const BasisLabel& label) const {
        if (label.pol.has_value() != has_pol_)
            throw StructureError("label '" + label.str() + "' does not match polarization factor");
        if (label.anc.has_value() != has_anc_)
            throw StructureError("label '" + label.str() + "' does not match ancilla factor");
        std::size_t i = path_index(label.path) * internal_dim();
        if (has_pol_) i += (label.pol == Polarization::V ? 1 : 0) * anc_dim();
        if (has_anc_) i += (label.anc == Ancilla::down ? 1 : 0);
        return i;
    }

    std::size_t index(std::size_t path_i, std::size_t pol_i, std::size_t anc_i) const {
        return (path_i * pol_dim() + pol_i) * anc_dim() + anc_i;
    }

    BasisLabel label(std::size_t index) const {
        BasisLabel l;
        l.path = paths_[index / internal_dim()];
        std::size_t rest = index % internal_dim();
        if (has_pol_) l.pol = (rest / anc_dim() == 1) ? Polarization::V : Polarization::H;
        if (has_anc_) l.anc = (rest % anc_dim() == 1) ? Ancilla::down : Ancilla::up;
        return l;
    }

    bool operator==(const HilbertSpace& other) const {
        return paths_ == other.paths_ && has_pol_ == other.has_pol_ && has_anc_ == other.has_anc_;
    }

  private:
    std::vector<std::string> paths_;
    bool has_pol_;
    bool has_anc_;
};

using SpacePtr = std::shared_ptr<const HilbertSpace>;

inline bool same_space(const SpacePtr& a, const SpacePtr& b) {
    return a == b || (a && b && *a == *b);
}

// Parses "A", "A|H", "A|up", "A|H|down".
inline BasisLabel parse_label(const std::string& text) {
    BasisLabel l;
    std::size_t start = 0;
    std::vector<std::string> parts;
    while (true) {
        std::size_t bar = text.find('|', start);
        parts.push_back(text.substr(start, bar == std::string::npos ? bar : bar - start));
        if (bar == std::string::npos) break;
        start = bar + 1;
    }
    if (parts.empty() || parts[0].empty()) throw ConfigError("empty basis label '" + text + "'");
    l.path = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const std::string& p = parts[i];
        if (p == "H") l.pol = Polarization::H;
        else if (p == "V") l.pol = Polarization::V;
        else if (p == "up") l.anc = Ancilla::up;
        else if (p == "down") l.anc = Ancilla::down;
        else throw ConfigError("unknown label component '" + p + "' in '" + text + "'");
    }
    return l;
}

} // namespace tsvf
