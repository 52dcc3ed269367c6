#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <thread>

#include "tsvf/pointer_lab.hpp"

namespace tsvf {

// Counter-friendly 64-bit generator (SplitMix64, Steele/Lea/Flood finalizer).
// Pinned by name in run records so results are reproducible across versions.
inline constexpr const char* kRngName = "splitmix64";

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        return mix64(state);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Stateless per-trial seed: trials are independent streams, so any subset of
// trials can run on any thread with identical results.
inline std::uint64_t sub_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
    return mix64(master_seed + 0x9e3779b97f4a7c15ULL * (trial_index + 1));
}

// Inverse-CDF sampler for a smooth 1-d density tabulated on a uniform grid.
class GridSampler {
  public:
    static constexpr std::size_t kGridPoints = 4096;
    static constexpr double kPadWidths = 6.0;

    GridSampler(const PointerBundle& bundle, std::size_t k) {
        const double width = bundle.couplings[k].config.width;
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (const auto& t : bundle.terms) {
            lo = first ? t.centers[k] : std::min(lo, t.centers[k]);
            hi = first ? t.centers[k] : std::max(hi, t.centers[k]);
            first = false;
        }
        if (first) throw StructureError("GridSampler: empty bundle");
        x0_ = lo - kPadWidths * width;
        dx_ = (hi + kPadWidths * width - x0_) / static_cast<double>(kGridPoints - 1);
        std::vector<double> density(kGridPoints);
        for (std::size_t i = 0; i < kGridPoints; ++i)
            density[i] = std::max(0.0, bundle.marginal_density(k, x0_ + dx_ * static_cast<double>(i)));
        cdf_.resize(kGridPoints);
        cdf_[0] = 0.0;
        for (std::size_t i = 1; i < kGridPoints; ++i)
            cdf_[i] = cdf_[i - 1] + 0.5 * (density[i - 1] + density[i]) * dx_;
        if (cdf_.back() <= 0.0) throw StructureError("GridSampler: zero-mass density");
    }

    double sample(double u) const {
        const double target = u * cdf_.back();
        std::size_t lo = 0, hi = cdf_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (cdf_[mid] <= target ? lo : hi) = mid;
        }
        const double seg = cdf_[hi] - cdf_[lo];
        const double frac = seg > 0.0 ? (target - cdf_[lo]) / seg : 0.5;
        return x0_ + dx_ * (static_cast<double>(lo) + frac);
    }

  private:
    double x0_ = 0.0;
    double dx_ = 0.0;
    std::vector<double> cdf_;
};

struct EnsembleConfig {
    std::vector<Coupling> couplings;
    Selection post;
    std::uint64_t trials = 0;
    std::uint64_t master_seed = 0;
    unsigned threads = 0; // 0: TSVF_LAB_THREADS env var, else hardware count
};

struct PointEstimate {
    std::string point;
    Complex weak_value{0.0, 0.0};      // NaN when the ideal post-selection is impossible
    double predicted_shift = 0.0;      // first-order shift * Re(weak value)
    double exact_mean = 0.0;           // exact conditional mean of the sampled density
    double estimated_shift = 0.0;
    std::optional<double> stderr_;     // absent when fewer than 2 samples
    std::uint64_t n_postselected = 0;
    std::optional<double> z;           // |estimated| / stderr
    double predicted_z = 0.0;          // |eps * Re(wv)| * sqrt(trials * rate)
};

struct EnsembleResult {
    std::vector<PointEstimate> points;
    std::vector<std::pair<std::string, std::uint64_t>> outcome_counts; // outcome -> trials
    std::uint64_t trials = 0;
    std::uint64_t n_postselected = 0;
    double postselection_rate = 0.0;   // exact probability of the conditioned outcome
    std::uint64_t master_seed = 0;
    std::string rng = kRngName;
};

inline unsigned resolve_thread_cap(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("TSVF_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
        throw ConfigError("TSVF_LAB_THREADS must be a positive integer");
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

namespace detail {

// Chunk-local running statistics (Welford), merged across chunks in fixed
// order (Chan's parallel update) so results do not depend on thread count.
struct RunningStat {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const RunningStat& other) {
        if (other.n == 0) return;
        if (n == 0) {
            *this = other;
            return;
        }
        const double d = other.mean - mean;
        const std::uint64_t total = n + other.n;
        mean += d * static_cast<double>(other.n) / static_cast<double>(total);
        m2 += other.m2 + d * d * static_cast<double>(n) * static_cast<double>(other.n) /
                             static_cast<double>(total);
        n = total;
    }

    std::optional<double> stderr_of_mean() const {
        if (n < 2) return std::nullopt;
        const double var = m2 / static_cast<double>(n - 1);
        return std::sqrt(var / static_cast<double>(n));
    }
};

struct ChunkAccumulator {
    std::vector<std::uint64_t> outcome_counts;
    std::vector<RunningStat> point_stats;
};

} // namespace detail

// Runs the seeded ensemble: every trial samples a detector outcome from the
// exact outcome probabilities, and post-selected trials additionally sample
// each pointer from its exact conditional density. Fixed chunk boundaries and
// an ordered merge make the result identical for any thread count.
inline EnsembleResult run_ensemble(const Circuit& circuit, const Selection& pre,
                                   const EnsembleConfig& cfg) {
    if (cfg.trials < 1) throw ConfigError("ensemble needs at least one trial");
    if (cfg.couplings.empty()) throw ConfigError("ensemble needs at least one coupling");

    JointState joint = couple(circuit, pre, cfg.couplings);
    std::vector<Outcome> outcomes = enumerate_outcomes(joint);
    if (outcomes.empty()) throw ConfigError("circuit has no detectors");

    const std::string want = cfg.post.describe();
    std::size_t post_idx = outcomes.size();
    for (std::size_t i = 0; i < outcomes.size(); ++i)
        if (outcomes[i].selection.describe() == want) post_idx = i;
    if (post_idx == outcomes.size())
        throw ConfigError("post-selection '" + want + "' does not name a detector outcome");

    std::vector<double> cumulative(outcomes.size());
    double total = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        total += outcomes[i].probability;
        cumulative[i] = total;
    }

    PostSelected ps = postselect(joint, cfg.post);
    const double rate = ps.probability;
    const std::size_t n_pointers = cfg.couplings.size();
    std::vector<GridSampler> samplers;
    if (rate > 0.0) {
        samplers.reserve(n_pointers);
        for (std::size_t k = 0; k < n_pointers; ++k) samplers.emplace_back(ps.bundle, k);
    }

    constexpr std::uint64_t kChunk = 8192;
    const std::uint64_t n_chunks = (cfg.trials + kChunk - 1) / kChunk;
    std::vector<detail::ChunkAccumulator> chunks(n_chunks);

    auto run_chunk = [&](std::uint64_t c) {
        detail::ChunkAccumulator acc;
        acc.outcome_counts.assign(outcomes.size(), 0);
        acc.point_stats.assign(n_pointers, {});
        const std::uint64_t begin = c * kChunk;
        const std::uint64_t end = std::min(cfg.trials, begin + kChunk);
        for (std::uint64_t i = begin; i < end; ++i) {
            SplitMix64 rng{sub_seed(cfg.master_seed, i)};
            const double u = rng.uniform01() * total;
            std::size_t pick = outcomes.size() - 1;
            for (std::size_t o = 0; o < outcomes.size(); ++o)
                if (u < cumulative[o]) {
                    pick = o;
                    break;
                }
            ++acc.outcome_counts[pick];
            if (pick == post_idx && rate > 0.0)
                for (std::size_t k = 0; k < n_pointers; ++k)
                    acc.point_stats[k].add(samplers[k].sample(rng.uniform01()));
        }
        chunks[c] = std::move(acc);
    };

    const unsigned n_threads =
        std::min<std::uint64_t>(resolve_thread_cap(cfg.threads), n_chunks);
    if (n_threads <= 1) {
        for (std::uint64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t)
            pool.emplace_back([&] {
                while (true) {
                    const std::uint64_t c = next.fetch_add(1);
                    if (c >= n_chunks) return;
                    run_chunk(c);
                }
            });
        for (auto& th : pool) th.join();
    }

    std::vector<std::uint64_t> counts(outcomes.size(), 0);
    std::vector<detail::RunningStat> stats(n_pointers);
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
        for (std::size_t o = 0; o < outcomes.size(); ++o)
            counts[o] += chunks[c].outcome_counts[o];
        for (std::size_t k = 0; k < n_pointers; ++k)
            stats[k].merge(chunks[c].point_stats[k]);
    }

    EnsembleResult result;
    result.trials = cfg.trials;
    result.master_seed = cfg.master_seed;
    result.postselection_rate = rate;
    result.n_postselected = counts[post_idx];
    for (std::size_t o = 0; o < outcomes.size(); ++o)
        result.outcome_counts.emplace_back(outcomes[o].selection.describe(), counts[o]);

    for (std::size_t k = 0; k < n_pointers; ++k) {
        PointEstimate pe;
        pe.point = cfg.couplings[k].point;
        const double shift = cfg.couplings[k].config.shift();
        try {
            TwoStateVector tsv = two_state_at(circuit, pre, cfg.post, pe.point);
            const MarkedPoint& mp = circuit.marked_point(pe.point);
            WeakValue wv = weak_value(tsv, LocalProjector::on_path(mp.mode), "P[" + pe.point + "]");
            pe.weak_value = wv.value;
            pe.predicted_shift = shift * wv.value.real();
            pe.predicted_z = std::abs(cfg.couplings[k].config.epsilon * wv.value.real()) *
                             std::sqrt(static_cast<double>(cfg.trials) * rate);
        } catch (const ImpossiblePostSelection&) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            pe.weak_value = Complex{nan, nan};
            pe.predicted_shift = nan;
            pe.predicted_z = nan;
        }
        pe.exact_mean = rate > 0.0 ? ps.bundle.mean(k) : 0.0;
        pe.n_postselected = stats[k].n;
        pe.estimated_shift = stats[k].n > 0 ? stats[k].mean : 0.0;
        pe.stderr_ = stats[k].stderr_of_mean();
        if (pe.stderr_ && *pe.stderr_ > 0.0) pe.z = std::abs(pe.estimated_shift) / *pe.stderr_;
        result.points.push_back(std::move(pe));
    }
    return result;
}

struct Detectability {
    std::string point;
    std::optional<double> z;
    double predicted_z;
};

// |estimated shift| / stderr per point, with the analytic prediction.
inline std::vector<Detectability> detectability(const EnsembleResult& result) {
    std::vector<Detectability> out;
    out.reserve(result.points.size());
    for (const auto& p : result.points) out.push_back({p.point, p.z, p.predicted_z});
    return out;
}

} // namespace tsvf
