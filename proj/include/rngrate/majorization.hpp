#pragma once

// Majorization order and the maximal fidelity F^M(P -> Q) over all P' with
// P majorized by P'.
//
// With P' aligned to the sorted target, the problem is
//
//     maximize  sum_i sqrt(p'_i q_i)   s.t.  S_l = sum_{i<=l} p'_i >= C_P(l).
//
// In the coordinates (W(l), C(l)) = (target cumulative, source cumulative)
// the optimal cumulative of P' is the least concave majorant of the source
// curve, so on each piece of the majorant P' is proportional to Q and the
// fidelity is sum_g sqrt(mass_P'(g) * mass_Q(g)). Both cumulatives are linear
// between merged block breakpoints, so the majorant is found by pooling
// adjacent violators over the merged segments.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rngrate/dist.hpp"

namespace rngrate {

/// True iff C_a(l) <= C_b(l) for every l, i.e. a is majorized by b. Supports
/// may differ. Checked at the merged breakpoints, where the piecewise-linear
/// cumulatives attain their extremal differences.
inline bool majorized_by(const BlockDist& a, const BlockDist& b, double tol = 1e-12) {
    std::vector<Rank> points;
    points.reserve(a.num_blocks() + b.num_blocks() + 2);
    for (std::size_t i = 1; i <= a.num_blocks(); ++i) points.push_back(a.start(i));
    for (std::size_t j = 1; j <= b.num_blocks(); ++j) points.push_back(b.start(j));
    for (Rank l : points)
        if (a.cumulative(l) > b.cumulative(l) + tol) return false;
    return true;
}

inline bool majorized_by(const FiniteDist& a, const FiniteDist& b, double tol = 1e-12) {
    return majorized_by(BlockDist::from_finite(a), BlockDist::from_finite(b), tol);
}

struct MajorSolution {
    double fidelity = 0.0;
    BlockDist optimizer;                   // the achieving P', aligned with sorted target
    std::vector<Rank> active_breakpoints;  // ranks where C_P' = C_source binds
};

namespace detail {

struct MergedSegment {
    Rank begin = 0.0L;  // rank interval [begin, end)
    Rank end = 0.0L;
    double target_log_value = 0.0;
    double dw = 0.0;  // target mass on the interval
    double dc = 0.0;  // source mass on the interval
};

struct Pool {
    double w = 0.0;
    double c = 0.0;
    std::size_t first = 0;  // segment index range [first, last]
    std::size_t last = 0;
};

/// Slope c/w of pool a is strictly greater than that of pool b.
inline bool steeper(const Pool& a, const Pool& b) { return a.c * b.w > b.c * a.w; }

inline std::vector<MergedSegment> merge_segments(const BlockDist& source, const BlockDist& target) {
    std::vector<MergedSegment> segs;
    segs.reserve(source.num_blocks() + target.num_blocks() + 1);
    const Rank end = target.support_size();
    Rank pos = 0.0L;
    std::size_t i = 0, j = 0;
    while (j < target.num_blocks() && pos < end) {
        const bool have_src = i < source.num_blocks();
        const Rank next = have_src ? std::min(source.start(i + 1), target.start(j + 1)) : target.start(j + 1);
        const Rank len = next - pos;
        if (len > 0.0L) {
            MergedSegment s;
            s.begin = pos;
            s.end = next;
            s.target_log_value = target.blocks()[j].log_value;
            s.dw = static_cast<double>(len * target.value(j));
            s.dc = have_src ? static_cast<double>(len * source.value(i)) : 0.0;
            segs.push_back(s);
        }
        pos = next;
        if (have_src && source.start(i + 1) <= pos) ++i;
        if (target.start(j + 1) <= pos) ++j;
    }
    // Source mass beyond the target support must land inside it: a
    // zero-width segment of infinite slope ending at (1, 1).
    // Summed from the tail rather than as 1 - dc_total, whose rounding noise
    // would otherwise appear as a spurious pool of size ~1e-16 under the
    // square root.
    double rest = 0.0;
    if (i < source.num_blocks()) {
        rest = static_cast<double>((source.start(i + 1) - pos) * source.value(i));
        for (std::size_t k = i + 1; k < source.num_blocks(); ++k) rest += source.blocks()[k].mass();
    }
    if (rest > 0.0) segs.push_back(MergedSegment{end, end, 0.0, 0.0, rest});
    return segs;
}

}  // namespace detail

/// Exact one-shot F^M(source -> target) with the achieving P'.
inline MajorSolution max_fidelity_major(const BlockDist& source, const BlockDist& target) {
    const auto segs = detail::merge_segments(source, target);

    std::vector<detail::Pool> pools;
    pools.reserve(segs.size());
    for (std::size_t s = 0; s < segs.size(); ++s) {
        if (segs[s].dw <= 0.0 && segs[s].dc <= 0.0) continue;
        pools.push_back(detail::Pool{segs[s].dw, segs[s].dc, s, s});
        while (pools.size() >= 2 && detail::steeper(pools.back(), pools[pools.size() - 2])) {
            detail::Pool top = pools.back();
            pools.pop_back();
            detail::Pool& below = pools.back();
            below.w += top.w;
            below.c += top.c;
            below.last = top.last;
        }
    }

    MajorSolution sol;
    double f = 0.0;
    std::vector<Block> blocks;
    for (std::size_t g = 0; g < pools.size(); ++g) {
        const auto& pool = pools[g];
        f += std::sqrt(pool.c * pool.w);
        if (pool.w <= 0.0 || pool.c <= 0.0) continue;
        const double log_ratio = std::log(pool.c / pool.w);
        for (std::size_t s = pool.first; s <= pool.last; ++s) {
            const auto& seg = segs[s];
            if (seg.dw <= 0.0) continue;
            const Rank len = seg.end - seg.begin;
            Block b;
            b.log_value = seg.target_log_value + log_ratio;
            b.log_count = static_cast<double>(std::log(len));
            if (len < 9.0e15L && len == std::floor(len)) b.count = static_cast<std::uint64_t>(len);
            blocks.push_back(b);
        }
    }
    sol.fidelity = std::min(f, 1.0);

    // Renormalize away accumulated rounding before validation.
    double log_total = -std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) log_total = detail::log_add(log_total, b.log_value + b.log_count);
    for (auto& b : blocks) b.log_value -= log_total;
    sol.optimizer = BlockDist(std::move(blocks));

    for (std::size_t g = 0; g + 1 < pools.size(); ++g) {
        const auto& a = pools[g];
        const auto& b = pools[g + 1];
        // Pools left adjacent by the sweep all differ in slope; report only
        // kinks beyond the relative activity tolerance.
        const double sa = a.c / a.w, sb = b.w > 0.0 ? b.c / b.w : std::numeric_limits<double>::infinity();
        if (std::abs(sa - sb) > 1e-10 * std::max(sa, sb)) {
            const Rank at = segs[a.last].end;
            if (at < target.support_size()) sol.active_breakpoints.push_back(at);
        }
    }
    return sol;
}

inline MajorSolution max_fidelity_major(const FiniteDist& source, const FiniteDist& target) {
    return max_fidelity_major(BlockDist::from_finite(source), BlockDist::from_finite(target));
}

/// Upper bound on the rank-aligned fidelity of `dist` against `target`
/// obtained by coarse-graining both onto the rank intervals
/// [0, cuts[0]), [cuts[0], cuts[1]), ..., [cuts.back(), inf).
inline double partition_bound(const BlockDist& dist, const BlockDist& target, std::span<const Rank> cuts) {
    if (!std::is_sorted(cuts.begin(), cuts.end())) throw InvalidInput("partition_bound: cuts must be sorted");
    double f = 0.0, prev_d = 0.0, prev_t = 0.0;
    for (Rank c : cuts) {
        const double cd = dist.cumulative(c), ct = target.cumulative(c);
        f += std::sqrt(std::max(0.0, cd - prev_d) * std::max(0.0, ct - prev_t));
        prev_d = cd;
        prev_t = ct;
    }
    f += std::sqrt(std::max(0.0, 1.0 - prev_d) * std::max(0.0, 1.0 - prev_t));
    return f;
}

}  // namespace rngrate
