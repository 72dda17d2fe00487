#pragma once

// Finite distributions, block-compressed product distributions and the scalar
// functionals (entropy, varentropy, fidelity) used throughout the library.
// All logarithms are natural.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rngrate/error.hpp"

namespace rngrate {

/// Probability vector on a small finite set. Entries are nonnegative and sum
/// to one within 1e-12.
class FiniteDist {
public:
    static constexpr double kMassTolerance = 1e-12;

    FiniteDist() : probs_{1.0} {}

    explicit FiniteDist(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) throw InvalidInput("distribution must have support size >= 1");
        double total = 0.0;
        for (double p : probs_) {
            if (!std::isfinite(p) || p < 0.0)
                throw InvalidInput("distribution entries must be finite and nonnegative");
            total += p;
        }
        if (std::abs(total - 1.0) > kMassTolerance)
            throw InvalidInput("distribution does not sum to 1 (sum = " + std::to_string(total) + ")");
    }

    static FiniteDist uniform(std::size_t k) {
        if (k == 0) throw InvalidInput("uniform distribution needs k >= 1");
        return FiniteDist(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    }

    std::span<const double> probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }

    std::vector<double> sorted_desc() const {
        std::vector<double> v = probs_;
        std::stable_sort(v.begin(), v.end(), std::greater<>());
        return v;
    }

    std::size_t positive_support() const {
        return static_cast<std::size_t>(
            std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }));
    }

private:
    std::vector<double> probs_;
};

/// Bundled entropy (nats), varentropy (nats^2) and uniformity flag.
struct SourceStats {
    double h = 0.0;
    double v = 0.0;
    bool is_uniform = true;
};

inline double entropy(const FiniteDist& p) {
    double h = 0.0;
    for (double x : p.probs())
        if (x > 0.0) h -= x * std::log(x);
    return std::max(h, 0.0);
}

inline double varentropy(const FiniteDist& p) {
    const double h = entropy(p);
    double v = 0.0;
    for (double x : p.probs()) {
        if (x <= 0.0) continue;
        const double d = -std::log(x) - h;
        v += x * d * d;
    }
    return v;
}

/// Uniform on its (positive) support.
inline bool is_uniform(const FiniteDist& p) {
    double ref = -1.0;
    for (double x : p.probs()) {
        if (x <= 0.0) continue;
        if (ref < 0.0) ref = x;
        else if (std::abs(x - ref) > 1e-14 * ref) return false;
    }
    return true;
}

inline SourceStats stats(const FiniteDist& p) {
    SourceStats s;
    s.is_uniform = is_uniform(p);
    s.h = entropy(p);
    // Rounding would otherwise leave v ~ 1e-33 for uniform inputs.
    s.v = s.is_uniform ? 0.0 : varentropy(p);
    return s;
}

/// Bhattacharyya coefficient between distributions on a common set.
inline double fidelity(const FiniteDist& p, const FiniteDist& q) {
    if (p.size() != q.size())
        throw InvalidInput("fidelity: support size mismatch (" + std::to_string(p.size()) + " vs " +
                           std::to_string(q.size()) + ")");
    double f = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) f += std::sqrt(p[i] * q[i]);
    return std::min(f, 1.0);
}

inline double hellinger(const FiniteDist& p, const FiniteDist& q) {
    return std::sqrt(std::max(0.0, 1.0 - fidelity(p, q)));
}

/// Explicit n-fold product, outcome index in row-major order (first factor
/// most significant). Only for small supports.
inline FiniteDist product_power(const FiniteDist& p, std::size_t n, std::size_t max_size = 1u << 24) {
    std::vector<double> out{1.0};
    for (std::size_t k = 0; k < n; ++k) {
        if (out.size() * p.size() > max_size) throw LimitExceeded("product_power: support too large");
        std::vector<double> next;
        next.reserve(out.size() * p.size());
        for (double a : out)
            for (double b : p.probs()) next.push_back(a * b);
        out = std::move(next);
    }
    double total = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& x : out) x /= total;
    return FiniteDist(std::move(out));
}

//------------------------------------------------------------------------------
// Block representation
//------------------------------------------------------------------------------

/// Rank positions and per-entry probabilities of P^n leave the double
/// range around n log|X| > 700; the x87 extended format keeps them finite.
using Rank = long double;

/// `count` copies of the same probability exp(log_value).
struct Block {
    double log_value = 0.0;
    double log_count = 0.0;
    std::optional<std::uint64_t> count;  // exact when it fits in 63 bits

    Rank count_real() const { return count ? static_cast<Rank>(*count) : std::exp(static_cast<Rank>(log_count)); }
    Rank value() const { return std::exp(static_cast<Rank>(log_value)); }
    double mass() const { return std::exp(log_value + log_count); }
};

namespace detail {

inline constexpr std::uint64_t kExactCountLimit = (std::uint64_t{1} << 63) - 1;

inline bool same_log_value(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline std::optional<std::uint64_t> add_counts(std::optional<std::uint64_t> a,
                                               std::optional<std::uint64_t> b) {
    if (!a || !b) return std::nullopt;
    if (*a > kExactCountLimit - *b) return std::nullopt;
    return *a + *b;
}

}  // namespace detail

/// Distribution stored as blocks of equal probabilities, sorted strictly
/// decreasing by value. Ranks are 0-based positions in P^down; a block i
/// covers ranks [start(i), start(i+1)).
class BlockDist {
public:
    static constexpr double kNormTolerance = 1e-9;

    BlockDist() : BlockDist(std::vector<Block>{Block{0.0, 0.0, 1}}) {}

    /// Sorts, merges equal values and validates. Blocks with zero count or
    /// -inf value are dropped.
    explicit BlockDist(std::vector<Block> blocks) {
        std::erase_if(blocks, [](const Block& b) {
            return !std::isfinite(b.log_value) || b.log_count == -std::numeric_limits<double>::infinity() ||
                   (b.count && *b.count == 0);
        });
        if (blocks.empty()) throw InvalidInput("block distribution has no mass");
        std::stable_sort(blocks.begin(), blocks.end(),
                         [](const Block& a, const Block& b) { return a.log_value > b.log_value; });
        for (auto& b : blocks) {
            if (b.count) b.log_count = std::log(static_cast<double>(*b.count));
            if (b.log_count < -1e-9) throw InvalidInput("block count must be >= 1");
        }
        for (auto& b : blocks) {
            if (!blocks_.empty() && detail::same_log_value(blocks_.back().log_value, b.log_value)) {
                Block& back = blocks_.back();
                back.count = detail::add_counts(back.count, b.count);
                back.log_count = back.count ? std::log(static_cast<double>(*back.count))
                                            : detail::log_add(back.log_count, b.log_count);
            } else {
                blocks_.push_back(b);
            }
        }
        double log_total = -std::numeric_limits<double>::infinity();
        for (const auto& b : blocks_) log_total = detail::log_add(log_total, b.log_value + b.log_count);
        if (std::abs(log_total) > kNormTolerance)
            throw InvalidInput("block distribution mass is not 1 (log mass = " + std::to_string(log_total) + ")");
        index();
    }

    static BlockDist from_finite(const FiniteDist& p) {
        std::vector<Block> blocks;
        for (double x : p.probs())
            if (x > 0.0) blocks.push_back(Block{std::log(x), 0.0, 1});
        return BlockDist(std::move(blocks));
    }

    std::span<const Block> blocks() const { return blocks_; }
    std::size_t num_blocks() const { return blocks_.size(); }

    /// First rank of block i; start(num_blocks()) is the support size.
    Rank start(std::size_t i) const { return start_[i]; }
    Rank support_size() const { return start_.back(); }
    /// Mass of all blocks before block i.
    double mass_before(std::size_t i) const { return cum_mass_[i]; }

    /// C(l): total mass of the l largest entries. Fractional l interpolates
    /// linearly inside a block.
    double cumulative(Rank l) const {
        if (!(l >= 0.0L)) throw InvalidInput("cumulative: rank must be >= 0");
        if (l >= start_.back()) return 1.0;
        const std::size_t i = block_at(l);
        return std::min(1.0, cum_mass_[i] + static_cast<double>((l - start_[i]) * values_[i]));
    }

    /// Index of the block holding rank l (l < support_size()).
    std::size_t block_at(Rank l) const {
        auto it = std::upper_bound(start_.begin(), start_.end(), l);
        return static_cast<std::size_t>(std::distance(start_.begin(), it)) - 1;
    }

    Rank value(std::size_t i) const { return values_[i]; }

    /// Sorted probability vector, padded with zeros to `pad_to` entries.
    std::vector<double> sorted_values(std::size_t pad_to = 0, std::size_t max_size = 1u << 24) const {
        if (support_size() > static_cast<Rank>(max_size)) throw LimitExceeded("sorted_values: support too large");
        std::vector<double> out;
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            const auto c = static_cast<std::size_t>(std::llround(blocks_[i].count_real()));
            out.insert(out.end(), c, static_cast<double>(values_[i]));
        }
        if (out.size() < pad_to) out.resize(pad_to, 0.0);
        return out;
    }

    FiniteDist to_finite(std::size_t pad_to = 0) const {
        auto v = sorted_values(pad_to);
        const double total = std::accumulate(v.begin(), v.end(), 0.0);
        for (double& x : v) x /= total;
        return FiniteDist(std::move(v));
    }

private:
    void index() {
        start_.assign(blocks_.size() + 1, 0.0L);
        cum_mass_.assign(blocks_.size() + 1, 0.0);
        values_.resize(blocks_.size());
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            values_[i] = blocks_[i].value();
            start_[i + 1] = start_[i] + blocks_[i].count_real();
            cum_mass_[i + 1] = cum_mass_[i] + blocks_[i].mass();
        }
        if (!std::isfinite(start_.back())) throw LimitExceeded("block distribution support size overflows the rank type");
    }

    std::vector<Block> blocks_;
    std::vector<Rank> start_;
    std::vector<double> cum_mass_;
    std::vector<Rank> values_;
};

namespace detail {

/// Multinomial coefficient n! / prod(k_i!) if it fits in 63 bits.
inline std::optional<std::uint64_t> exact_multinomial(std::span<const std::size_t> parts) {
    unsigned __int128 acc = 1;
    std::size_t n = 0;
    for (std::size_t k : parts) {
        // acc *= C(n + k, k), built incrementally so every step is an integer.
        for (std::size_t j = 1; j <= k; ++j) {
            acc = acc * (n + j) / j;
            if (acc > kExactCountLimit) return std::nullopt;
        }
        n += k;
    }
    return static_cast<std::uint64_t>(acc);
}

}  // namespace detail

/// P^n compressed by type classes: one block per composition of n over the
/// positive support of P, merged where product probabilities coincide.
inline BlockDist iid_power(const FiniteDist& p, std::size_t n, std::size_t max_types = 20'000'000) {
    if (n < 1) throw InvalidInput("iid_power: n must be >= 1");
    std::vector<double> logs;
    for (double x : p.probs())
        if (x > 0.0) logs.push_back(std::log(x));
    const std::size_t k = logs.size();

    // C(n + k - 1, k - 1) compositions
    double types = 1.0;
    for (std::size_t j = 1; j < k; ++j) types = types * static_cast<double>(n + j) / static_cast<double>(j);
    if (types > static_cast<double>(max_types)) throw LimitExceeded("iid_power: too many type classes");

    const double lg_n = std::lgamma(static_cast<double>(n) + 1.0);
    std::vector<Block> blocks;
    blocks.reserve(static_cast<std::size_t>(types));
    std::vector<std::size_t> parts(k, 0);

    std::function<void(std::size_t, std::size_t)> recurse = [&](std::size_t idx, std::size_t left) {
        if (idx + 1 == k) {
            parts[idx] = left;
            double lv = 0.0, lc = lg_n;
            for (std::size_t j = 0; j < k; ++j) {
                lv += static_cast<double>(parts[j]) * logs[j];
                lc -= std::lgamma(static_cast<double>(parts[j]) + 1.0);
            }
            auto exact = detail::exact_multinomial(parts);
            blocks.push_back(Block{lv, exact ? std::log(static_cast<double>(*exact)) : lc, exact});
            return;
        }
        for (std::size_t c = 0; c <= left; ++c) {
            parts[idx] = c;
            recurse(idx + 1, left - c);
        }
    };
    recurse(0, n);
    return BlockDist(std::move(blocks));
}

/// Fidelity of two block distributions with both sorted decreasingly and
/// paired rank by rank (the best pairing over relabelings).
inline double sorted_fidelity(const BlockDist& a, const BlockDist& b) {
    double f = 0.0;
    Rank pos = 0.0L;
    std::size_t i = 0, j = 0;
    const Rank end = std::min(a.support_size(), b.support_size());
    while (pos < end && i < a.num_blocks() && j < b.num_blocks()) {
        const Rank next = std::min(a.start(i + 1), b.start(j + 1));
        f += static_cast<double>((next - pos) * std::sqrt(a.value(i)) * std::sqrt(b.value(j)));
        pos = next;
        if (a.start(i + 1) <= pos) ++i;
        if (b.start(j + 1) <= pos) ++j;
    }
    return std::min(f, 1.0);
}

//------------------------------------------------------------------------------
// Text format: one probability per line, or an inline comma list.
//------------------------------------------------------------------------------

inline FiniteDist parse_dist_text(const std::string& text) {
    std::vector<double> v;
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', '\n');
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        const std::string tok = line.substr(b, e - b + 1);
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw InvalidInput("cannot parse probability '" + tok + "'");
        }
        if (used != tok.size()) throw InvalidInput("cannot parse probability '" + tok + "'");
        v.push_back(x);
    }
    return FiniteDist(std::move(v));
}

/// Accepts either an inline list ("0.8,0.2") or a path to a file in the
/// one-per-line format.
inline FiniteDist load_dist(const std::string& arg) {
    std::ifstream f(arg);
    if (f) {
        std::stringstream ss;
        ss << f.rdbuf();
        return parse_dist_text(ss.str());
    }
    if (arg.find_first_of("0123456789") == std::string::npos)
        throw IoError("cannot open distribution file '" + arg + "'");
    return parse_dist_text(arg);
}

inline std::string format_dist(const FiniteDist& p) {
    std::string out;
    char buf[64];
    for (double x : p.probs()) {
        std::snprintf(buf, sizeof buf, "%.17g\n", x);
        out += buf;
    }
    return out;
}

}  // namespace rngrate
