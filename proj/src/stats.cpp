#include "nscore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "nscore/error.hpp"

namespace nscore {

std::string_view method_name(TestMethod m) {
    switch (m) {
        case TestMethod::exact: return "exact";
        case TestMethod::normal_approx: return "normal_approx";
        case TestMethod::monte_carlo: return "monte_carlo";
    }
    return "?";
}

namespace {

constexpr std::size_t kMaxEnumerated = 60;

struct Ranked {
    std::vector<std::uint64_t> twice_rank;  // 2 * midrank, pooled order xs then ys
    std::vector<std::uint64_t> tie_sizes;
};

Ranked midranks(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size() + ys.size();
    std::vector<double> pooled(xs.begin(), xs.end());
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    Ranked r;
    r.twice_rank.resize(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        // ranks i+1 .. j+1 share the midrank (i + j + 2) / 2
        for (std::size_t t = i; t <= j; ++t) r.twice_rank[order[t]] = i + j + 2;
        r.tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }
    return r;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Exact two-sided p from the permutation null of the xs rank sum.
double exact_p(const Ranked& r, std::size_t n1, std::uint64_t observed2) {
    const std::size_t n = r.twice_rank.size();
    std::uint64_t max_sum = 0;
    for (auto w : r.twice_rank) max_sum += w;
    // counts[k][s]: subsets of size k among items seen so far with doubled rank sum s
    std::vector<std::vector<std::uint64_t>> counts(n1 + 1,
                                                   std::vector<std::uint64_t>(max_sum + 1, 0));
    counts[0][0] = 1;
    for (std::size_t item = 0; item < n; ++item) {
        const std::uint64_t w = r.twice_rank[item];
        for (std::size_t k = std::min(n1, item + 1); k >= 1; --k) {
            for (std::uint64_t s = max_sum; s >= w; --s) counts[k][s] += counts[k - 1][s - w];
        }
    }
    std::uint64_t total = 0;
    std::uint64_t le = 0;
    std::uint64_t ge = 0;
    for (std::uint64_t s = 0; s <= max_sum; ++s) {
        const std::uint64_t c = counts[n1][s];
        total += c;
        if (s <= observed2) le += c;
        if (s >= observed2) ge += c;
    }
    return std::min(1.0, static_cast<double>(2 * std::min(le, ge)) / static_cast<double>(total));
}

}  // namespace

TestResult wilcoxon_rank_sum(std::span<const double> xs, std::span<const double> ys,
                             WilcoxonMode mode) {
    if (xs.empty() || ys.empty()) throw InvalidInput("rank-sum test needs two non-empty samples");
    for (double v : xs) {
        if (std::isnan(v)) throw InvalidInput("rank-sum test input contains NaN");
    }
    for (double v : ys) {
        if (std::isnan(v)) throw InvalidInput("rank-sum test input contains NaN");
    }

    const std::size_t n1 = xs.size();
    const std::size_t n2 = ys.size();
    const std::size_t n = n1 + n2;
    const Ranked r = midranks(xs, ys);

    std::uint64_t rank_sum2 = 0;
    for (std::size_t i = 0; i < n1; ++i) rank_sum2 += r.twice_rank[i];
    const double u = static_cast<double>(rank_sum2) / 2.0 - static_cast<double>(n1 * (n1 + 1)) / 2.0;

    TestResult res;
    res.statistic = u;
    res.n1 = n1;
    res.n2 = n2;

    bool use_exact = mode == WilcoxonMode::exact ||
                     (mode == WilcoxonMode::automatic && n <= kExactWilcoxonLimit);
    if (use_exact && n > kMaxEnumerated) {
        throw InvalidInput("exact rank-sum test limited to " + std::to_string(kMaxEnumerated) +
                           " pooled samples");
    }
    if (use_exact) {
        res.method = TestMethod::exact;
        res.p_value = exact_p(r, n1, rank_sum2);
        return res;
    }

    res.method = TestMethod::normal_approx;
    const double dn1 = static_cast<double>(n1);
    const double dn2 = static_cast<double>(n2);
    const double dn = static_cast<double>(n);
    double tie_term = 0.0;
    for (auto t : r.tie_sizes) {
        const double dt = static_cast<double>(t);
        tie_term += dt * dt * dt - dt;
    }
    const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (!(var > 0.0)) {
        res.p_value = 1.0;
        return res;
    }
    const double z = std::max(0.0, std::abs(u - dn1 * dn2 / 2.0) - 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, 2.0 * normal_sf(z));
    return res;
}

double lilliefors_statistic(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 5) throw InvalidInput("Lilliefors test needs at least 5 observations");
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0) || !std::isfinite(sd)) {
        throw InvalidInput("Lilliefors test needs non-zero finite variance");
    }

    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const double dn = static_cast<double>(n);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double cdf = 1.0 - normal_sf((sorted[i] - mean) / sd);
        d = std::max({d, static_cast<double>(i + 1) / dn - cdf, cdf - static_cast<double>(i) / dn});
    }
    return d;
}

LillieforsNull::LillieforsNull(std::size_t n, std::size_t simulations, std::uint64_t seed)
    : n_(n), seed_(seed) {
    if (n < 5) throw InvalidInput("Lilliefors test needs at least 5 observations");
    if (simulations == 0) throw InvalidInput("Lilliefors null needs at least one simulation");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> draw(n);
    sorted_.reserve(simulations);
    for (std::size_t s = 0; s < simulations; ++s) {
        for (double& v : draw) v = normal(rng);
        sorted_.push_back(lilliefors_statistic(draw));
    }
    std::sort(sorted_.begin(), sorted_.end());
}

double LillieforsNull::p_value(double d) const {
    const auto at_least = static_cast<double>(
        sorted_.end() - std::lower_bound(sorted_.begin(), sorted_.end(), d));
    return (1.0 + at_least) / (1.0 + static_cast<double>(sorted_.size()));
}

const LillieforsNull& LillieforsNullCache::get(std::size_t n) {
    auto it = nulls_.find(n);
    if (it == nulls_.end()) {
        it = nulls_.emplace(n, LillieforsNull(n, options_.simulations, options_.seed)).first;
    }
    return it->second;
}

NormalityResult lilliefors(std::span<const double> xs, double alpha, const LillieforsNull& null) {
    if (xs.size() != null.sample_size()) {
        throw InvalidInput("Lilliefors null built for n=" + std::to_string(null.sample_size()) +
                           ", sample has n=" + std::to_string(xs.size()));
    }
    NormalityResult out;
    out.alpha = alpha;
    out.test.statistic = lilliefors_statistic(xs);
    out.test.p_value = null.p_value(out.test.statistic);
    out.test.method = TestMethod::monte_carlo;
    out.test.n1 = xs.size();
    out.rejected = out.test.p_value < alpha;
    return out;
}

NormalityResult lilliefors(std::span<const double> xs, double alpha,
                           const LillieforsOptions& options) {
    if (xs.size() < 5) throw InvalidInput("Lilliefors test needs at least 5 observations");
    lilliefors_statistic(xs);  // validates variance before the simulation cost
    return lilliefors(xs, alpha, LillieforsNull(xs.size(), options.simulations, options.seed));
}

GroupComparison group_comparison(std::span<const ScoredSample> samples,
                                 LillieforsNullCache& nulls) {
    std::array<std::vector<double>, 3> groups;
    for (const auto& s : samples) {
        groups[static_cast<std::size_t>(s.group)].push_back(s.oriented_score);
    }
    for (std::size_t g = 0; g < 3; ++g) {
        if (groups[g].empty()) {
            throw InvalidInput("group comparison needs a non-empty " +
                               std::string(group_name(static_cast<OutcomeGroup>(g))) + " group");
        }
    }

    GroupComparison out;
    out.cp_ip = wilcoxon_rank_sum(groups[0], groups[1]);
    out.cp_ns = wilcoxon_rank_sum(groups[0], groups[2]);
    out.ip_ns = wilcoxon_rank_sum(groups[1], groups[2]);
    for (std::size_t g = 0; g < 3; ++g) {
        try {
            lilliefors_statistic(groups[g]);
        } catch (const InvalidInput&) {
            continue;
        }
        out.normality[g] = lilliefors(groups[g], 0.05, nulls.get(groups[g].size()));
    }
    return out;
}

}  // namespace nscore
