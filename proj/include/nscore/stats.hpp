#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nscore/eval.hpp"

namespace nscore {

enum class TestMethod { exact, normal_approx, monte_carlo };

std::string_view method_name(TestMethod m);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    TestMethod method = TestMethod::exact;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

enum class WilcoxonMode { automatic, exact, normal_approx };

/// Largest combined size for which automatic mode enumerates the exact null.
inline constexpr std::size_t kExactWilcoxonLimit = 16;

/// Two-sided rank-sum test. statistic is the Mann-Whitney U of xs (midranks on ties).
/// Automatic mode is exact when n1 + n2 <= 16, otherwise normal with tie and
/// continuity correction.
TestResult wilcoxon_rank_sum(std::span<const double> xs, std::span<const double> ys,
                             WilcoxonMode mode = WilcoxonMode::automatic);

/// Sup distance between the empirical CDF and the fitted normal CDF.
double lilliefors_statistic(std::span<const double> xs);

/// Monte Carlo null distribution of the Lilliefors statistic for one sample size.
/// The statistic is location-scale invariant, so standard normal draws suffice.
class LillieforsNull {
public:
    LillieforsNull(std::size_t n, std::size_t simulations, std::uint64_t seed);

    std::size_t sample_size() const noexcept { return n_; }
    std::size_t simulations() const noexcept { return sorted_.size(); }
    std::uint64_t seed() const noexcept { return seed_; }

    /// (1 + #{simulated >= d}) / (1 + simulations)
    double p_value(double d) const;

private:
    std::size_t n_;
    std::uint64_t seed_;
    std::vector<double> sorted_;
};

struct LillieforsOptions {
    std::size_t simulations = 10000;
    std::uint64_t seed = 20190101;
};

/// Memoizes null distributions by sample size for a fixed option set.
class LillieforsNullCache {
public:
    explicit LillieforsNullCache(LillieforsOptions options = {}) : options_(options) {}

    const LillieforsNull& get(std::size_t n);
    const LillieforsOptions& options() const noexcept { return options_; }

private:
    LillieforsOptions options_;
    std::map<std::size_t, LillieforsNull> nulls_;
};

struct NormalityResult {
    TestResult test;
    double alpha = 0.05;
    bool rejected = false;
};

NormalityResult lilliefors(std::span<const double> xs, double alpha, const LillieforsNull& null);
NormalityResult lilliefors(std::span<const double> xs, double alpha,
                           const LillieforsOptions& options = {});

struct GroupComparison {
    TestResult cp_ip;
    TestResult cp_ns;
    TestResult ip_ns;
    /// Lilliefors at 0.05 per group (CP, IP, NS); empty when the group is too
    /// small or constant.
    std::array<std::optional<NormalityResult>, 3> normality;
};

GroupComparison group_comparison(std::span<const ScoredSample> samples,
                                 LillieforsNullCache& nulls);

}  // namespace nscore
