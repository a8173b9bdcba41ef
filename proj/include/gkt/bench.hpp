#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gkt::bench {

enum class BenchOp { compose, extract };

struct BenchRow {
    std::size_t group_size = 0;
    std::size_t prime_bits = 0;
    BenchOp op = BenchOp::compose;
    double mean_micros = 0;
    double stddev_micros = 0;  // sample standard deviation of the same trials
    std::size_t trials = 0;
};

struct BenchConfig {
    std::vector<std::size_t> sizes;
    std::size_t prime_bits = 64;
    std::size_t trials = 30;
    std::uint64_t seed = 0;
    std::size_t warmup = 5;
    /// Operations per timed trial; each trial reports the per-operation average.
    std::size_t batch = 64;
};

inline constexpr std::size_t kMinTrials = 30;

/// Two rows per size (compose, then extract), in the order of `sizes`.
/// Group setup (prime generation, key selection) is outside the timed
/// region. Throws InvalidArgument for empty sizes, a zero size, or fewer
/// than kMinTrials trials.
std::vector<BenchRow> run_bench(const BenchConfig& config);

inline constexpr const char* kCsvHeader = "group_size,prime_bits,op,mean_micros,stddev_micros,trials";

void write_csv(const std::vector<BenchRow>& rows, std::ostream& out);

/// True if the series is non-decreasing except for at most one step down
/// that is smaller than the larger of the two points' stddevs.
bool monotone_within_noise(const std::vector<BenchRow>& series);

}  // namespace gkt::bench
