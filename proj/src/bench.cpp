#include "gkt/bench.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "gkt/core_protocol.hpp"

namespace gkt::bench {

namespace {

using Clock = std::chrono::steady_clock;

struct Stats {
    double mean = 0;
    double stddev = 0;
};

Stats summarize(const std::vector<double>& samples) {
    Stats s;
    for (double x : samples) s.mean += x;
    s.mean /= static_cast<double>(samples.size());
    double ss = 0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.stddev = samples.size() > 1 ? std::sqrt(ss / static_cast<double>(samples.size() - 1)) : 0.0;
    return s;
}

struct Group {
    std::vector<MemberPrime> primes;
    std::vector<MemberSecret> secrets;
    std::vector<MaskedShare> shares;
    GroupKey key;
};

Group make_group(std::size_t size, std::size_t prime_bits, RandomSource& rng) {
    Group g;
    std::vector<Nat> used;
    while (g.shares.size() < size) {
        MemberPrime p = generate_member_prime(prime_bits, used, rng);
        MemberSecret s = random_secret(prime_bits - 1, rng);
        used.push_back(p.value);
        g.shares.push_back(xor_mask(p, s));
        g.primes.push_back(std::move(p));
        g.secrets.push_back(std::move(s));
    }
    g.key = select_group_key(g.shares, prime_bits - 1, rng);
    return g;
}

// Keeps the optimizer from discarding timed work.
volatile std::size_t g_sink = 0;

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& config) {
    if (config.sizes.empty()) throw Error(ErrorCode::InvalidArgument, "no group sizes given");
    for (auto n : config.sizes) {
        if (n == 0) throw Error(ErrorCode::InvalidArgument, "group sizes must be >= 1");
    }
    if (config.trials < kMinTrials) {
        throw Error(ErrorCode::InvalidArgument, "need at least " + std::to_string(kMinTrials) + " trials");
    }
    if (config.batch == 0) throw Error(ErrorCode::InvalidArgument, "batch must be >= 1");

    RandomSource rng(config.seed);
    std::vector<Group> groups;
    std::vector<BroadcastMessage> messages;
    for (std::size_t size : config.sizes) {
        groups.push_back(make_group(size, config.prime_bits, rng));
        messages.push_back(compose_broadcast(groups.back().shares, groups.back().key, BroadcastKind::initial));
    }

    // Trials rotate over the sizes so load spikes are spread across all of them.
    const std::size_t n_sizes = config.sizes.size();
    std::vector<std::vector<double>> compose_samples(n_sizes), extract_samples(n_sizes);
    for (std::size_t t = 0; t < config.warmup + config.trials; ++t) {
        for (std::size_t i = 0; i < n_sizes; ++i) {
            const Group& group = groups[i];
            auto start = Clock::now();
            for (std::size_t b = 0; b < config.batch; ++b) {
                BroadcastMessage m = compose_broadcast(group.shares, group.key, BroadcastKind::initial);
                g_sink = g_sink + mpz_size(m.value.get_mpz_t());
            }
            std::chrono::duration<double, std::micro> took = Clock::now() - start;
            if (t >= config.warmup) compose_samples[i].push_back(took.count() / static_cast<double>(config.batch));

            const std::size_t member = t % group.primes.size();
            start = Clock::now();
            for (std::size_t b = 0; b < config.batch; ++b) {
                Nat k = extract_key(messages[i], group.primes[member], group.secrets[member]);
                g_sink = g_sink + mpz_size(k.get_mpz_t());
            }
            took = Clock::now() - start;
            if (t >= config.warmup) extract_samples[i].push_back(took.count() / static_cast<double>(config.batch));
        }
    }

    std::vector<BenchRow> rows;
    for (std::size_t i = 0; i < n_sizes; ++i) {
        const Stats c = summarize(compose_samples[i]);
        const Stats e = summarize(extract_samples[i]);
        rows.push_back({config.sizes[i], config.prime_bits, BenchOp::compose, c.mean, c.stddev, config.trials});
        rows.push_back({config.sizes[i], config.prime_bits, BenchOp::extract, e.mean, e.stddev, config.trials});
    }
    return rows;
}

void write_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    const auto flags = out.flags();
    out << std::fixed << std::setprecision(4);
    for (const auto& r : rows) {
        out << r.group_size << ',' << r.prime_bits << ',' << (r.op == BenchOp::compose ? "compose" : "extract")
            << ',' << r.mean_micros << ',' << r.stddev_micros << ',' << r.trials << '\n';
    }
    out.flags(flags);
}

bool monotone_within_noise(const std::vector<BenchRow>& series) {
    std::size_t inversions = 0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const auto& prev = series[i - 1];
        const auto& cur = series[i];
        if (cur.mean_micros >= prev.mean_micros) continue;
        const double noise = std::max(prev.stddev_micros, cur.stddev_micros);
        if (prev.mean_micros - cur.mean_micros >= noise) return false;
        if (++inversions > 1) return false;
    }
    return true;
}

}  // namespace gkt::bench
