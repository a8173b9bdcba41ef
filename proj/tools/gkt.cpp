// gkt: command-line front end for the group key transfer toolkit.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "gkt/bench.hpp"
#include "gkt/core_protocol.hpp"
#include "gkt/kgc.hpp"
#include "gkt/sim_adversary.hpp"
#include "gkt/wire_service.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct GlobalOptions {
    std::uint64_t seed = 1;
    std::size_t prime_bits = 64;
    std::size_t secret_bits = 0;  // 0 = prime_bits - 1
    std::size_t key_bits = 32;

    std::size_t effective_secret_bits() const { return secret_bits ? secret_bits : prime_bits - 1; }
};

// Member values from the ten-member worked example: (P, S), K = 22971,
// plus the outsider (43651, 45079).
struct WorkedExample {
    static constexpr unsigned long primes[10] = {55837, 55603, 35353, 54709, 60799,
                                                 45953, 40847, 39461, 42709, 58909};
    static constexpr unsigned long secrets[10] = {28931, 37123, 12347, 13745, 16231,
                                                  31234, 21467, 25431, 17237, 21719};
    static constexpr unsigned long key = 22971;
    static constexpr unsigned long outsider_prime = 43651;
    static constexpr unsigned long outsider_secret = 45079;
};

std::string dec(const gkt::Nat& n) { return n.get_str(10); }

int demo_worked_example(std::ostream& out) {
    using namespace gkt;
    std::vector<MemberPrime> primes;
    std::vector<MemberSecret> secrets;
    std::vector<MaskedShare> shares;
    out << "demo: ten-member worked example, K=" << WorkedExample::key << '\n';
    for (int i = 0; i < 10; ++i) {
        primes.push_back(MemberPrime::of(Nat(WorkedExample::primes[i])));
        secrets.push_back(MemberSecret::of(Nat(WorkedExample::secrets[i])));
        shares.push_back(xor_mask(primes.back(), secrets.back()));
        out << "register u" << i + 1 << " P=" << WorkedExample::primes[i] << " S=" << WorkedExample::secrets[i]
            << " D=" << dec(shares.back().value) << '\n';
    }
    const GroupKey key{Nat(WorkedExample::key), 1};
    try {
        compose_broadcast(shares, key, BroadcastKind::initial);
    } catch (const Error& e) {
        out << "note: KGC would refuse this key (" << e.what() << ")\n";
    }
    const BroadcastMessage message{share_product(shares) + key.value, 1, BroadcastKind::initial};
    out << "broadcast M=" << dec(message.value) << " (" << bit_length(message.value) << " bits)\n";

    bool all_agree = true;
    for (int i = 0; i < 10; ++i) {
        Nat k = extract_key(message, primes[i], secrets[i]);
        const bool ok = k == key.value;
        all_agree = all_agree && ok;
        out << "member u" << i + 1 << " extracts K=" << dec(k) << (ok ? " ok" : " MISMATCH") << '\n';
    }
    Nat eve = sim::eavesdrop_extract(message, MemberPrime::of(Nat(WorkedExample::outsider_prime)),
                                     MemberSecret::of(Nat(WorkedExample::outsider_secret)));
    const bool eve_fails = eve != key.value;
    out << "eavesdropper P=" << WorkedExample::outsider_prime << " S=" << WorkedExample::outsider_secret
        << " extracts " << dec(eve) << (eve_fails ? " (differs)" : " (LEARNED KEY)") << '\n';
    out << "result: " << (all_agree && eve_fails ? "ok" : "FAILED") << '\n';
    return all_agree && eve_fails ? kExitOk : kExitRuntime;
}

int demo_random(std::size_t members, const GlobalOptions& g, std::ostream& out) {
    using namespace gkt;
    KgcConfig config;
    config.prime_bits = g.prime_bits;
    config.secret_bits = g.effective_secret_bits();
    config.key_bits = g.key_bits;
    Kgc kgc(config);
    RandomSource rng(g.seed);

    out << "demo: " << members << " members, " << g.prime_bits << "-bit primes, seed=" << g.seed << '\n';
    std::vector<std::string> ids;
    for (std::size_t i = 1; i <= members; ++i) {
        const std::string id = "u" + std::to_string(i);
        const auto& rec = kgc.register_member(id, random_secret(config.secret_bits, rng), rng);
        out << "register " << id << " P=" << to_hex(rec.prime.value) << " S=" << to_hex(rec.secret.value)
            << " D=" << to_hex(rec.share().value) << '\n';
        ids.push_back(id);
    }
    BroadcastMessage message = kgc.start_session(ids, rng);
    out << "key K=" << to_hex(kgc.state().key.value) << " epoch=" << message.epoch << '\n';
    out << "broadcast M=" << to_hex(message.value) << " (" << bit_length(message.value) << " bits)\n";

    bool all_agree = true;
    for (const auto& id : ids) {
        const auto& rec = kgc.registry().at(id);
        Nat k = extract_key(message, rec.prime, rec.secret);
        const bool ok = k == kgc.state().key.value;
        all_agree = all_agree && ok;
        out << "member " << id << " extracts K=" << to_hex(k) << (ok ? " ok" : " MISMATCH") << '\n';
    }
    RandomSource eve_rng(g.seed ^ 0x5bd1e995ULL);
    MemberPrime eve_prime = generate_member_prime(g.prime_bits, kgc.registry().used_primes(), eve_rng);
    MemberSecret eve_secret = random_secret(config.secret_bits, eve_rng);
    Nat eve = sim::eavesdrop_extract(message, eve_prime, eve_secret);
    const bool eve_fails = eve != kgc.state().key.value;
    out << "eavesdropper P=" << to_hex(eve_prime.value) << " S=" << to_hex(eve_secret.value) << " extracts "
        << to_hex(eve) << (eve_fails ? " (differs)" : " (LEARNED KEY)") << '\n';
    out << "result: " << (all_agree && eve_fails ? "ok" : "FAILED") << '\n';
    return all_agree && eve_fails ? kExitOk : kExitRuntime;
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

bool is_validation(gkt::ErrorCode code) {
    using gkt::ErrorCode;
    switch (code) {
        case ErrorCode::ScenarioInvalid:
        case ErrorCode::TooLarge:
        case ErrorCode::InvalidArgument:
        case ErrorCode::MalformedRecord:
            return true;
        default:
            return false;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Group key transfer toolkit: KGC broadcast keying, simulation and benchmarks"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--prime-bits", g.prime_bits, "Member prime size in bits")
        ->check(CLI::IsMember({16, 64, 128, 512, 1024}))
        ->capture_default_str();
    app.add_option("--secret-bits", g.secret_bits, "Member secret size in bits (default: prime bits - 1)");
    app.add_option("--key-bits", g.key_bits, "Group key size cap in bits")->check(CLI::PositiveNumber)->capture_default_str();

    auto* demo = app.add_subcommand("demo", "Run one keying round and show every member's extraction");
    std::size_t demo_members = 10;
    bool worked_example = false;
    demo->add_option("-n,--members", demo_members, "Group size")->check(CLI::PositiveNumber)->capture_default_str();
    demo->add_flag("--worked-example", worked_example, "Use the pinned ten-member worked example");

    auto* scenario = app.add_subcommand("scenario", "Run a scenario file and write its transcript");
    std::string scenario_path;
    std::string transcript_path;
    scenario->add_option("path", scenario_path, "Scenario file")->required();
    scenario->add_option("-o,--out", transcript_path, "Transcript file (default: stdout)");

    auto* serve = app.add_subcommand("serve", "Run the KGC daemon");
    std::string listen = "127.0.0.1:7878";
    std::string registry_path;
    bool insecure = false;
    serve->add_option("--listen", listen, "host:port")->capture_default_str();
    serve->add_option("--registry", registry_path, "Registry file to load and keep updated");
    serve->add_flag("--insecure", insecure, "Allow binding a non-loopback address (secrets travel in clear)");

    auto* attack = app.add_subcommand("attack", "Toy brute-force key recovery against a small group");
    std::size_t attack_members = 2;
    attack->add_option("-n,--members", attack_members, "Group size")->check(CLI::PositiveNumber)->capture_default_str();

    auto* bench = app.add_subcommand("bench", "Time composition and extraction, CSV output");
    std::vector<std::size_t> sizes{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    std::size_t trials = 100;
    std::string csv_path;
    bench->add_option("--sizes", sizes, "Group sizes")->delimiter(',')->capture_default_str();
    bench->add_option("--trials", trials, "Timed trials per row (>= 30)")->capture_default_str();
    bench->add_option("-o,--out", csv_path, "CSV file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    if (g.secret_bits != 0 && g.secret_bits > g.prime_bits - 1) {
        std::cerr << "error: --secret-bits must be at most prime bits - 1\n" << app.help();
        return kExitValidation;
    }

    try {
        if (*demo) {
            return worked_example ? demo_worked_example(std::cout) : demo_random(demo_members, g, std::cout);
        }

        if (*scenario) {
            std::ifstream in(scenario_path);
            if (!in) {
                std::cerr << "error: cannot open " << scenario_path << '\n';
                return kExitValidation;
            }
            const auto parsed = gkt::sim::parse_scenario(in);
            const std::string text = gkt::sim::render_transcript(gkt::sim::run_scenario(parsed));
            if (transcript_path.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(transcript_path);
                out << text;
                if (!out) {
                    std::cerr << "error: cannot write " << transcript_path << '\n';
                    return kExitRuntime;
                }
            }
            return kExitOk;
        }

        if (*serve) {
            gkt::wire::ServerConfig config;
            const auto colon = listen.rfind(':');
            if (colon == std::string::npos) {
                std::cerr << "error: --listen must be host:port\n";
                return kExitValidation;
            }
            config.host = listen.substr(0, colon);
            try {
                config.port = static_cast<std::uint16_t>(std::stoul(listen.substr(colon + 1)));
            } catch (const std::exception&) {
                std::cerr << "error: bad port in --listen\n";
                return kExitValidation;
            }
            config.insecure = insecure;
            config.seed = g.seed;
            config.kgc.prime_bits = g.prime_bits;
            config.kgc.secret_bits = g.effective_secret_bits();
            config.kgc.key_bits = g.key_bits;
            if (!registry_path.empty()) config.registry_path = registry_path;

            gkt::wire::KgcServer server(config);
            server.start();
            std::cerr << "serving on " << config.host << ':' << server.port() << '\n';
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            server.stop();
            return kExitOk;
        }

        if (*attack) {
            gkt::RandomSource rng(g.seed);
            std::vector<gkt::MaskedShare> shares;
            std::vector<gkt::Nat> used;
            for (std::size_t i = 0; i < attack_members; ++i) {
                auto p = gkt::generate_member_prime(g.prime_bits, used, rng);
                used.push_back(p.value);
                shares.push_back(gkt::xor_mask(p, gkt::random_secret(g.effective_secret_bits(), rng)));
            }
            auto key = gkt::select_group_key(shares, g.key_bits, rng);
            key.epoch = 1;
            const auto message = gkt::compose_broadcast(shares, key, gkt::BroadcastKind::initial);
            std::cout << "attack: " << attack_members << " members, " << g.prime_bits << "-bit primes, M="
                      << gkt::to_hex(message.value) << " (" << gkt::bit_length(message.value) << " bits)\n";
            const auto started = std::chrono::steady_clock::now();
            const auto candidates = gkt::sim::brute_force_recover(
                message, gkt::Nat(1) << g.key_bits, gkt::sim::kAttackCapBits,
                gkt::sim::ShareShape{attack_members, g.prime_bits});
            const std::chrono::duration<double, std::milli> took = std::chrono::steady_clock::now() - started;
            bool found = false;
            for (const auto& c : candidates) found = found || c == key.value;
            std::cout << "candidates: " << candidates.size() << " (true key " << (found ? "included" : "MISSING")
                      << ") in " << took.count() << " ms\n";
            return found ? kExitOk : kExitRuntime;
        }

        if (*bench) {
            gkt::bench::BenchConfig config;
            config.sizes = sizes;
            config.prime_bits = g.prime_bits;
            config.trials = trials;
            config.seed = g.seed;
            const auto rows = gkt::bench::run_bench(config);
            if (csv_path.empty()) {
                gkt::bench::write_csv(rows, std::cout);
            } else {
                std::ofstream out(csv_path);
                gkt::bench::write_csv(rows, out);
            }
            return kExitOk;
        }
    } catch (const gkt::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (*bench && e.code() == gkt::ErrorCode::InvalidArgument) std::cerr << bench->help();
        return is_validation(e.code()) ? kExitValidation : kExitRuntime;
    } catch (const gkt::wire::TransportError& e) {
        std::cerr << "error: transport: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
