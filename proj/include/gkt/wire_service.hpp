#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "gkt/kgc.hpp"
#include "gkt/member_client.hpp"
#include "gkt/wire.hpp"

namespace gkt::wire {

struct ServerConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 picks an ephemeral port
    /// Required to bind anything but loopback: REGISTER_REQ carries secrets in clear.
    bool insecure = false;
    KgcConfig kgc;
    std::uint64_t seed = 0;
    /// Loaded at start when the file exists, rewritten after every mutation.
    std::optional<std::string> registry_path;
};

bool is_loopback_host(std::string_view host);

/// KGC daemon over TCP. One thread per connection; every frame that touches
/// the group runs under a single lock, and BROADCAST fan-out to the
/// connections of active members happens under that lock too, so all
/// members see epochs in commit order. The requester's ACK follows its
/// broadcast on the same socket.
class KgcServer {
public:
    /// Throws InvalidArgument for a non-loopback host without `insecure`.
    explicit KgcServer(ServerConfig config);
    ~KgcServer();

    KgcServer(const KgcServer&) = delete;
    KgcServer& operator=(const KgcServer&) = delete;

    /// Binds and starts accepting. Throws TransportError.
    void start();
    void stop();

    std::uint16_t port() const { return port_; }

    GroupState state() const;
    Registry registry() const;
    std::optional<BroadcastMessage> last_broadcast() const;
    /// Members whose connection dropped while bound.
    std::set<std::string> unreachable_members() const;

private:
    struct Connection;

    void accept_loop();
    void serve_connection(std::shared_ptr<Connection> conn);
    Frame handle(Connection& conn, const Frame& request);
    void fan_out(const BroadcastMessage& message);
    void persist();
    void mark_unreachable(Connection& conn);

    ServerConfig config_;
    mutable std::mutex state_mutex_;
    Kgc kgc_;
    RandomSource rng_;
    std::set<std::string> unreachable_;

    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;

    std::mutex conn_mutex_;
    std::vector<std::shared_ptr<Connection>> connections_;
    std::vector<std::thread> workers_;
};

/// A member's connection to the KGC. A reader thread applies BROADCAST
/// frames to the member session (replays are dropped as stale) and routes
/// replies to the waiting request.
class KgcClient {
public:
    /// Throws TransportError.
    static std::unique_ptr<KgcClient> connect(const std::string& host, std::uint16_t port);
    ~KgcClient();

    KgcClient(const KgcClient&) = delete;
    KgcClient& operator=(const KgcClient&) = delete;

    /// Sends (id, S) and keeps the returned prime. Throws gkt::Error for an
    /// ERROR reply, TransportError for socket failures.
    MemberPrime register_member(const std::string& member_id, const MemberSecret& secret);
    void start(const std::vector<std::string>& member_ids);
    void join(const std::string& member_id);
    void leave(const std::string& member_id);

    /// Blocks until a broadcast of at least this epoch was applied.
    bool wait_for_epoch(std::uint64_t epoch, std::chrono::milliseconds timeout);

    std::optional<GroupKey> current() const;
    std::uint64_t last_epoch() const;
    /// Epochs in the order broadcasts were applied.
    std::vector<std::uint64_t> observed_epochs() const;

    /// Closes the socket without a goodbye (simulates a crash).
    void disconnect();

private:
    explicit KgcClient(int fd);
    void read_loop();
    Frame request(const Frame& frame);

    int fd_;
    std::mutex write_mutex_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Frame> replies_;
    std::optional<MemberSession> session_;
    std::vector<std::uint64_t> observed_;
    bool closed_ = false;
    std::thread reader_;
};

}  // namespace gkt::wire
