#include "gkt/wire_service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace gkt::wire {

namespace {

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

bool read_exact(int fd, std::uint8_t* out, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        ssize_t r = ::recv(fd, out + got, n - got, 0);
        if (r == 0) return false;
        if (r < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

bool write_all(int fd, const std::vector<std::uint8_t>& bytes) {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        ssize_t w = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        sent += static_cast<std::size_t>(w);
    }
    return true;
}

// nullopt on clean EOF or socket error; gkt::Error for a malformed frame.
std::optional<Frame> read_frame(int fd) {
    std::vector<std::uint8_t> buf(kHeaderSize);
    if (!read_exact(fd, buf.data(), kHeaderSize)) return std::nullopt;
    try {
        decode_frame(buf);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Truncated) throw;
    }
    const std::uint32_t len = (std::uint32_t{buf[6]} << 24) | (std::uint32_t{buf[7]} << 16) |
                              (std::uint32_t{buf[8]} << 8) | std::uint32_t{buf[9]};
    buf.resize(kHeaderSize + len);
    if (len > 0 && !read_exact(fd, buf.data() + kHeaderSize, len)) return std::nullopt;
    return decode_frame(buf).frame;
}

int connect_to(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    const std::string service = std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result); rc != 0) {
        throw TransportError("resolve " + host + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(result);
    if (fd < 0) throw TransportError(errno_text("connect " + host + ":" + service));
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return fd;
}

}  // namespace

bool is_loopback_host(std::string_view host) {
    return host == "127.0.0.1" || host == "localhost" || host == "::1" || host.starts_with("127.");
}

// ------------------------------------------------------------------ server

struct KgcServer::Connection {
    explicit Connection(int f) : fd(f) {}
    int fd;
    std::mutex write_mutex;
    std::optional<std::string> member_id;  // guarded by state_mutex_
    std::atomic<bool> alive{true};

    bool send(const Frame& frame) {
        std::lock_guard lock(write_mutex);
        if (!alive) return false;
        if (!write_all(fd, encode_frame(frame))) {
            alive = false;
            return false;
        }
        return true;
    }
};

KgcServer::KgcServer(ServerConfig config)
    : config_(std::move(config)), kgc_(config_.kgc), rng_(config_.seed) {
    if (!config_.insecure && !is_loopback_host(config_.host)) {
        throw Error(ErrorCode::InvalidArgument,
                    "refusing to bind " + config_.host +
                        ": secrets travel in clear; pass --insecure to acknowledge");
    }
    if (config_.registry_path && std::filesystem::exists(*config_.registry_path)) {
        std::ifstream in(*config_.registry_path);
        kgc_ = Kgc(config_.kgc, load_registry(in));
    }
}

KgcServer::~KgcServer() { stop(); }

void KgcServer::start() {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* result = nullptr;
    const std::string service = std::to_string(config_.port);
    if (int rc = ::getaddrinfo(config_.host.c_str(), service.c_str(), &hints, &result); rc != 0) {
        throw TransportError("resolve " + config_.host + ": " + ::gai_strerror(rc));
    }
    int fd = ::socket(result->ai_family, result->ai_socktype, result->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(result);
        throw TransportError(errno_text("socket"));
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, result->ai_addr, result->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
        ::freeaddrinfo(result);
        ::close(fd);
        throw TransportError(errno_text("bind " + config_.host + ":" + service));
    }
    ::freeaddrinfo(result);

    sockaddr_storage bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port
                                              : reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
    listen_fd_ = fd;
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void KgcServer::stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(conn_mutex_);
        for (auto& conn : connections_) ::shutdown(conn->fd, SHUT_RDWR);
        workers.swap(workers_);
    }
    for (auto& t : workers) t.join();
    std::lock_guard lock(conn_mutex_);
    for (auto& conn : connections_) ::close(conn->fd);
    connections_.clear();
}

void KgcServer::accept_loop() {
    while (running_) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return;
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        auto conn = std::make_shared<Connection>(fd);
        std::lock_guard lock(conn_mutex_);
        if (!running_) {
            ::close(fd);
            return;
        }
        connections_.push_back(conn);
        workers_.emplace_back([this, conn] { serve_connection(conn); });
    }
}

void KgcServer::serve_connection(std::shared_ptr<Connection> conn) {
    for (;;) {
        std::optional<Frame> frame;
        try {
            frame = read_frame(conn->fd);
        } catch (const Error& e) {
            // Framing is lost; report and drop the connection.
            conn->send(make_error({static_cast<std::uint16_t>(e.code()), e.what()}));
            frame.reset();
        }
        if (!frame) break;
        Frame reply = handle(*conn, *frame);
        if (!conn->send(reply)) break;
    }
    conn->alive = false;
    ::shutdown(conn->fd, SHUT_RDWR);
    std::lock_guard lock(state_mutex_);
    mark_unreachable(*conn);
}

Frame KgcServer::handle(Connection& conn, const Frame& request) {
    try {
        std::lock_guard lock(state_mutex_);
        switch (request.kind) {
            case FrameKind::register_req: {
                auto req = parse_register_req(request);
                const auto& record = kgc_.register_member(req.member_id, MemberSecret::of(req.secret), rng_);
                conn.member_id = record.member_id;
                unreachable_.erase(record.member_id);
                persist();
                return make_register_resp({record.member_id, record.prime.value});
            }
            case FrameKind::start_req: {
                auto req = parse_start_req(request);
                auto message = kgc_.start_session(req.member_ids, rng_);
                persist();
                fan_out(message);
                return make_ack();
            }
            case FrameKind::join_req: {
                auto req = parse_member_req(request);
                auto message = kgc_.process_join(req.member_id, rng_);
                persist();
                fan_out(message);
                return make_ack();
            }
            case FrameKind::leave_req: {
                auto req = parse_member_req(request);
                auto message = kgc_.process_leave(req.member_id, rng_);
                persist();
                fan_out(message);
                return make_ack();
            }
            default:
                throw Error(ErrorCode::UnknownKind, "kind " + std::to_string(static_cast<int>(request.kind)) +
                                                        " is not a request");
        }
    } catch (const Error& e) {
        return make_error({static_cast<std::uint16_t>(e.code()), e.what()});
    }
}

void KgcServer::fan_out(const BroadcastMessage& message) {
    const Frame frame = make_broadcast(message);
    std::lock_guard lock(conn_mutex_);
    for (auto& conn : connections_) {
        if (!conn->alive || !conn->member_id) continue;
        const auto& record = kgc_.registry().at(*conn->member_id);
        if (record.status != MemberStatus::active) continue;
        if (!conn->send(frame)) mark_unreachable(*conn);
    }
}

void KgcServer::mark_unreachable(Connection& conn) {
    if (conn.member_id && kgc_.registry().contains(*conn.member_id)) unreachable_.insert(*conn.member_id);
}

void KgcServer::persist() {
    if (!config_.registry_path) return;
    const std::string tmp = *config_.registry_path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        save_registry(kgc_.registry(), out);
    }
    std::filesystem::rename(tmp, *config_.registry_path);
}

GroupState KgcServer::state() const {
    std::lock_guard lock(state_mutex_);
    return kgc_.state();
}

Registry KgcServer::registry() const {
    std::lock_guard lock(state_mutex_);
    return kgc_.registry();
}

std::optional<BroadcastMessage> KgcServer::last_broadcast() const {
    std::lock_guard lock(state_mutex_);
    return kgc_.last_broadcast();
}

std::set<std::string> KgcServer::unreachable_members() const {
    std::lock_guard lock(state_mutex_);
    return unreachable_;
}

// ------------------------------------------------------------------ client

std::unique_ptr<KgcClient> KgcClient::connect(const std::string& host, std::uint16_t port) {
    return std::unique_ptr<KgcClient>(new KgcClient(connect_to(host, port)));
}

KgcClient::KgcClient(int fd) : fd_(fd) {
    reader_ = std::thread([this] { read_loop(); });
}

KgcClient::~KgcClient() { disconnect(); }

void KgcClient::disconnect() {
    if (fd_ < 0) return;
    ::shutdown(fd_, SHUT_RDWR);
    if (reader_.joinable()) reader_.join();
    ::close(fd_);
    fd_ = -1;
}

void KgcClient::read_loop() {
    for (;;) {
        std::optional<Frame> frame;
        try {
            frame = read_frame(fd_);
        } catch (const Error&) {
            frame.reset();
        }
        if (!frame) break;
        std::lock_guard lock(mutex_);
        if (frame->kind == FrameKind::broadcast) {
            if (!session_) continue;
            try {
                session_->on_broadcast(parse_broadcast(*frame));
                observed_.push_back(session_->last_epoch());
            } catch (const Error& e) {
                // At-least-once delivery: replays arrive as stale epochs.
                if (e.code() != ErrorCode::StaleEpoch) continue;
            }
        } else {
            replies_.push_back(std::move(*frame));
        }
        cv_.notify_all();
    }
    std::lock_guard lock(mutex_);
    closed_ = true;
    cv_.notify_all();
}

Frame KgcClient::request(const Frame& frame) {
    {
        std::lock_guard lock(write_mutex_);
        if (fd_ < 0 || !write_all(fd_, encode_frame(frame))) throw TransportError("send failed");
    }
    std::unique_lock lock(mutex_);
    if (!cv_.wait_for(lock, std::chrono::seconds(30), [&] { return !replies_.empty() || closed_; })) {
        throw TransportError("timed out waiting for reply");
    }
    if (replies_.empty()) throw TransportError("connection closed by server");
    Frame reply = std::move(replies_.front());
    replies_.pop_front();
    if (reply.kind == FrameKind::error) {
        auto err = parse_error(reply);
        if (err.code == 0 || err.code > static_cast<std::uint16_t>(ErrorCode::InvalidArgument)) {
            throw Error(ErrorCode::MalformedPayload, "server sent unknown error code " + std::to_string(err.code));
        }
        throw Error(static_cast<ErrorCode>(err.code), "server: " + err.message);
    }
    return reply;
}

MemberPrime KgcClient::register_member(const std::string& member_id, const MemberSecret& secret) {
    Frame reply = request(make_register_req({member_id, secret.value}));
    auto resp = parse_register_resp(reply);
    MemberPrime prime = MemberPrime::of(resp.prime);
    std::lock_guard lock(mutex_);
    session_.emplace(member_id, prime, secret);
    return prime;
}

void KgcClient::start(const std::vector<std::string>& member_ids) {
    auto reply = request(make_start_req({member_ids}));
    if (reply.kind != FrameKind::ack) throw Error(ErrorCode::MalformedPayload, "expected ACK");
}

void KgcClient::join(const std::string& member_id) {
    auto reply = request(make_join_req({member_id}));
    if (reply.kind != FrameKind::ack) throw Error(ErrorCode::MalformedPayload, "expected ACK");
}

void KgcClient::leave(const std::string& member_id) {
    auto reply = request(make_leave_req({member_id}));
    if (reply.kind != FrameKind::ack) throw Error(ErrorCode::MalformedPayload, "expected ACK");
}

bool KgcClient::wait_for_epoch(std::uint64_t epoch, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, timeout, [&] {
        return (session_ && session_->last_epoch() >= epoch) || closed_;
    }) && session_ && session_->last_epoch() >= epoch;
}

std::optional<GroupKey> KgcClient::current() const {
    std::lock_guard lock(mutex_);
    if (!session_) return std::nullopt;
    return session_->current();
}

std::uint64_t KgcClient::last_epoch() const {
    std::lock_guard lock(mutex_);
    return session_ ? session_->last_epoch() : 0;
}

std::vector<std::uint64_t> KgcClient::observed_epochs() const {
    std::lock_guard lock(mutex_);
    return observed_;
}

}  // namespace gkt::wire
