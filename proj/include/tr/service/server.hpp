#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "tr/service/scenario.hpp"

namespace tr::service {

struct ServerOptions {
    std::string address = "127.0.0.1";
    std::uint16_t port = 0;                 // 0 picks a free port
    std::filesystem::path base_dir = ".";   // for "path" loads and relative program files
    std::size_t queue_limit = 256;          // snapshots buffered per client before dropping the oldest
    double rate = 50.0;                     // ticks per second while running; <= 0 runs unthrottled
};

/// WebSocket control service. One thread owns the simulation; another does
/// all socket I/O. Every client message gets exactly one ack or error, in
/// the order the messages arrived.
///
/// client -> server, each with an optional "id" echoed in the reply:
///   {"type": "load", "scenario": {...}} or {"type": "load", "path": "s.json"}
///   {"type": "start"} {"type": "pause"} {"type": "step", "n": 5}
///   {"type": "set_rate", "rate": 100}
///   {"type": "inject", "event": {...}}           at_tick defaults to the next tick
///   {"type": "subscribe", "decimation": 2, "full_every": 10}
/// server -> client:
///   {"type": "ack", "id": .., "tick": ..} {"type": "error", "id": .., "reason": ".."}
///     the load ack adds "programs": condition and action source per program or tree
///   {"type": "snapshot", "record": {...}, "world": {...}}   world on every full_every-th snapshot
///     and on records that applied events; those records are never decimated
///   {"type": "finished", "reason": "ticks" | "error", "error": {...}}
class ControlServer {
  public:
    explicit ControlServer(ServerOptions options, std::optional<Scenario> initial = std::nullopt);
    ~ControlServer();
    ControlServer(const ControlServer&) = delete;
    ControlServer& operator=(const ControlServer&) = delete;

    /// Binds and starts both threads. Throws std::runtime_error if the port is taken.
    void start();
    void stop();
    std::uint16_t port() const;

    struct Impl;

  private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace tr::service
