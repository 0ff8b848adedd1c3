#include "tr/service/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "tr/botworld/io.hpp"
#include "tr/lang/parser.hpp"
#include "tr/service/simulation.hpp"

namespace tr::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

class Session;

struct Inbound {
    enum class Kind { Connect, Message };
    Kind kind;
    std::shared_ptr<Session> session;
    std::string text;
};

struct ControlServer::Impl {
    ServerOptions options;
    asio::io_context ioc;
    tcp::acceptor acceptor{ioc};
    std::thread io_thread;
    std::thread sim_thread;

    std::mutex mu;
    std::condition_variable cv;
    std::deque<Inbound> inbox;
    bool stopping = false;
    bool started = false;

    // Simulation thread only.
    std::optional<Simulation> sim;
    bool running = false;
    bool ended = false;
    double rate = 50.0;
    struct Subscriber {
        std::weak_ptr<Session> session;
        std::uint64_t decimation = 1;
        std::uint64_t full_every = 10;
        std::uint64_t sent = 0;
    };
    std::map<Session*, Subscriber> subscribers;
    std::map<Session*, std::weak_ptr<Session>> clients;

    std::uint64_t next_session = 1;

    void post(Inbound in) {
        {
            std::lock_guard lock(mu);
            inbox.push_back(std::move(in));
        }
        cv.notify_one();
    }

    void do_accept();
    void sim_loop();
    void handle(Inbound& in);
    json dispatch(Session& from, const json& msg);
    void advance();
    void broadcast_finished(const json& msg);
    void load(const json& msg);
};

class Session : public std::enable_shared_from_this<Session> {
  public:
    Session(tcp::socket socket, ControlServer::Impl& server, std::uint64_t id)
        : ws_(std::move(socket)), server_(server), id_(id) {}

    void run() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(beast::bind_front_handler(&Session::on_accept, shared_from_this()));
    }

    /// Thread-safe. Droppable messages (snapshots) are discarded oldest-first
    /// once the client falls `queue_limit` of them behind.
    void send(std::string text, bool droppable) {
        asio::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text), droppable]() mutable {
            self->enqueue(std::move(text), droppable);
        });
    }

    std::uint64_t id() const { return id_; }

  private:
    struct Out {
        std::string text;
        bool droppable;
    };

    void on_accept(beast::error_code ec) {
        if (ec) {
            spdlog::debug("client {}: handshake failed: {}", id_, ec.message());
            return;
        }
        spdlog::info("client {} connected", id_);
        server_.post({Inbound::Kind::Connect, shared_from_this(), {}});
        do_read();
    }

    void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&Session::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            spdlog::info("client {} disconnected: {}", id_, ec.message());
            closed_ = true;
            out_.clear();
            return;
        }
        server_.post({Inbound::Kind::Message, shared_from_this(), beast::buffers_to_string(buffer_.data())});
        buffer_.consume(buffer_.size());
        do_read();
    }

    void enqueue(std::string text, bool droppable) {
        if (closed_) return;
        if (droppable) {
            if (droppable_count_ >= server_.options.queue_limit) {
                // The front entry may be in flight; never touch it.
                for (auto it = out_.begin() + (writing_ ? 1 : 0); it != out_.end(); ++it) {
                    if (it->droppable) {
                        out_.erase(it);
                        --droppable_count_;
                        ++dropped_;
                        break;
                    }
                }
            }
            ++droppable_count_;
        }
        out_.push_back({std::move(text), droppable});
        if (!writing_) do_write();
    }

    void do_write() {
        writing_ = true;
        ws_.text(true);
        ws_.async_write(asio::buffer(out_.front().text),
                        beast::bind_front_handler(&Session::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        writing_ = false;
        if (ec) {
            closed_ = true;
            out_.clear();
            return;
        }
        if (out_.front().droppable) --droppable_count_;
        out_.pop_front();
        if (!out_.empty()) do_write();
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    ControlServer::Impl& server_;
    std::uint64_t id_;
    std::deque<Out> out_;
    std::size_t droppable_count_ = 0;
    std::uint64_t dropped_ = 0;
    bool writing_ = false;
    bool closed_ = false;
};

void ControlServer::Impl::do_accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;  // acceptor closed
        std::make_shared<Session>(std::move(socket), *this, next_session++)->run();
        do_accept();
    });
}

namespace {

json reply_ack(const json& id, std::uint64_t tick) { return {{"type", "ack"}, {"id", id}, {"tick", tick}}; }

json reply_error(const json& id, const std::string& reason) {
    return {{"type", "error"}, {"id", id}, {"reason", reason}};
}

/// Source text of every program's conditions, for activation displays.
json describe(const lang::ProgramLibrary& lib) {
    json out = json::object();
    for (const auto& [name, prog] : lib.programs) {
        json rules = json::array();
        for (const auto& r : prog.rules) {
            rules.push_back({{"condition", lang::pretty(*r.condition)}, {"action", lang::pretty(r.action)}});
        }
        out[name] = {{"kind", "prog"}, {"params", prog.params}, {"rules", rules}};
    }
    for (const auto& [name, tree] : lib.trees) {
        json nodes = json::array();
        for (const auto& n : tree.nodes) {
            json node{{"id", n.id}, {"condition", lang::pretty(*n.condition)}};
            if (!n.is_root()) {
                node["parent"] = n.parent;
                node["action"] = lang::pretty(*n.action_to_parent);
                node["cost"] = n.arc_cost;
            }
            nodes.push_back(node);
        }
        out[name] = {{"kind", "tree"}, {"params", tree.params}, {"nodes", nodes}};
    }
    return out;
}

class ProtocolError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace

void ControlServer::Impl::broadcast_finished(const json& msg) {
    const std::string text = msg.dump();
    for (auto& [_, weak] : clients) {
        if (auto s = weak.lock()) s->send(text, false);
    }
}

void ControlServer::Impl::advance() {
    if (!sim || ended || sim->finished()) throw ProtocolError("simulation is not runnable");
    TraceRecord rec;
    try {
        rec = sim->step();
    } catch (const SimulationError& e) {
        spdlog::warn("simulation stopped at tick {}: {}", e.tick(), e.what());
        ended = true;
        running = false;
        broadcast_finished({{"type", "finished"}, {"reason", "error"}, {"error", e.to_json().at("error")}});
        return;
    }
    json record;
    bool serialized = false;
    for (auto it = subscribers.begin(); it != subscribers.end();) {
        auto s = it->second.session.lock();
        if (!s) {
            it = subscribers.erase(it);
            continue;
        }
        Subscriber& sub = it->second;
        // Records that applied events are never decimated away.
        const bool eventful = !rec.events_applied.empty();
        if (eventful || (rec.tick + 1) % sub.decimation == 0) {
            if (!serialized) {
                record = to_json(rec);
                serialized = true;
            }
            json msg{{"type", "snapshot"}, {"record", record}};
            if (eventful || sub.sent % sub.full_every == 0) msg["world"] = botworld::world_to_json(sim->world());
            ++sub.sent;
            s->send(msg.dump(), true);
        }
        ++it;
    }
    if (sim->finished()) {
        running = false;
        broadcast_finished({{"type", "finished"}, {"reason", "ticks"}, {"tick", sim->tick()}});
    }
}

void ControlServer::Impl::load(const json& msg) {
    Scenario s;
    if (msg.contains("path")) {
        std::filesystem::path p = msg.at("path").get<std::string>();
        s = load_scenario(p.is_absolute() ? p : options.base_dir / p);
    } else if (msg.contains("scenario")) {
        s = scenario_from_json(msg.at("scenario"), options.base_dir);
    } else {
        throw ProtocolError("load needs \"scenario\" or \"path\"");
    }
    if (msg.contains("seed")) s.seed = msg.at("seed").get<std::uint64_t>();
    if (msg.contains("ticks")) s.ticks = msg.at("ticks").get<std::uint64_t>();
    sim.emplace(std::move(s));
    running = false;
    ended = false;
    for (auto& [_, sub] : subscribers) sub.sent = 0;
}

json ControlServer::Impl::dispatch(Session& from, const json& msg) {
    const std::string type = msg.at("type").get<std::string>();
    if (type == "load") {
        load(msg);
    } else if (type == "start") {
        if (!sim) throw ProtocolError("no scenario loaded");
        if (ended || sim->finished()) throw ProtocolError("simulation has finished");
        running = true;
    } else if (type == "pause") {
        running = false;
    } else if (type == "step") {
        if (!sim) throw ProtocolError("no scenario loaded");
        const auto n = msg.value("n", std::int64_t{1});
        if (n < 1) throw ProtocolError("step needs n >= 1");
        for (std::int64_t i = 0; i < n && !ended && !sim->finished(); ++i) advance();
    } else if (type == "set_rate") {
        rate = msg.at("rate").get<double>();
    } else if (type == "inject") {
        if (!sim) throw ProtocolError("no scenario loaded");
        json ev = msg.at("event");
        if (!ev.contains("at_tick")) ev["at_tick"] = sim->tick();
        sim->inject(botworld::event_from_json(ev));
    } else if (type == "subscribe") {
        Subscriber sub;
        sub.decimation = msg.value("decimation", std::uint64_t{1});
        sub.full_every = msg.value("full_every", std::uint64_t{10});
        if (sub.decimation < 1 || sub.full_every < 1) throw ProtocolError("decimation and full_every must be >= 1");
        auto weak = clients.at(&from);
        sub.session = weak;
        subscribers[&from] = sub;
    } else {
        throw ProtocolError("unknown message type '" + type + "'");
    }
    json ack = reply_ack(msg.value("id", json()), sim ? sim->tick() : 0);
    if (type == "load") ack["programs"] = describe(*sim->scenario().library);
    return ack;
}

void ControlServer::Impl::handle(Inbound& in) {
    if (in.kind == Inbound::Kind::Connect) {
        clients[in.session.get()] = in.session;
        return;
    }
    json id;
    json reply;
    try {
        json msg = json::parse(in.text);
        if (!msg.is_object()) throw ProtocolError("message must be a JSON object");
        id = msg.value("id", json());
        reply = dispatch(*in.session, msg);
    } catch (const std::exception& e) {
        spdlog::debug("client {}: {}", in.session->id(), e.what());
        reply = reply_error(id, e.what());
    }
    in.session->send(reply.dump(), false);
}

void ControlServer::Impl::sim_loop() {
    using clock = std::chrono::steady_clock;
    clock::time_point next_tick = clock::now();
    for (;;) {
        std::deque<Inbound> batch;
        {
            std::unique_lock lock(mu);
            auto ready = [&] { return stopping || !inbox.empty(); };
            if (running && rate > 0) {
                cv.wait_until(lock, next_tick, ready);
            } else if (!running) {
                cv.wait(lock, ready);
            }
            if (stopping) return;
            batch.swap(inbox);
        }
        for (auto& in : batch) handle(in);
        // Drop clients whose sessions are gone.
        for (auto it = clients.begin(); it != clients.end();) {
            if (it->second.expired()) {
                subscribers.erase(it->first);
                it = clients.erase(it);
            } else {
                ++it;
            }
        }
        if (!running) {
            next_tick = clock::now();
            continue;
        }
        const clock::time_point now = clock::now();
        if (rate <= 0 || now >= next_tick) {
            try {
                advance();
            } catch (const ProtocolError&) {
                running = false;
            }
            if (rate > 0) {
                next_tick += std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / rate));
                if (next_tick < now) next_tick = now;  // no catch-up bursts after a stall
            }
        }
    }
}

ControlServer::ControlServer(ServerOptions options, std::optional<Scenario> initial) : impl_(std::make_unique<Impl>()) {
    impl_->options = std::move(options);
    impl_->rate = impl_->options.rate;
    if (initial) impl_->sim.emplace(std::move(*initial));
}

ControlServer::~ControlServer() { stop(); }

void ControlServer::start() {
    Impl& s = *impl_;
    tcp::endpoint ep(asio::ip::make_address(s.options.address), s.options.port);
    s.acceptor.open(ep.protocol());
    s.acceptor.set_option(asio::socket_base::reuse_address(true));
    s.acceptor.bind(ep);
    s.acceptor.listen();
    s.do_accept();
    s.started = true;
    s.io_thread = std::thread([&s] { s.ioc.run(); });
    s.sim_thread = std::thread([&s] { s.sim_loop(); });
    spdlog::info("serving on {}:{}", s.options.address, port());
}

void ControlServer::stop() {
    Impl& s = *impl_;
    if (!s.started) return;
    {
        std::lock_guard lock(s.mu);
        s.stopping = true;
    }
    s.cv.notify_one();
    if (s.sim_thread.joinable()) s.sim_thread.join();
    s.ioc.stop();
    if (s.io_thread.joinable()) s.io_thread.join();
    s.started = false;
}

std::uint16_t ControlServer::port() const { return impl_->acceptor.local_endpoint().port(); }

}  // namespace tr::service
