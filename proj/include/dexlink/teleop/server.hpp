#pragma once

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "dexlink/error.hpp"

namespace dexlink::teleop {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

/// WebSocket fan-out service. All socket work runs on one I/O thread;
/// publish() only posts to it, so the caller never waits on the network.
/// Each client has a bounded outbound queue that drops its oldest unsent
/// message when full.
class TelemetryServer {
 public:
  /// Produces the reply to one inbound text message (empty = no reply).
  /// Runs on the I/O thread.
  using Handler = std::function<std::string(std::string_view)>;

  static constexpr std::size_t kMaxQueuedMessages = 64;
  static constexpr std::size_t kMaxInboundBytes = 1 << 16;

  TelemetryServer(const std::string& address, unsigned short port, Handler handler)
      : handler_(std::move(handler)), acceptor_(ioc_) {
    try {
      const tcp::endpoint ep(net::ip::make_address(address), port);
      acceptor_.open(ep.protocol());
      acceptor_.set_option(net::socket_base::reuse_address(true));
      acceptor_.bind(ep);
      acceptor_.listen(net::socket_base::max_listen_connections);
    } catch (const boost::system::system_error& e) {
      throw BindError("cannot listen on " + address + ":" + std::to_string(port) + ": " + e.what());
    }
    port_ = acceptor_.local_endpoint().port();
    accept();
    io_thread_ = std::thread([this] { ioc_.run(); });
  }

  ~TelemetryServer() { stop(); }
  TelemetryServer(const TelemetryServer&) = delete;
  TelemetryServer& operator=(const TelemetryServer&) = delete;

  unsigned short port() const { return port_; }
  std::size_t client_count() const { return clients_.load(); }
  std::uint64_t dropped_messages() const { return dropped_.load(); }

  void publish(std::string message) {
    auto shared = std::make_shared<const std::string>(std::move(message));
    net::post(ioc_, [this, shared] {
      for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (auto s = it->lock()) {
          s->send(shared);
          ++it;
        } else {
          it = sessions_.erase(it);
        }
      }
    });
  }

  void stop() {
    if (stopped_.exchange(true)) return;
    net::post(ioc_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
      for (auto& w : sessions_) {
        if (auto s = w.lock()) s->close();
      }
    });
    // Give sessions a moment to send close frames, then tear down.
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    ioc_.stop();
    if (io_thread_.joinable()) io_thread_.join();
  }

 private:
  class Session : public std::enable_shared_from_this<Session> {
   public:
    Session(tcp::socket socket, TelemetryServer& server) : ws_(std::move(socket)), server_(server) {}

    void start() {
      ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws_.read_message_max(kMaxInboundBytes);
      ws_.async_accept(beast::bind_front_handler(&Session::on_accept, shared_from_this()));
    }

    void send(std::shared_ptr<const std::string> msg) {
      if (!open_) return;
      if (queue_.size() >= kMaxQueuedMessages) {
        // The front message may be in flight.
        queue_.erase(queue_.begin() + (writing_ ? 1 : 0));
        ++server_.dropped_;
      }
      queue_.push_back(std::move(msg));
      if (!writing_) write_next();
    }

    void close() {
      if (!open_) return;
      open_ = false;
      ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
    }

   private:
    void on_accept(beast::error_code ec) {
      if (ec) return;
      open_ = true;
      ++server_.clients_;
      server_.sessions_.push_back(weak_from_this());
      read_next();
    }

    void read_next() {
      ws_.async_read(buffer_, beast::bind_front_handler(&Session::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
      if (ec) {
        finish();
        return;
      }
      const std::string text = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      std::string reply;
      try {
        reply = server_.handler_(text);
      } catch (const std::exception&) {
        reply = R"({"type":"error","reason":"internal error"})";
      }
      if (!reply.empty()) send(std::make_shared<const std::string>(std::move(reply)));
      read_next();
    }

    void write_next() {
      writing_ = true;
      ws_.text(true);
      ws_.async_write(net::buffer(*queue_.front()), beast::bind_front_handler(&Session::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
      if (ec) {
        writing_ = false;
        finish();
        return;
      }
      queue_.pop_front();
      if (!queue_.empty() && open_) write_next();
      else writing_ = false;
    }

    void finish() {
      if (counted_) return;
      counted_ = true;
      open_ = false;
      queue_.clear();
      --server_.clients_;
    }

    websocket::stream<beast::tcp_stream> ws_;
    TelemetryServer& server_;
    beast::flat_buffer buffer_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    bool writing_ = false;
    bool open_ = false;
    bool counted_ = false;
  };

  void accept() {
    acceptor_.async_accept(net::make_strand(ioc_), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Session>(std::move(socket), *this)->start();
      accept();
    });
  }

  Handler handler_;
  net::io_context ioc_;
  tcp::acceptor acceptor_;
  std::vector<std::weak_ptr<Session>> sessions_;  // I/O thread only
  std::atomic<std::size_t> clients_{0};
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<bool> stopped_{false};
  unsigned short port_ = 0;
  std::thread io_thread_;
};

}  // namespace dexlink::teleop
