#include "avm/server.hpp"

#include <atomic>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "avm/image.hpp"
#include "avm/protocol.hpp"

namespace avm::server {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

// The newest frame's PNG, shared by every session.
class FrameCache {
 public:
  FrameCache(int level) : level_(level) {}

  std::shared_ptr<const std::vector<std::uint8_t>> png_for(const std::shared_ptr<const service::PublishedFrame>& f) {
    std::lock_guard lk(mutex_);
    if (f != frame_) {
      frame_ = f;
      png_ = std::make_shared<const std::vector<std::uint8_t>>(encode_png(*f->image, level_));
    }
    return png_;
  }

 private:
  int level_;
  std::mutex mutex_;
  std::shared_ptr<const service::PublishedFrame> frame_;
  std::shared_ptr<const std::vector<std::uint8_t>> png_;
};

class WsSession;

struct Shared {
  service::Pipeline& pipeline;
  ServerOptions options;
  FrameCache cache;
  std::mutex sessions_mutex;
  std::set<std::shared_ptr<WsSession>> sessions;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Shared& shared)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), shared_(shared), session_(shared.pipeline) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->close();
      self->send(self->session_.state_message());
      self->read();
      self->tick();
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
    std::lock_guard lk(shared_.sessions_mutex);
    shared_.sessions.erase(shared_from_this());
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      const auto text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      for (auto& reply : self->session_.handle_text(text)) self->send(std::move(reply));
      self->read();
    });
  }

  void tick() {
    timer_.expires_after(std::chrono::milliseconds(shared_.options.frame_poll_ms));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->push_updates();
      self->tick();
    });
  }

  void push_updates() {
    // Latest-value semantics: skip this tick rather than queue behind a slow client.
    if (queue_.size() > 1) return;
    auto frame = shared_.pipeline.latest_frame();
    if (frame && frame->image && frame != last_frame_) {
      last_frame_ = frame;
      send(session_.frame_message(*frame, *shared_.cache.png_for(frame)));
    }
    const auto now = std::chrono::steady_clock::now();
    if (now - last_state_ >= std::chrono::milliseconds(shared_.options.state_period_ms)) {
      last_state_ = now;
      send(session_.state_message());
    }
  }

  void send(protocol::Envelope env) {
    if (closed_) return;
    queue_.push_back(protocol::serialize(env));
    if (queue_.size() == 1) write();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  asio::steady_timer timer_;
  Shared& shared_;
  protocol::Session session_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  std::shared_ptr<const service::PublishedFrame> last_frame_;
  std::chrono::steady_clock::time_point last_state_ = std::chrono::steady_clock::now();
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Shared& shared) : stream_(std::move(socket)), shared_(shared) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->on_request();
    });
  }

 private:
  void on_request() {
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      auto ws = std::make_shared<WsSession>(stream_.release_socket(), shared_);
      {
        std::lock_guard lk(shared_.sessions_mutex);
        shared_.sessions.insert(ws);
      }
      ws->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    res->set(http::field::content_type, "application/json");
    if (req_.method() != http::verb::get) {
      res->result(http::status::method_not_allowed);
      res->body() = R"({"error":"only GET and WebSocket upgrades are served"})";
    } else {
      res->result(http::status::ok);
      const auto payload = protocol::state_payload(shared_.pipeline.view_state(), shared_.pipeline.stats_report());
      res->body() = nlohmann::json{{"service", "avm"}, {"v", protocol::kVersion}, {"status", payload}}.dump();
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ec;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    });
  }

  beast::tcp_stream stream_;
  Shared& shared_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
  Impl(service::Pipeline& pipeline, ServerOptions options)
      : shared{pipeline, options, FrameCache(options.png_level), {}, {}}, acceptor(ioc) {}

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      std::make_shared<HttpSession>(std::move(socket), shared)->run();
      accept();
    });
  }

  Shared shared;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::thread thread;
  std::atomic<unsigned short> port{0};
  bool started = false;
};

Server::Server(service::Pipeline& pipeline, ServerOptions options)
    : impl_(std::make_unique<Impl>(pipeline, options)) {}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->started) return;
  const tcp::endpoint ep(asio::ip::make_address(impl_->shared.options.address), impl_->shared.options.port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
  impl_->port = impl_->acceptor.local_endpoint().port();
  impl_->accept();
  impl_->started = true;
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::stop() {
  if (!impl_->started) return;
  asio::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    std::set<std::shared_ptr<WsSession>> sessions;
    {
      std::lock_guard lk(impl_->shared.sessions_mutex);
      sessions = impl_->shared.sessions;
    }
    for (const auto& s : sessions) s->close();
    impl_->ioc.stop();
  });
  impl_->thread.join();
  impl_->started = false;
}

unsigned short Server::port() const { return impl_->port; }

std::size_t Server::session_count() const {
  std::lock_guard lk(impl_->shared.sessions_mutex);
  return impl_->shared.sessions.size();
}

}  // namespace avm::server
