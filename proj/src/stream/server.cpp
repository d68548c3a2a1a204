#include "ua/stream/server.hpp"

#include <charconv>
#include <deque>
#include <fstream>
#include <list>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ua/common/errors.hpp"

namespace ua {
namespace {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, std::shared_ptr<const StreamResources> res)
      : ws_(std::move(socket)), res_(std::move(res)) {}

  void run(http::request<http::string_body> req) {
    ws_.text(true);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->shutdown();
      self->open();
    });
  }

  // Joins the connection's threads. Called on the network thread or after it stopped.
  void shutdown() { conn_.reset(); }

 private:
  void open() {
    std::weak_ptr<WsSession> weak = weak_from_this();
    net::any_io_executor ex = ws_.get_executor();
    conn_ = std::make_unique<ServerConnection>(res_, [weak, ex](std::string text) {
      net::post(ex, [weak, text = std::move(text)]() mutable {
        if (auto self = weak.lock()) self->enqueue(std::move(text));
      });
    });
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        if (ec != websocket::error::closed) spdlog::debug("websocket read: {}", ec.message());
        return self->shutdown();
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      if (self->conn_) self->conn_->on_text(text);
      self->read();
    });
  }

  void enqueue(std::string text) {
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) write();
  }

  void write() {
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        spdlog::debug("websocket write: {}", ec.message());
                        self->outbox_.clear();
                        return;
                      }
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) self->write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<const StreamResources> res_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  std::unique_ptr<ServerConnection> conn_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  using Upgrade = std::function<void(tcp::socket, http::request<http::string_body>)>;

  HttpSession(tcp::socket socket, std::optional<std::filesystem::path> console, Upgrade upgrade)
      : stream_(std::move(socket)), console_(std::move(console)), upgrade_(std::move(upgrade)) {}

  void run() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->dispatch();
                     });
  }

 private:
  void dispatch() {
    if (websocket::is_upgrade(request_)) {
      stream_.expires_never();
      upgrade_(stream_.release_socket(), std::move(request_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(respond());
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec || !res->keep_alive()) {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                          return;
                        }
                        self->run();
                      });
  }

  http::response<http::string_body> respond() const {
    auto reply = [&](http::status status, std::string body, std::string_view type) {
      http::response<http::string_body> res{status, request_.version()};
      res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
      res.keep_alive(request_.keep_alive());
      res.body() = std::move(body);
      res.prepare_payload();
      return res;
    };
    if (!console_) return reply(http::status::not_found, "no console\n", "text/plain");
    if (request_.method() != http::verb::get)
      return reply(http::status::bad_request, "GET only\n", "text/plain");
    std::string target(request_.target());
    target = target.substr(0, target.find('?'));
    if (target.empty() || target.front() != '/' || target.find("..") != std::string::npos)
      return reply(http::status::bad_request, "bad path\n", "text/plain");
    if (target.back() == '/') target += "index.html";
    const std::filesystem::path file = *console_ / target.substr(1);
    std::ifstream in(file, std::ios::binary);
    if (!std::filesystem::is_regular_file(file) || !in)
      return reply(http::status::not_found, "not found\n", "text/plain");
    std::ostringstream body;
    body << in.rdbuf();
    return reply(http::status::ok, body.str(), mime_type(file));
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  std::optional<std::filesystem::path> console_;
  Upgrade upgrade_;
};

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    throw InputError(fmt::format("endpoint '{}' is not host:port", text));
  const std::string_view port = text.substr(colon + 1);
  unsigned value = 0;
  auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || end != port.data() + port.size() || value > 65535)
    throw InputError(fmt::format("bad port in '{}'", text));
  return {std::string(text.substr(0, colon)), static_cast<unsigned short>(value)};
}

std::string_view mime_type(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".wasm") return "application/wasm";
  if (ext == ".txt" || ext == ".model") return "text/plain";
  return "application/octet-stream";
}

struct StreamServer::Impl {
  std::shared_ptr<const StreamResources> resources;
  ServerOptions options;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread thread;
  std::list<std::weak_ptr<WsSession>> sessions;  // network thread only
  bool running = false;

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket s) {
      if (ec) return;
      std::make_shared<HttpSession>(
          std::move(s), options.console_dir,
          [this](tcp::socket sock, http::request<http::string_body> req) {
            auto ws = std::make_shared<WsSession>(std::move(sock), resources);
            sessions.remove_if([](const auto& w) { return w.expired(); });
            sessions.push_back(ws);
            ws->run(std::move(req));
          })
          ->run();
      accept();
    });
  }
};

StreamServer::StreamServer(std::shared_ptr<const StreamResources> resources,
                           ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!resources) throw ConfigError("server needs stream resources");
  resources->validate();
  if (options.console_dir && !std::filesystem::is_directory(*options.console_dir))
    throw ConfigError(fmt::format("console directory {} not found", options.console_dir->string()));
  impl_->resources = std::move(resources);
  impl_->options = std::move(options);
}

StreamServer::~StreamServer() { stop(); }

void StreamServer::start() {
  Impl& s = *impl_;
  if (s.running) return;
  beast::error_code ec;
  const auto address = net::ip::make_address(s.options.bind.host, ec);
  if (ec) throw InputError(fmt::format("bad bind address '{}'", s.options.bind.host));
  const tcp::endpoint ep(address, s.options.bind.port);
  s.acceptor.open(ep.protocol(), ec);
  if (!ec) s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor.bind(ep, ec);
  if (!ec) s.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw InputError(fmt::format("cannot listen on {}:{}: {}", s.options.bind.host,
                                       s.options.bind.port, ec.message()));
  s.accept();
  s.running = true;
  s.thread = std::thread([&s] { s.ioc.run(); });
  spdlog::info("serving on {}:{}", s.options.bind.host, port());
}

void StreamServer::stop() {
  Impl& s = *impl_;
  if (!s.running) return;
  s.running = false;
  s.ioc.stop();
  s.thread.join();
  for (auto& w : s.sessions)
    if (auto ws = w.lock()) ws->shutdown();
  s.sessions.clear();
  beast::error_code ignored;
  s.acceptor.close(ignored);
}

unsigned short StreamServer::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? 0 : ep.port();
}

}  // namespace ua
