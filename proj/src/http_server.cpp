#include <httplib.h>

#include "therasim/error.hpp"
#include "therasim/service.hpp"

namespace therasim {

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(SessionService& service, const std::optional<std::filesystem::path>& static_dir)
    : impl_(std::make_unique<Impl>()) {
  auto& server = impl_->server;
  if (static_dir && !server.set_mount_point("/", static_dir->string())) {
    fail(ErrorCode::kIo, "static dir not found: " + static_dir->string());
  }
  auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto out = service.handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, out.content_type.c_str());
  };
  server.Get(R"(/api/.*)", dispatch);
  server.Post(R"(/api/.*)", dispatch);
  server.Delete(R"(/api/.*)", dispatch);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host.c_str())
                              : (impl_->server.bind_to_port(host.c_str(), port) ? port : -1);
  if (bound <= 0) fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void serve_http(SessionService& service, const std::string& host, int port,
                const std::optional<std::filesystem::path>& static_dir) {
  HttpServer server(service, static_dir);
  server.bind(host, port);
  server.listen();
}

}  // namespace therasim
