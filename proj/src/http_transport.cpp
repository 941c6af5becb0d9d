#include <chrono>

#include <httplib.h>

#include "cg/backend.hpp"

namespace cg {
namespace {

class HttplibTransport final : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const auto scheme_end = request.url.find("://");
    const auto path_start = request.url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (scheme_end == std::string::npos) throw Error(Errc::kTransportError, "bad URL " + request.url);
    const std::string origin = request.url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

    httplib::Client client(origin);
    const auto secs = std::chrono::duration<double>(request.timeout_seconds);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(secs);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(micros).count(),
                                  micros.count() % 1000000);
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(micros).count(), micros.count() % 1000000);
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(micros).count(),
                             micros.count() % 1000000);

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : request.headers) {
      if (k == "Content-Type") content_type = v;
      else headers.emplace(k, v);
    }
    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(path, headers, request.body, content_type);
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read && std::chrono::steady_clock::now() - start >= secs);
      throw Error(timed_out ? Errc::kTimeout : Errc::kTransportError,
                  httplib::to_string(err) + " (" + request.url + ")");
    }
    return HttpResponse{res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

}  // namespace cg
