#include "aiops/sim/http_facade.hpp"

#include <httplib.h>

#include <regex>
#include <stdexcept>
#include <thread>

#include "aiops/sim/json.hpp"
#include "aiops/util/text.hpp"

namespace aiops::sim {

namespace {

void reply_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void bad_request(httplib::Response& res, const std::string& message) {
  reply_json(res, {{"status", "error"}, {"errorType", "bad_data"}, {"error", message}}, 400);
}

}  // namespace

struct HttpFacade::Impl {
  std::shared_ptr<const SimState> state;
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

HttpFacade::HttpFacade(std::shared_ptr<const SimState> state, const std::string& host, int port)
    : impl_(std::make_unique<Impl>()) {
  impl_->state = std::move(state);
  auto& srv = impl_->server;
  const auto st = impl_->state;

  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

  srv.Get("/api/v1/label/__name__/values", [st](const httplib::Request& req, httplib::Response& res) {
    static const std::regex matcher(R"re(^\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*"([^"]*)"\s*\}$)re");
    if (!req.has_param("match[]")) return bad_request(res, "missing match[] selector");
    const auto selector = req.get_param_value("match[]");
    std::smatch m;
    if (!std::regex_match(selector, m, matcher)) return bad_request(res, "unsupported selector '" + selector + "'");
    reply_json(res, label_values_response(metric_names(*st, m[1].str(), m[2].str())));
  });

  srv.Get("/api/v1/query_range", [st](const httplib::Request& req, httplib::Response& res) {
    for (const char* p : {"query", "start", "end"}) {
      if (!req.has_param(p)) return bad_request(res, std::string("missing parameter '") + p + "'");
    }
    const auto metric = req.get_param_value("query");
    const auto start = text::parse_double(req.get_param_value("start"));
    const auto end = text::parse_double(req.get_param_value("end"));
    if (!start || !end) return bad_request(res, "start and end must be unix timestamps");
    if (*start > *end) return bad_request(res, "start must not exceed end");
    reply_json(res, query_range_response(metric, range_samples(*st, metric, *start, *end)));
  });

  srv.Get(R"(/sim/v1/namespaces/([^/]+)/(operators|pods|services))",
          [st](const httplib::Request& req, httplib::Response& res) {
            const auto ns = req.matches[1].str();
            const auto kind = req.matches[2].str();
            if (kind == "operators") return reply_json(res, list_operators(*st, ns));
            if (kind == "pods") return reply_json(res, pod_summary(*st, ns));
            reply_json(res, service_summary(*st, ns));
          });

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(nlohmann::json{{"status", "error"}, {"error", "HTTP " + std::to_string(res.status)}}.dump(),
                      "application/json");
    }
  });

  if (port == 0) {
    impl_->port = srv.bind_to_any_port(host);
  } else {
    impl_->port = srv.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->port <= 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  // stop() is a no-op until the accept loop runs, so do not hand out a
  // facade that could be stopped before it started.
  impl_->server.wait_until_ready();
}

HttpFacade::~HttpFacade() { stop(); }

int HttpFacade::port() const { return impl_->port; }

void HttpFacade::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace aiops::sim
