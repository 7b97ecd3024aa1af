// aiops_service: HTTP front end for the agent (chat, trace streams, artifacts).
#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <fstream>
#include <iostream>

#include "aiops/service/service.hpp"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent HTTP service"};
  std::string config_path;
  std::string host;
  int port = -1;
  app.add_option("-c,--config", config_path, "Service YAML config");
  app.add_option("--bind", host, "Bind address (overrides config)");
  app.add_option("--port", port, "Port (overrides config)");
  CLI11_PARSE(app, argc, argv);

  aiops::service::ServiceConfig config;
  std::unique_ptr<aiops::service::AgentService> service;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open " + config_path);
      config = aiops::service::load_service_config(
          std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
    }
    if (!host.empty()) config.host = host;
    if (port >= 0) config.port = port;
    service = std::make_unique<aiops::service::AgentService>(config);
  } catch (const std::exception& e) {
    std::cerr << "aiops_service: " << e.what() << "\n";
    return 2;
  }

  httplib::Server server;
  service->mount(server);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  if (!server.bind_to_port(config.host, config.port)) {
    std::cerr << "aiops_service: cannot bind " << config.host << ":" << config.port << "\n";
    return 1;
  }
  std::cout << "listening on " << config.host << ":" << config.port << "\n" << std::flush;
  server.listen_after_bind();
  service->shutdown();
  return 0;
}
