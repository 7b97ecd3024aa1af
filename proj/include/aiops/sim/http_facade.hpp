#pragma once

#include <memory>
#include <string>

#include "aiops/sim/cluster.hpp"

namespace aiops::sim {

/// Read-only HTTP view of a SimState:
///   GET /api/v1/label/__name__/values?match[]={label="value"}
///   GET /api/v1/query_range?query=<metric>&start=<s>&end=<s>
///   GET /sim/v1/namespaces/<ns>/{operators,pods,services}
///   GET /healthz
/// Serves on a background thread from construction until stop() or
/// destruction. Throws std::runtime_error when the address cannot be bound.
class HttpFacade {
 public:
  /// port 0 binds an ephemeral port; see port().
  HttpFacade(std::shared_ptr<const SimState> state, const std::string& host, int port);
  ~HttpFacade();
  HttpFacade(const HttpFacade&) = delete;
  HttpFacade& operator=(const HttpFacade&) = delete;

  int port() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace aiops::sim
