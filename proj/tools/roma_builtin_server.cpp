// Serves a builtin synthetic model over the HTTP wire protocol, so the CLI
// and other clients can be exercised against a real endpoint.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>

#include "roma/endpoint.hpp"
#include "roma/wire.hpp"

namespace {
httplib::Server* g_server = nullptr;
void stop(int) {
  if (g_server != nullptr) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serve a builtin model over the wire protocol"};
  std::string model = "hic-normal";
  std::string host = "127.0.0.1";
  int port = 8080;
  app.add_option("--model", model, "Builtin model spec")->capture_default_str();
  app.add_option("--host", host, "Bind address")->capture_default_str();
  app.add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    httplib::Server server;
    roma::wire::mount_model_routes(server, roma::make_builtin_model(model));
    g_server = &server;
    std::signal(SIGINT, stop);
    std::signal(SIGTERM, stop);
    if (port == 0) port = server.bind_to_any_port(host);
    else if (!server.bind_to_port(host, port)) throw roma::ConfigError("cannot bind " + host + ":" + std::to_string(port));
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    server.listen_after_bind();
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
