/*
 * Copyright (C) 2026 The glyphembed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "glyphembed/iface/service.hpp"

namespace glyphembed::iface {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path static_dir;  // served under "/" when set
};

// HTTP transport for a Service. The service must outlive the server.
class HttpServer {
 public:
  HttpServer(const Service& service, ServerOptions options);
  ~HttpServer();

  // Binds the socket; returns the bound port. Throws InvalidArgument.
  int bind();
  // Blocks serving requests until stop() is called from another thread.
  void listen();
  void stop();
  // Waits until listen() is accepting connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace glyphembed::iface
