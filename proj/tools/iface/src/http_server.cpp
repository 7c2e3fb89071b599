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

#include "glyphembed/iface/http_server.hpp"

#include <httplib.h>

namespace glyphembed::iface {

struct HttpServer::Impl {
  const Service& service;
  ServerOptions options;
  httplib::Server server;

  Impl(const Service& s, ServerOptions o) : service(s), options(std::move(o)) {}
};

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

std::optional<std::string_view> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.params.find(key)->second;
}

}  // namespace

HttpServer::HttpServer(const Service& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto& srv = impl_->server;
  const Service& svc = impl_->service;
  // Room for multipart framing; the service enforces the limit on the upload itself.
  srv.set_payload_max_length(kMaxUploadBytes + (64 << 10));

  srv.Get("/api/health", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.health()); });
  srv.Get("/api/fonts", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.fonts()); });
  srv.Get("/api/map", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.map()); });
  srv.Get(R"(/api/glyph/([^/]+)/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.glyph(req.matches[1].str(), req.matches[2].str()));
  });
  srv.Get(R"(/api/preview/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.preview(req.matches[1].str()));
  });
  srv.Post("/api/retrieve", [&svc](const httplib::Request& req, httplib::Response& res) {
    RetrieveBody body;
    if (req.is_multipart_form_data()) {
      if (req.has_file("image")) {
        body.kind = RetrieveBody::Kind::Image;
        body.bytes = req.get_file_value("image").content;
      }
    } else if (!req.body.empty()) {
      body.kind = RetrieveBody::Kind::Json;
      body.bytes = req.body;
    }
    send(res, svc.retrieve(body, param(req, "k"), param(req, "mode")));
  });

  if (!impl_->options.static_dir.empty()) {
    if (!srv.set_mount_point("/", impl_->options.static_dir.string())) {
      throw Error(ErrorCode::InvalidArgument, "static directory " + impl_->options.static_dir.string() +
                                                  " does not exist");
    }
  }

  // Anything that reached here without a body (unknown route, 413 from the
  // payload limit, bad method) gets the ApiError schema.
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    switch (res.status) {
      case 404: send(res, api_error(404, "NotFound", "no such endpoint")); break;
      case 413: send(res, api_error(413, "PayloadTooLarge", "request body exceeds 1 MiB")); break;
      case 400: send(res, api_error(400, "BadRequest", "malformed request")); break;
      default: send(res, api_error(res.status, "HttpError", httplib::status_message(res.status))); break;
    }
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    send(res, api_error(500, "Internal", "internal error"));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& o = impl_->options;
  int port = 0;
  if (o.port == 0) {
    port = impl_->server.bind_to_any_port(o.host);
  } else if (impl_->server.bind_to_port(o.host, o.port)) {
    port = o.port;
  }
  if (port <= 0) throw Error(ErrorCode::InvalidArgument, "cannot bind " + o.host + ":" + std::to_string(o.port));
  o.port = port;
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace glyphembed::iface
