// src/service.cpp

// Copyright 2026  The alsed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "alsed/service.hpp"

#include <httplib.h>

#include <cstdlib>

#include "alsed/error.hpp"

namespace alsed {

using json = nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw InputError(std::string("request body is not valid JSON: ") + e.what());
  }
}

double context_param(const httplib::Request& req) {
  if (!req.has_param("context")) return 0.0;
  const std::string v = req.get_param_value("context");
  char* end = nullptr;
  const double c = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') throw InputError("context must be a number");
  return c;
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

/// Maps library errors onto status codes.
httplib::Server::Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const OpenBatchConflict& e) {
      send_json(res, {{"error", e.what()}, {"open_batch", e.batch()}}, 409);
    } catch (const ConflictError& e) {
      send_json(res, {{"error", e.what()}}, 409);
    } catch (const NotFoundError& e) {
      send_json(res, {{"error", e.what()}}, 404);
    } catch (const InputError& e) {
      send_json(res, {{"error", e.what()}}, 400);
    } catch (const json::exception& e) {
      send_json(res, {{"error", e.what()}}, 400);
    } catch (const std::exception& e) {
      send_json(res, {{"error", e.what()}}, 500);
    }
  };
}

}  // namespace

void register_routes(httplib::Server& server, ProjectStore& store) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"ok", true}});
  });
  server.Post("/projects", guarded([&store](const auto& req, auto& res) {
    send_json(res, store.create_project(parse_body(req)), 201);
  }));
  server.Get("/projects", guarded([&store](const auto&, auto& res) {
    send_json(res, store.list_projects());
  }));
  server.Post("/projects/:id/recordings", guarded([&store](const auto& req, auto& res) {
    const auto& pid = req.path_params.at("id");
    const std::string type = req.get_header_value("Content-Type");
    if (type.rfind("audio/", 0) == 0 || type == "application/octet-stream") {
      if (!req.has_param("id")) throw InputError("uploaded audio needs ?id=");
      const auto role = recording_role_from_string(
          req.has_param("role") ? req.get_param_value("role") : std::string("train"));
      send_json(res, store.add_recording_wav(pid, req.get_param_value("id"), role, req.body), 201);
    } else {
      send_json(res, store.add_recordings(pid, parse_body(req)), 201);
    }
  }));
  server.Post("/projects/:id/prepare", guarded([&store](const auto& req, auto& res) {
    send_json(res, store.prepare(req.path_params.at("id")));
  }));
  server.Get("/projects/:id/batch", guarded([&store](const auto& req, auto& res) {
    send_json(res, store.next_batch(req.path_params.at("id")));
  }));
  server.Delete("/projects/:id/batch", guarded([&store](const auto& req, auto& res) {
    send_json(res, store.abandon_batch(req.path_params.at("id")));
  }));
  server.Post("/projects/:id/annotations", guarded([&store](const auto& req, auto& res) {
    send_json(res, store.submit_annotation(req.path_params.at("id"), parse_body(req)));
  }));
  server.Post("/projects/:id/train", guarded([&store](const auto& req, auto& res) {
    send_json(res, store.request_training(req.path_params.at("id")), 202);
  }));
  server.Get("/projects/:id/status", guarded([&store](const auto& req, auto& res) {
    send_json(res, store.status(req.path_params.at("id")));
  }));
  server.Get("/projects/:id/metrics", guarded([&store](const auto& req, auto& res) {
    send_json(res, store.metrics(req.path_params.at("id")));
  }));
  server.Get("/segments/:sid/audio", guarded([&store](const auto& req, auto& res) {
    res.set_content(store.segment_audio(req.path_params.at("sid"), context_param(req)),
                    "audio/wav");
  }));
  server.Get("/segments/:sid/mel", guarded([&store](const auto& req, auto& res) {
    send_json(res, store.segment_mel(req.path_params.at("sid"), context_param(req)));
  }));
}

int serve(ProjectStore& store, const std::string& host, int port,
          const std::function<void(int)>& on_listen) {
  httplib::Server server;
  server.set_payload_max_length(std::size_t{1} << 31);
  register_routes(server, store);
  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot listen on " + host + ":" + std::to_string(port));
  if (on_listen) on_listen(bound);
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace alsed
