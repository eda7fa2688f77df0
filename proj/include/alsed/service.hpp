// include/alsed/service.hpp

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

// HTTP routes over a ProjectStore.
//
//   POST   /projects                      create, 201
//   GET    /projects                      list
//   POST   /projects/{id}/recordings      JSON registry entries, or WAV bytes
//                                         with ?id=&role=
//   POST   /projects/{id}/prepare
//   GET    /projects/{id}/batch           open or next batch
//   DELETE /projects/{id}/batch           abandon the open batch
//   POST   /projects/{id}/annotations
//   POST   /projects/{id}/train
//   GET    /projects/{id}/status
//   GET    /projects/{id}/metrics
//   GET    /segments/{sid}/audio?context=
//   GET    /segments/{sid}/mel?context=
//
// Errors are {"error": message} with 400 (bad input), 404, 409 (state
// conflict) or 500.

#ifndef ALSED_SERVICE_HPP_
#define ALSED_SERVICE_HPP_

#include <functional>
#include <string>

#include "alsed/project_store.hpp"

namespace httplib {
class Server;
}

namespace alsed {

void register_routes(httplib::Server& server, ProjectStore& store);

/// Serves until the process is stopped. `on_listen` receives the bound port
/// (useful with port 0).
int serve(ProjectStore& store, const std::string& host, int port,
          const std::function<void(int)>& on_listen = {});

}  // namespace alsed

#endif  // ALSED_SERVICE_HPP_
