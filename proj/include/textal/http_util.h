// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small helpers shared by the HTTP clients and the control server.

#ifndef TEXTAL_HTTP_UTIL_H_
#define TEXTAL_HTTP_UTIL_H_

#include <chrono>
#include <memory>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "httplib.h"

namespace textal {

struct HttpTarget {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 80;
  std::string path;  // without trailing slash; may be empty
};

// Parses "scheme://host[:port][/path]".
absl::StatusOr<HttpTarget> ParseHttpUrl(const std::string& url);

absl::StatusOr<std::unique_ptr<httplib::Client>> MakeHttpClient(
    const HttpTarget& target, std::chrono::seconds timeout);

// 2xx -> OK; 429 and 5xx -> kUnavailable (retriable); 401/403 ->
// kPermissionDenied; 404 -> kNotFound; other 4xx -> kInvalidArgument.
absl::Status StatusFromHttp(int http_status, const std::string& body);

}  // namespace textal

#endif  // TEXTAL_HTTP_UTIL_H_
