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

#include "textal/http_util.h"

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/strip.h"

namespace textal {

absl::StatusOr<HttpTarget> ParseHttpUrl(const std::string& url) {
  HttpTarget t;
  absl::string_view rest = url;
  if (absl::ConsumePrefix(&rest, "http://")) {
    t.scheme = "http";
    t.port = 80;
  } else if (absl::ConsumePrefix(&rest, "https://")) {
    t.scheme = "https";
    t.port = 443;
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("URL must start with http:// or https://: ", url));
  }
  const size_t slash = rest.find('/');
  absl::string_view authority = rest.substr(0, slash);
  if (slash != absl::string_view::npos) {
    t.path = std::string(rest.substr(slash));
    while (!t.path.empty() && t.path.back() == '/') t.path.pop_back();
  }
  const size_t colon = authority.rfind(':');
  if (colon != absl::string_view::npos) {
    if (!absl::SimpleAtoi(authority.substr(colon + 1), &t.port)) {
      return absl::InvalidArgumentError(absl::StrCat("bad port in ", url));
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) {
    return absl::InvalidArgumentError(absl::StrCat("missing host in ", url));
  }
  t.host = std::string(authority);
  return t;
}

absl::StatusOr<std::unique_ptr<httplib::Client>> MakeHttpClient(
    const HttpTarget& target, std::chrono::seconds timeout) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (target.scheme == "https") {
    return absl::UnimplementedError("built without TLS support");
  }
#endif
  auto client = std::make_unique<httplib::Client>(
      absl::StrCat(target.scheme, "://", target.host, ":", target.port));
  client->set_connection_timeout(10);
  client->set_read_timeout(timeout.count());
  client->set_write_timeout(timeout.count());
  return client;
}

absl::Status StatusFromHttp(int http_status, const std::string& body) {
  if (http_status >= 200 && http_status < 300) return absl::OkStatus();
  const std::string msg =
      absl::StrCat("HTTP ", http_status, ": ", body.substr(0, 512));
  if (http_status == 429 || http_status >= 500) {
    return absl::UnavailableError(msg);
  }
  if (http_status == 401 || http_status == 403) {
    return absl::PermissionDeniedError(msg);
  }
  if (http_status == 404) return absl::NotFoundError(msg);
  return absl::InvalidArgumentError(msg);
}

}  // namespace textal
