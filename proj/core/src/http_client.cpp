#include "http_client.hpp"

#include <httplib.h>

#include "citekit/error.hpp"

namespace citekit::detail {

Url parse_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorKind::InvalidConfig, "URL '" + std::string(url) + "' has no scheme");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::InvalidConfig, "unsupported URL scheme '" + std::string(scheme) + "'");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") {
    throw Error(ErrorKind::InvalidConfig, "https requires a build with OpenSSL support");
  }
#endif
  const auto rest = url.substr(scheme_end + 3);
  const auto slash = rest.find('/');
  Url out;
  out.origin = std::string(url.substr(0, scheme_end + 3)) + std::string(rest.substr(0, slash));
  if (slash != std::string_view::npos) out.path = std::string(rest.substr(slash));
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  if (rest.substr(0, slash).empty()) {
    throw Error(ErrorKind::InvalidConfig, "URL '" + std::string(url) + "' has no host");
  }
  return out;
}

HttpResult post_json(const Url& url, const std::string& path_suffix, const std::string& body,
                     const std::map<std::string, std::string>& headers, int timeout_seconds) {
  httplib::Client client(url.origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);

  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);

  HttpResult result;
  auto res = client.Post(url.path + path_suffix, hdrs, body, "application/json");
  if (!res) {
    result.error = httplib::to_string(res.error());
    return result;
  }
  result.transport_ok = true;
  result.status = res->status;
  result.body = res->body;
  return result;
}

}  // namespace citekit::detail
