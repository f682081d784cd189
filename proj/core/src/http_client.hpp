#pragma once

#include <map>
#include <string>
#include <string_view>

namespace citekit::detail {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path prefix without trailing slash
};

/// Throws InvalidConfig on anything that is not http(s)://host[:port][/path].
Url parse_url(std::string_view url);

struct HttpResult {
  bool transport_ok = false;
  int status = 0;
  std::string body;
  std::string error;
};

HttpResult post_json(const Url& url, const std::string& path_suffix, const std::string& body,
                     const std::map<std::string, std::string>& headers, int timeout_seconds);

}  // namespace citekit::detail
