#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "congr/error.hpp"
#include "congr/judge.hpp"

namespace congr {

HttpReply HttpTransport::post(const std::string& url, const std::string& body,
                              const std::vector<std::pair<std::string, std::string>>& headers) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidArgument, "judge URL lacks a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  std::string origin = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);
  client.set_write_timeout(timeout_seconds_, 0);
  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);

  auto res = client.Post(path, hdrs, body, "application/json");
  if (!res) {
    throw Error(ErrorCode::JudgeTransport, "request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

}  // namespace congr
