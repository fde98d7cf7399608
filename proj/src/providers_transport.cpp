#include "credence/providers/transport.hpp"

#include <httplib.h>

#include "credence/errors.hpp"

namespace credence {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("malformed provider url: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResponse HttpTransport::post_json(const std::string& url, const HeaderList& headers,
                                      const std::string& body) {
  ParsedUrl parsed = split_url(url);
  httplib::Client client(parsed.origin);
  client.set_connection_timeout(timeout_, 0);
  client.set_read_timeout(timeout_, 0);
  httplib::Headers hl;
  for (const auto& [k, v] : headers) hl.emplace(k, v);
  auto result = client.Post(parsed.path, hl, body, "application/json");
  if (!result)
    throw ProviderError("transport failure for " + url + ": " + httplib::to_string(result.error()),
                        /*retryable=*/true);
  return {result->status, result->body};
}

HttpResponse CountingTransport::post_json(const std::string& url, const HeaderList& headers,
                                          const std::string& body) {
  if (counter_) counter_->fetch_add(1);
  if (!inner_)
    throw ProviderError("network operation attempted with no transport configured (url " + url +
                            ")",
                        /*retryable=*/false);
  return inner_->post_json(url, headers, body);
}

}  // namespace credence
