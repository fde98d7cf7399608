#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace credence {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HeaderList = std::vector<std::pair<std::string, std::string>>;

class Transport {
 public:
  virtual ~Transport() = default;
  // Throws ProviderError(retryable=true) on connection-level failure.
  virtual HttpResponse post_json(const std::string& url, const HeaderList& headers,
                                 const std::string& body) = 0;
};

// cpp-httplib backed transport.
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(int timeout_seconds = 60) : timeout_(timeout_seconds) {}
  HttpResponse post_json(const std::string& url, const HeaderList& headers,
                         const std::string& body) override;

 private:
  int timeout_;
};

// Wraps another transport and counts operations; with a null inner transport
// any call aborts the run, which is how strict-replay tests pin "zero network
// operations".
class CountingTransport final : public Transport {
 public:
  CountingTransport(std::shared_ptr<Transport> inner, std::shared_ptr<std::atomic<long>> counter)
      : inner_(std::move(inner)), counter_(std::move(counter)) {}
  HttpResponse post_json(const std::string& url, const HeaderList& headers,
                         const std::string& body) override;

 private:
  std::shared_ptr<Transport> inner_;
  std::shared_ptr<std::atomic<long>> counter_;
};

}  // namespace credence
