#include "credence/hashing.hpp"

#include <openssl/evp.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <array>
#include <vector>

namespace credence {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string nfc_normalize(const std::string& utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const UNormalizer2* nfc = unorm2_getNFCInstance(&status);
  if (U_FAILURE(status)) return utf8;

  // UTF-8 -> UTF-16
  int32_t u16_len = 0;
  status = U_ZERO_ERROR;
  u_strFromUTF8(nullptr, 0, &u16_len, utf8.data(), static_cast<int32_t>(utf8.size()), &status);
  if (status != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(status)) return utf8;
  std::vector<UChar> u16(static_cast<size_t>(u16_len) + 1);
  status = U_ZERO_ERROR;
  u_strFromUTF8(u16.data(), u16_len + 1, nullptr, utf8.data(),
                static_cast<int32_t>(utf8.size()), &status);
  if (U_FAILURE(status)) return utf8;

  // Normalize
  status = U_ZERO_ERROR;
  int32_t norm_len = unorm2_normalize(nfc, u16.data(), u16_len, nullptr, 0, &status);
  if (status != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(status)) return utf8;
  std::vector<UChar> normed(static_cast<size_t>(norm_len) + 1);
  status = U_ZERO_ERROR;
  unorm2_normalize(nfc, u16.data(), u16_len, normed.data(), norm_len + 1, &status);
  if (U_FAILURE(status)) return utf8;

  // UTF-16 -> UTF-8
  int32_t out_len = 0;
  status = U_ZERO_ERROR;
  u_strToUTF8(nullptr, 0, &out_len, normed.data(), norm_len, &status);
  if (status != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(status)) return utf8;
  std::string out(static_cast<size_t>(out_len), '\0');
  status = U_ZERO_ERROR;
  u_strToUTF8(out.data(), out_len + 1, nullptr, normed.data(), norm_len, &status);
  if (U_FAILURE(status)) return utf8;
  return out;
}

namespace {

nlohmann::json nfc_walk(const nlohmann::json& v) {
  using nlohmann::json;
  switch (v.type()) {
    case json::value_t::string:
      return nfc_normalize(v.get<std::string>());
    case json::value_t::array: {
      json out = json::array();
      for (const auto& item : v) out.push_back(nfc_walk(item));
      return out;
    }
    case json::value_t::object: {
      json out = json::object();
      for (auto it = v.begin(); it != v.end(); ++it)
        out[nfc_normalize(it.key())] = nfc_walk(it.value());
      return out;
    }
    default:
      return v;
  }
}

}  // namespace

std::string canonical_json(const nlohmann::json& value) {
  // nlohmann::json objects are backed by std::map, so dump() already emits
  // sorted keys; the walk adds NFC normalization of all strings.
  return nfc_walk(value).dump();
}

std::string cache_key(std::string_view provider_id, const nlohmann::json& request) {
  return sha256_hex(nfc_normalize(std::string(provider_id)) + "\n" + canonical_json(request));
}

std::string fingerprint(const nlohmann::json& value) {
  return sha256_hex(canonical_json(value)).substr(0, 12);
}

}  // namespace credence
