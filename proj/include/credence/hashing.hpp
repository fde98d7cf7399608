#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace credence {

std::string sha256_hex(std::string_view data);

// Unicode NFC normalization (ICU). Returns the input unchanged if it is not
// valid UTF-8.
std::string nfc_normalize(const std::string& utf8);

// Deterministic serialization used for cache keys and fingerprints: every
// string (keys and values) NFC-normalized, objects emitted with sorted keys,
// no insignificant whitespace.
std::string canonical_json(const nlohmann::json& value);

// Content hash of (provider id, canonicalized request).
std::string cache_key(std::string_view provider_id, const nlohmann::json& request);

// Short fingerprint (first 12 hex chars of the canonical hash).
std::string fingerprint(const nlohmann::json& value);

}  // namespace credence
