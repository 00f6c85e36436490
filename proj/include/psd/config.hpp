#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psd/errors.hpp"

namespace psd {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kConfigFormat = "psd-config/1";
inline constexpr const char* kManifestFormat = "psd-manifest/1";

/// Flat "dotted.key = value" configuration text. Lines starting with '#'
/// and blank lines are ignored; later keys override earlier ones.
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::filesystem::path& path);
    static KeyValueConfig parse_text(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;  // comma separated
    /// semicolon-separated records of comma-separated numbers
    std::vector<std::vector<double>> get_records(const std::string& key) const;

    /// Canonical text: sorted "key = value" lines. Basis of the config hash.
    std::string canonical() const;
    /// FNV-1a hash of the canonical text, hex encoded.
    std::string hash() const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

  private:
    std::map<std::string, std::string> kv_;
};

}  // namespace psd
