#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semret {

/// Flat `key=value` (or `key<TAB>value`) configuration. Blank lines and
/// lines starting with '#' are ignored; keys are case-sensitive and
/// dashes are read as underscores.
class KeyValueConfig {
public:
    static KeyValueConfig load(const std::filesystem::path& path);
    static KeyValueConfig parse(std::string_view text, std::string_view origin = "<string>");

    void set(std::string key, std::string value);
    bool contains(std::string_view key) const;
    std::optional<std::string> get(std::string_view key) const;

    std::string get_string(std::string_view key, std::string fallback) const;
    std::uint64_t get_uint(std::string_view key, std::uint64_t fallback) const;
    double get_double(std::string_view key, double fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;
    std::vector<std::string> get_list(std::string_view key, std::vector<std::string> fallback) const;

    /// Throws if any key is not in `known`.
    void require_known(const std::vector<std::string_view>& known) const;

    const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

private:
    std::map<std::string, std::string, std::less<>> entries_;
    std::string origin_;
};

std::string normalize_key(std::string_view key);

} // namespace semret
