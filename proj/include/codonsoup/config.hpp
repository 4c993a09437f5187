#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace codonsoup {

/// Probability literal: a decimal number or `1/N`. Throws ConfigError.
double parse_rate(std::string_view text);

/// Whitespace- or comma-separated list of rate literals.
std::vector<double> parse_rate_list(std::string_view text);

/// `key = value` lines; `#` starts a comment. Keys are unique.
class KeyValues {
public:
    static KeyValues parse(std::string_view text);
    static KeyValues load(const std::string& path);

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    bool contains(std::string_view key) const { return values_.find(key) != values_.end(); }

    std::optional<std::string> text(std::string_view key) const;
    std::optional<double> rate(std::string_view key) const;
    std::optional<double> real(std::string_view key) const;
    std::optional<std::uint64_t> count(std::string_view key) const;

    /// Keys never read through the accessors above.
    std::vector<std::string> unused() const;

    /// Directory of the file the values came from, for resolving relative paths.
    const std::string& base_dir() const noexcept { return base_dir_; }

private:
    std::map<std::string, std::string, std::less<>> values_;
    mutable std::set<std::string, std::less<>> used_;
    std::string base_dir_;
};

} // namespace codonsoup
