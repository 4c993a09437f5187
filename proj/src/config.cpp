#include "codonsoup/config.hpp"

#include "codonsoup/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace codonsoup {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view text, std::string_view what)
{
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw Error(Errc::ConfigError, "bad number '" + std::string(text) + "' for " + std::string(what));
    return v;
}

} // namespace

double parse_rate(std::string_view text)
{
    text = trim(text);
    double v = 0.0;
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const double num = parse_real(text.substr(0, slash), "rate numerator");
        const double den = parse_real(text.substr(slash + 1), "rate denominator");
        if (den <= 0.0)
            throw Error(Errc::ConfigError, "rate denominator must be positive in '" + std::string(text) + "'");
        v = num / den;
    } else {
        v = parse_real(text, "rate");
    }
    if (!(v >= 0.0 && v <= 1.0))
        throw Error(Errc::ConfigError, "rate '" + std::string(text) + "' outside [0, 1]");
    return v;
}

std::vector<double> parse_rate_list(std::string_view text)
{
    std::string normalized(text);
    for (char& c : normalized)
        if (c == ',')
            c = ' ';
    std::istringstream in(normalized);
    std::vector<double> out;
    for (std::string word; in >> word;)
        out.push_back(parse_rate(word));
    if (out.empty())
        throw Error(Errc::ConfigError, "empty rate list");
    return out;
}

KeyValues KeyValues::parse(std::string_view text)
{
    KeyValues kv;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty())
            throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": empty key");
        if (!kv.values_.emplace(key, value).second)
            throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    return kv;
}

KeyValues KeyValues::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::ConfigError, "cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    KeyValues kv = parse(buf.str());
    kv.base_dir_ = std::filesystem::path(path).parent_path().string();
    return kv;
}

std::optional<std::string> KeyValues::text(std::string_view key) const
{
    const auto it = values_.find(key);
    if (it == values_.end())
        return std::nullopt;
    used_.insert(it->first);
    return it->second;
}

std::optional<double> KeyValues::rate(std::string_view key) const
{
    const auto t = text(key);
    if (!t)
        return std::nullopt;
    return parse_rate(*t);
}

std::optional<double> KeyValues::real(std::string_view key) const
{
    const auto t = text(key);
    if (!t)
        return std::nullopt;
    return parse_real(*t, key);
}

std::optional<std::uint64_t> KeyValues::count(std::string_view key) const
{
    const auto t = text(key);
    if (!t)
        return std::nullopt;
    const std::string_view s = trim(*t);
    std::uint64_t v = 0;
    int base = 10;
    std::string_view digits = s;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        base = 16;
        digits = s.substr(2);
    }
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
        throw Error(Errc::ConfigError, "bad count '" + std::string(s) + "' for " + std::string(key));
    return v;
}

std::vector<std::string> KeyValues::unused() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (used_.count(k) == 0)
            out.push_back(k);
    return out;
}

} // namespace codonsoup
