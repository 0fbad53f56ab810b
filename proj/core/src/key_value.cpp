#include "semret/key_value.hpp"

#include "semret/corpus.hpp"
#include "semret/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace semret {

std::string normalize_key(std::string_view key)
{
    std::string k(trim(key));
    for (auto& c : k)
        if (c == '-') c = '_';
    return k;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view origin)
{
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        ++line_no;
        pos = end + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto sep = std::min(line.find('='), line.find('\t'));
        if (sep == std::string_view::npos)
            throw Error(std::string(origin) + ":" + std::to_string(line_no) + ": expected key=value");
        cfg.set(normalize_key(line.substr(0, sep)), std::string(trim(line.substr(sep + 1))));
    }
    return cfg;
}

void KeyValueConfig::set(std::string key, std::string value)
{
    entries_[normalize_key(key)] = std::move(value);
}

bool KeyValueConfig::contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::optional<std::string> KeyValueConfig::get(std::string_view key) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(std::string_view key, std::string fallback) const
{
    return get(key).value_or(std::move(fallback));
}

std::uint64_t KeyValueConfig::get_uint(std::string_view key, std::uint64_t fallback) const
{
    const auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size())
        throw Error(origin_ + ": '" + std::string(key) + "' expects a non-negative integer, got '" + *v + "'");
    return out;
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const
{
    const auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const double out = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw Error(origin_ + ": '" + std::string(key) + "' expects a number, got '" + *v + "'");
    }
}

bool KeyValueConfig::get_bool(std::string_view key, bool fallback) const
{
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "1" || *v == "true" || *v == "yes") return true;
    if (*v == "0" || *v == "false" || *v == "no") return false;
    throw Error(origin_ + ": '" + std::string(key) + "' expects a boolean, got '" + *v + "'");
}

std::vector<std::string> KeyValueConfig::get_list(std::string_view key, std::vector<std::string> fallback) const
{
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = v->find(',', start);
        const auto item = trim(std::string_view(*v).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void KeyValueConfig::require_known(const std::vector<std::string_view>& known) const
{
    for (const auto& [k, v] : entries_) {
        bool ok = false;
        for (auto name : known) ok = ok || name == k;
        if (!ok) throw Error(origin_ + ": unknown key '" + k + "'");
    }
}

} // namespace semret
