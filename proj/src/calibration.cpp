#include "dynres/calibration.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dynres {

namespace {

std::string_view strip(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

bool valid_key(std::string_view key) {
    if (key.empty() || key.front() == '.' || key.back() == '.') return false;
    bool prev_dot = false;
    for (char ch : key) {
        if (ch == '.') {
            if (prev_dot) return false;
            prev_dot = true;
        } else if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
            prev_dot = false;
        } else {
            return false;
        }
    }
    return true;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
}

} // namespace

KeyValueConfig KeyValueConfig::parse_string(std::string_view text, std::string source) {
    KeyValueConfig config;
    config.source_ = std::move(source);

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = strip(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(config.source_, line_no, "expected `key = value`");
        }
        const std::string key{strip(line.substr(0, eq))};
        const std::string_view value = strip(line.substr(eq + 1));
        if (!valid_key(key)) {
            fail(config.source_, line_no, "invalid key \"" + key + "\"");
        }
        if (value.empty()) {
            fail(config.source_, line_no, "missing value for \"" + key + "\"");
        }

        double parsed = 0.0;
        const auto [end, ec] =
            std::from_chars(value.data(), value.data() + value.size(), parsed);
        if (ec != std::errc{} || end != value.data() + value.size()) {
            fail(config.source_, line_no,
                 "value \"" + std::string(value) + "\" is not a number");
        }
        if (!config.values_.emplace(key, parsed).second) {
            fail(config.source_, line_no, "duplicate key \"" + key + "\"");
        }
    }
    return config;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(path + ": cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

bool KeyValueConfig::has(const std::string& key) const {
    return values_.count(key) != 0;
}

double KeyValueConfig::number(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError(source_ + ": missing key \"" + key + "\"");
    }
    return it->second;
}

std::int64_t KeyValueConfig::integer(const std::string& key) const {
    const double value = number(key);
    const double rounded = std::nearbyint(value);
    if (value != rounded || std::abs(value) > 0x1.0p53) {
        throw ConfigError(source_ + ": key \"" + key + "\" is not an integer");
    }
    return std::int64_t(rounded);
}

double KeyValueConfig::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::int64_t KeyValueConfig::integer_or(const std::string& key,
                                        std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::vector<std::pair<std::string, double>>
KeyValueConfig::with_prefix(const std::string& prefix) const {
    std::vector<std::pair<std::string, double>> out;
    for (auto it = values_.lower_bound(prefix); it != values_.end(); ++it) {
        if (it->first.compare(0, prefix.size(), prefix) != 0) break;
        out.emplace_back(it->first.substr(prefix.size()), it->second);
    }
    return out;
}

} // namespace dynres
