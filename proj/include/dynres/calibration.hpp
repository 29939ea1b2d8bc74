#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dynres {

// Parse or lookup failure for the key-value config format; the message
// carries "<source>:<line>:" where a location is known.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plain-text `key = value` configuration.
//
// Grammar (UTF-8, line-oriented):
//   line    := blank | comment | entry
//   comment := '#' anything
//   entry   := key '=' number [comment]
//   key     := dotted path of [A-Za-z0-9_] segments
//   number  := decimal integer or floating literal
// Keys must be unique. Blank space around tokens is ignored.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(std::string_view text,
                                       std::string source = "<memory>");

    bool has(const std::string& key) const;
    // Throw ConfigError when the key is missing (or, for integer(), when the
    // stored value is not integral).
    double number(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;

    // All entries whose key starts with `prefix`, as (remainder, value),
    // sorted by key. Used for batch-size tables like "encode.vit_ms.batch.4".
    std::vector<std::pair<std::string, double>> with_prefix(const std::string& prefix) const;

    const std::string& source() const { return source_; }
    std::size_t size() const { return values_.size(); }

private:
    std::map<std::string, double> values_;
    std::string source_;
};

} // namespace dynres
