#pragma once

#include "revsmell/error.hpp"

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

namespace revsmell::detail {

using nlohmann::json;

inline Error schema_error(std::size_t line_no, std::string_view field, std::string_view why) {
    return Error(Errc::SchemaViolation, "line " + std::to_string(line_no) + ", field '" +
                                            std::string(field) + "': " + std::string(why));
}

/// Strict reader over one JSON object record; every accessor names the
/// offending line and field on failure.
class RecordReader {
public:
    RecordReader(const json& obj, std::size_t line_no) : obj_(obj), line_(line_no) {
        if (!obj_.is_object()) throw schema_error(line_, "<record>", "expected a JSON object");
    }

    void allow_only(std::initializer_list<std::string_view> keys) const {
        for (const auto& [key, _] : obj_.items()) {
            bool known = false;
            for (auto k : keys) known = known || k == key;
            if (!known) throw schema_error(line_, key, "unknown field");
        }
    }

    bool has(std::string_view key) const {
        const auto it = obj_.find(key);
        return it != obj_.end() && !it->is_null();
    }

    const json& at(std::string_view key) const {
        const auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) throw schema_error(line_, key, "missing");
        return *it;
    }

    std::string string(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_string()) throw schema_error(line_, key, "expected a string");
        return v.get<std::string>();
    }

    std::string nonempty_string(std::string_view key) const {
        auto s = string(key);
        if (s.empty()) throw schema_error(line_, key, "must be non-empty");
        return s;
    }

    std::uint64_t uint(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_number_unsigned()) throw schema_error(line_, key, "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    unsigned positive(std::string_view key) const {
        const auto v = uint(key);
        if (v == 0 || v > 0xFFFFFFFFu) throw schema_error(line_, key, "expected a 1-based line number");
        return static_cast<unsigned>(v);
    }

    bool boolean(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_boolean()) throw schema_error(line_, key, "expected a boolean");
        return v.get<bool>();
    }

    std::size_t line() const noexcept { return line_; }

private:
    const json& obj_;
    std::size_t line_;
};

inline json parse_line(std::string_view text, std::size_t line_no) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw schema_error(line_no, "<json>", e.what());
    }
}

/// Canonical compact form (std::map keeps keys sorted).
inline std::string canonical(const json& j) {
    try {
        return j.dump();
    } catch (const json::type_error& e) {
        throw Error(Errc::SchemaViolation, std::string("cannot serialize record: ") + e.what());
    }
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        ++line_no;
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(line, line_no);
        pos = nl + 1;
    }
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace revsmell::detail
