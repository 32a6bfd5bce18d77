#pragma once

// Shared helpers for reading agent replies against their JSON contracts.

#include <string>
#include <string_view>

#include "datavideo/core_model.hpp"
#include "datavideo/error.hpp"

namespace datavideo::detail {

[[noreturn]] inline void schema_error(std::string_view key, std::string_view what) {
    throw Error(Errc::schema_error, "\"" + std::string(key) + "\": " + std::string(what));
}

inline const Json& require_key(const Json& obj, std::string_view key, std::string_view where = {}) {
    if (!obj.is_object()) schema_error(where.empty() ? key : where, "expected a JSON object");
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) schema_error(key, "missing key" + (where.empty() ? std::string{} : " in " + std::string(where)));
    return *it;
}

inline std::string require_string(const Json& obj, std::string_view key, std::string_view where = {}) {
    const Json& v = require_key(obj, key, where);
    if (!v.is_string()) schema_error(key, "value must be a string");
    return v.get<std::string>();
}

inline std::string optional_string(const Json& obj, std::string_view key) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) schema_error(key, "value must be a string");
    return it->get<std::string>();
}

inline const Json& require_array(const Json& obj, std::string_view key, std::string_view where = {}) {
    const Json& v = require_key(obj, key, where);
    if (!v.is_array()) schema_error(key, "value must be a list");
    return v;
}

}  // namespace datavideo::detail
