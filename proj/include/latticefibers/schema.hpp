#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace latfib {

/// Structural validator for the subset of JSON Schema the shipped schema
/// files use: type, required, properties, items, enum. Returns the list of
/// violations (empty means valid).
inline void validate_schema_impl(const nlohmann::json& schema, const nlohmann::json& doc,
                                 const std::string& path, std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const std::string t = schema["type"].get<std::string>();
        const bool ok = (t == "object" && doc.is_object()) || (t == "array" && doc.is_array()) ||
                        (t == "string" && doc.is_string()) || (t == "number" && doc.is_number()) ||
                        (t == "integer" && doc.is_number_integer()) ||
                        (t == "boolean" && doc.is_boolean()) || (t == "null" && doc.is_null());
        if (!ok) {
            errors.push_back(path + ": expected type " + t);
            return;
        }
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& v : schema["enum"]) {
            if (v == doc) { found = true; break; }
        }
        if (!found) errors.push_back(path + ": value not in enum");
    }
    if (schema.contains("required") && doc.is_object()) {
        for (const auto& r : schema["required"]) {
            if (!doc.contains(r.get<std::string>())) {
                errors.push_back(path + ": missing required key '" + r.get<std::string>() + "'");
            }
        }
    }
    if (schema.contains("properties") && doc.is_object()) {
        for (const auto& [key, sub] : schema["properties"].items()) {
            if (doc.contains(key)) validate_schema_impl(sub, doc.at(key), path + "/" + key, errors);
        }
    }
    if (schema.contains("items") && doc.is_array()) {
        std::size_t i = 0;
        for (const auto& el : doc) {
            validate_schema_impl(schema["items"], el, path + "/" + std::to_string(i++), errors);
        }
    }
}

inline std::vector<std::string> validate_schema(const nlohmann::json& schema,
                                                const nlohmann::json& doc) {
    std::vector<std::string> errors;
    validate_schema_impl(schema, doc, "$", errors);
    return errors;
}

}  // namespace latfib
