// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "synthscan/geometry.hpp"
#include "synthscan/text.hpp"

/// Small helpers shared by the scene and survey XML readers and writers.
namespace synthscan::xml {

using Tree = boost::property_tree::ptree;

inline constexpr std::string_view kDeclaration = "<?xml version=\"1.0\"?>\n";

inline std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

/// ` key="value"` with the value escaped.
inline std::string attr(std::string_view key, std::string_view value) {
    return " " + std::string(key) + "=\"" + escape(value) + "\"";
}

inline std::string attr(std::string_view key, double value) { return attr(key, format_exact(value)); }

/// Parses XML text, reporting syntax errors through `E(element, reason)`.
template <typename E>
Tree parse(std::string_view text) {
    Tree tree;
    std::istringstream in{std::string(text)};
    try {
        boost::property_tree::read_xml(in, tree, boost::property_tree::xml_parser::no_comments);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw E("document", e.message() + " at line " + std::to_string(e.line()));
    }
    return tree;
}

inline std::optional<std::string> find_attr(const Tree& node, const std::string& key) {
    if (auto v = node.get_optional<std::string>("<xmlattr>." + key)) return *v;
    return std::nullopt;
}

template <typename E>
std::string require_attr(const Tree& node, const std::string& element, const std::string& key) {
    auto v = find_attr(node, key);
    if (!v) throw E(element, "missing attribute '" + key + "'");
    return *v;
}

template <typename E>
double to_real(const std::string& text, const std::string& element, const std::string& key) {
    auto v = parse_real(text);
    if (!v || !std::isfinite(*v)) throw E(element, "attribute '" + key + "' is not a number: '" + text + "'");
    return *v;
}

template <typename E>
double require_real(const Tree& node, const std::string& element, const std::string& key) {
    return to_real<E>(require_attr<E>(node, element, key), element, key);
}

template <typename E, typename Int>
Int require_int(const Tree& node, const std::string& element, const std::string& key) {
    const std::string text = require_attr<E>(node, element, key);
    Int value{};
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw E(element, "attribute '" + key + "' is not an integer: '" + text + "'");
    return value;
}

/// "x;y;z" as used by translate filters.
inline std::string format_vec3(const Vec3& v) {
    return format_exact(v.x) + ";" + format_exact(v.y) + ";" + format_exact(v.z);
}

template <typename E>
Vec3 parse_vec3(const std::string& text, const std::string& element) {
    Vec3 v;
    std::size_t start = 0;
    for (int a = 0; a < 3; ++a) {
        const std::size_t sep = text.find(';', start);
        if ((a < 2) == (sep == std::string::npos)) throw E(element, "expected 'x;y;z', got '" + text + "'");
        v[a] = to_real<E>(text.substr(start, sep == std::string::npos ? std::string::npos : sep - start), element,
                          "value");
        start = sep + 1;
    }
    return v;
}

} // namespace synthscan::xml
