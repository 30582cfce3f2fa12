#pragma once

#include <boost/property_tree/ptree.hpp>
#include <string>

#include "cuspscale/geometry.hpp"

namespace cuspscale {

// ptree's get(key, default) falls back to the default on malformed values; reject them instead.
template <class T>
T ini_get(const boost::property_tree::ptree& sec, const std::string& key, const T& fallback) {
    const auto child = sec.get_child_optional(key);
    if (!child) return fallback;
    const auto v = child->get_value_optional<T>();
    if (!v) throw ConfigError("invalid value for '" + key + "': '" + child->data() + "'");
    return *v;
}

}  // namespace cuspscale
