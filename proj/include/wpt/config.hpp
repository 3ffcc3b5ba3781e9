// SPDX-License-Identifier: Apache-2.0
#pragma once

/// JSON configuration for power delay profiles and harvester models.
///
/// PDP file:
///   { "label": "...", "delays_ns": [0, 10, ...], "powers_db": [0, -1, ...],
///     "rx_power_dbm": -12, "departure_angles_rad": [null, 1.2, ...] }
/// Harvester block:
///   { "i_s": 5e-6, "n": 1.05, "v_t": 0.02585, "a": 0, "r_ant": 50 }
///   or { "k2": 0.0034, "k4": 0.3829, "r_ant": 50 }

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "channel.hpp"
#include "error.hpp"
#include "harvester.hpp"

namespace wpt {

using json = nlohmann::json;

namespace detail {

template <typename T>
T get_field(const json& j, const char* key, const std::string& where)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw invalid_input(where + ": field '" + key + "': " + e.what());
    }
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return get_field<T>(j, key, where);
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where)
{
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            ok = ok || key == k;
        require(ok, where + ": unknown field '" + key + "'");
    }
}

} // namespace detail

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    require(in.good(), "cannot open '" + path + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw invalid_input(path + ": " + e.what());
    }
}

struct PdpConfig {
    PowerDelayProfile profile = PowerDelayProfile::model_b_substitute();
    double rx_power_dbm = -12.0; // mean received power E{y^2} for the configured transmit power
};

inline PdpConfig parse_pdp_config(const json& j, const std::string& where = "pdp")
{
    require(j.is_object(), where + ": expected an object");
    detail::reject_unknown(j, {"label", "delays_ns", "powers_db", "rx_power_dbm", "departure_angles_rad"}, where);
    const auto delays = detail::get_field<std::vector<double>>(j, "delays_ns", where);
    const auto powers = detail::get_field<std::vector<double>>(j, "powers_db", where);
    const auto label = detail::get_optional<std::string>(j, "label", where).value_or("custom");
    require(!delays.empty(), where + ": 'delays_ns' is empty");

    PdpConfig cfg;
    cfg.profile = PowerDelayProfile::from_db(delays, powers, label);
    cfg.rx_power_dbm = detail::get_optional<double>(j, "rx_power_dbm", where).value_or(-12.0);

    if (j.contains("departure_angles_rad")) {
        const auto& angles = j.at("departure_angles_rad");
        require(angles.is_array() && angles.size() == delays.size(),
                where + ": 'departure_angles_rad' must list one entry (or null) per tap");
        auto entries = cfg.profile.entries();
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (!angles[i].is_null())
                entries[i].departure_angle = angles[i].get<double>();
        cfg.profile = PowerDelayProfile(std::move(entries), label);
    }
    return cfg;
}

inline PdpConfig load_pdp_config(const std::string& path) { return parse_pdp_config(read_json_file(path), path); }

inline HarvesterModel parse_harvester_config(const json& j, const std::string& where = "harvester")
{
    require(j.is_object(), where + ": expected an object");
    detail::reject_unknown(j, {"i_s", "n", "v_t", "a", "r_ant", "k2", "k4"}, where);
    const double r_ant = detail::get_optional<double>(j, "r_ant", where).value_or(50.0);
    const auto k2 = detail::get_optional<double>(j, "k2", where);
    const auto k4 = detail::get_optional<double>(j, "k4", where);
    require(k2.has_value() == k4.has_value(), where + ": 'k2' and 'k4' must be given together");
    if (k2)
        return HarvesterModel::from_coefficients(*k2, *k4, r_ant);

    DiodeParameters diode;
    diode.saturation_current = detail::get_optional<double>(j, "i_s", where).value_or(diode.saturation_current);
    diode.ideality = detail::get_optional<double>(j, "n", where).value_or(diode.ideality);
    diode.thermal_voltage = detail::get_optional<double>(j, "v_t", where).value_or(diode.thermal_voltage);
    const double a = detail::get_optional<double>(j, "a", where).value_or(0.0);
    return HarvesterModel::from_diode(diode, a, r_ant);
}

} // namespace wpt
