#pragma once

#include <map>
#include <optional>
#include <string>

#include "baesim/params.hpp"

namespace baesim {

/// Parsed config file: system parameters plus toolkit-level extras.
struct Config {
    SystemParams params;

    /// Measured mechanical occupation, overriding the cooling prediction when set.
    std::optional<double> n_bar;

    /// Absorption-heating coefficient (quanta per unit cooperativity).
    double beta_heating = 0.0;

    /// Raw key/value pairs as read, for manifests.
    std::map<std::string, std::string> raw;

    /// Occupation used by the spectrum generators.
    double occupation() const {
        return n_bar ? *n_bar : cooled_occupation(params);
    }
};

/// Loads a flat key = value config file. Frequencies are given in Hz
/// (keys end in _hz) and converted to angular units internally. '#' starts
/// a comment. All invariant violations are reported at once via ConfigError.
Config load_config(const std::string& path);

/// Same, from an already-read string (test entry point).
Config parse_config(const std::string& text, const std::string& origin = "<string>");

/// Serializes a config back to the file format (round-trips numeric values).
std::string format_config(const Config& c);

} // namespace baesim
