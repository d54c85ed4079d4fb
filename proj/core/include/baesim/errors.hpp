#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace baesim {

/// Raised by the config loader; carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "configuration invalid:";
        for (const auto& m : v) s += "\n  - " + m;
        return s;
    }
    std::vector<std::string> violations_;
};

/// Parametric instability or singular response matrix.
class InstabilityError : public std::runtime_error {
public:
    InstabilityError(const std::string& what, double where)
        : std::runtime_error(what), where_(where) {}

    /// Offending frequency (rad/s) or step index, depending on context.
    double where() const { return where_; }

private:
    double where_;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace baesim
