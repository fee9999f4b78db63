#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace railcarb {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. The CLI maps this to exit code 1.
class DataError : public Error {
public:
    using Error::Error;
};

// A scenario configuration that fails validation. Each entry is (field, message).
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::pair<std::string, std::string>> fields);
    ConfigError(std::string field, std::string message)
        : ConfigError(std::vector<std::pair<std::string, std::string>>{{std::move(field), std::move(message)}}) {}

    const std::vector<std::pair<std::string, std::string>>& fields() const { return fields_; }

private:
    std::vector<std::pair<std::string, std::string>> fields_;
};

class RoutingError : public Error {
public:
    using Error::Error;
};

// Siting cannot cover one or more paths; carries the offending path indices.
class InfeasibleError : public Error {
public:
    InfeasibleError(std::string what, std::vector<std::size_t> paths)
        : Error(std::move(what)), paths_(std::move(paths)) {}

    const std::vector<std::size_t>& paths() const { return paths_; }

private:
    std::vector<std::size_t> paths_;
};

class UnreachableLinkError : public Error {
public:
    using Error::Error;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

// Cost of avoided emissions is undefined when no emissions are avoided.
class NonPositiveAvoidance : public Error {
public:
    using Error::Error;
};

} // namespace railcarb
