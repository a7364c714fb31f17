#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user configuration. `field` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ModelEvaluationError : public Error {
public:
    ModelEvaluationError(std::string quantity, std::size_t lag_count, const std::string& what)
        : Error(quantity + " (" + std::to_string(lag_count) + " lags): " + what),
          quantity_(std::move(quantity)) {}
    const std::string& quantity() const noexcept { return quantity_; }

private:
    std::string quantity_;
};

class IncommensurableGrid : public Error {
public:
    IncommensurableGrid(std::vector<std::string> offending, const std::string& what)
        : Error(what), offending_(std::move(offending)) {}
    const std::vector<std::string>& offending() const noexcept { return offending_; }

private:
    std::vector<std::string> offending_;
};

class DeltaOutOfRange : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class CountMismatch : public Error {
public:
    using Error::Error;
};

class CapExceeded : public Error {
public:
    using Error::Error;
};

class SlopeUndefined : public Error {
public:
    using Error::Error;
};

class OracleMismatch : public Error {
public:
    using Error::Error;
};

// A particle state, drift or diffusion value became non-finite during stepping.
class NonFiniteState : public Error {
public:
    NonFiniteState(std::size_t particle, long step, std::string quantity)
        : Error("non-finite " + quantity + " for particle " + std::to_string(particle) +
                " at step " + std::to_string(step)),
          particle_(particle), step_(step), quantity_(std::move(quantity)) {}

    std::size_t particle() const noexcept { return particle_; }
    long step() const noexcept { return step_; }
    const std::string& quantity() const noexcept { return quantity_; }

private:
    std::size_t particle_;
    long step_;
    std::string quantity_;
};

} // namespace nmv
