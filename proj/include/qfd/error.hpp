#pragma once

#include <stdexcept>
#include <string>

namespace qfd {

// Root of every error the library throws. Callers that only care about
// "something in qfd failed" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value outside the mathematical domain of an operation (negative rotor
// speed, non-finite input, dt <= 0, ...).
class InputDomainError : public Error {
public:
    using Error::Error;
};

// Tensor or window shapes that do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SimulationError : public Error {
public:
    using Error::Error;
};

class EpisodeDivergedError : public SimulationError {
public:
    EpisodeDivergedError(const std::string& what, long step) : SimulationError(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

// A steady-state log that cannot define unbalance ratios (mean of motor 1 is 0).
class DegenerateLogError : public Error {
public:
    using Error::Error;
};

// Normalizer fitting on a channel with zero variance.
class FittingError : public Error {
public:
    using Error::Error;
};

// Container-file problems. Each failure mode has its own type so tests and
// callers can tell them apart.
class FormatError : public Error {
public:
    using Error::Error;
};

class VersionMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedFileError : public FormatError {
public:
    using FormatError::FormatError;
};

class CountMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class ChecksumMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

// Raised by grad_check when a layer exceeds tolerance; names the layer.
class GradientCheckError : public Error {
public:
    GradientCheckError(const std::string& what, std::string layer) : Error(what), layer_(std::move(layer)) {}
    const std::string& layer() const noexcept { return layer_; }

private:
    std::string layer_;
};

}  // namespace qfd
