#ifndef LIPKIT_ERROR_HPP
#define LIPKIT_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace lipkit {

/**
 * @brief Base class for every validation failure raised by the library.
 *
 * The message always starts with the name of the violated invariant, e.g.
 * `"AnchoredFunction.distinct_anchors: anchors 2 and 5 coincide"`, so that
 * front ends can surface it verbatim.
 */
class Error : public std::runtime_error {
public:
    Error(std::string invariant, const std::string& detail)
        : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

/// Point does not belong to the domain (index out of range, wrong dimension).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed or out-of-contract argument.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Operation not available on this kind of metric domain.
class UnsupportedDomainError : public Error {
public:
    using Error::Error;
};

/// Value outside the open interval an operation is defined on.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A point lies in X \ U and in A at the same time.
class InconsistencyError : public Error {
public:
    using Error::Error;
};

/// Lipschitz constant too small for some anchor pair.
class AdmissibilityError : public Error {
public:
    AdmissibilityError(std::string invariant, const std::string& detail, std::size_t first, std::size_t second)
        : Error(std::move(invariant), detail), first_(first), second_(second) {}

    std::size_t first() const noexcept { return first_; }
    std::size_t second() const noexcept { return second_; }

private:
    std::size_t first_;
    std::size_t second_;
};

/// Windowed infimum over an empty window.
class EmptyWindowError : public Error {
public:
    EmptyWindowError(std::string invariant, const std::string& detail, std::string point, double window)
        : Error(std::move(invariant), detail), point_(std::move(point)), window_(window) {}

    const std::string& point() const noexcept { return point_; }
    double window() const noexcept { return window_; }

private:
    std::string point_;
    double window_;
};

/// No set of a cover contains the point.
class UncoveredPointError : public Error {
public:
    UncoveredPointError(std::string invariant, const std::string& detail, std::string point)
        : Error(std::move(invariant), detail), point_(std::move(point)) {}

    const std::string& point() const noexcept { return point_; }

private:
    std::string point_;
};

/// File could not be read or written. Not a validation failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lipkit

#endif
