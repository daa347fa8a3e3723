#pragma once

#include <stdexcept>
#include <string>

namespace swapqkd {

// A physical parameter is outside its documented domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Inputs for which the requested quantity is undefined (no coincidences,
// an impossible heralding pattern).
class DegenerateInputError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// P(qrst) is exactly zero: the click pattern cannot occur under the model.
class ZeroEvidenceError : public DegenerateInputError {
public:
    using DegenerateInputError::DegenerateInputError;
};

// P(qrst) is positive in exact arithmetic but underflowed in double precision.
class EvidenceUnderflowError : public std::underflow_error {
public:
    using std::underflow_error::underflow_error;
};

// Q_max + Q_min = 0, so the visibility is undefined.
class DegenerateVisibilityError : public DegenerateInputError {
public:
    using DegenerateInputError::DegenerateInputError;
};

// A photon-number index exceeded the truncation it is evaluated under.
class TruncationError : public std::out_of_range {
public:
    TruncationError(const std::string& what, std::string index)
        : std::out_of_range(what), index_(std::move(index)) {}

    const std::string& index() const noexcept { return index_; }

private:
    std::string index_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw DomainError(message);
    }
}

}  // namespace detail
}  // namespace swapqkd
