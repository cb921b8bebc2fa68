#pragma once

#include <stdexcept>
#include <string>

namespace garsamp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// x outside the declared support, or an expression evaluated off its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    NumericError(const std::string& what, double lo = 0.0, double hi = 0.0)
        : Error(what), bracket_lo(lo), bracket_hi(hi) {}
    double bracket_lo;
    double bracket_hi;
};

class ModelError : public Error {
public:
    using Error::Error;
};

class ContractError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DegenerateInterval : public Error {
public:
    using Error::Error;
};

class ImproperEnvelope : public Error {
public:
    enum class Tail { left, right };
    ImproperEnvelope(Tail t, double slope)
        : Error(std::string("improper envelope: ") + (t == Tail::left ? "left" : "right") +
                " tail slope " + std::to_string(slope)),
          tail(t), tail_slope(slope) {}
    Tail tail;
    double tail_slope;
};

class BoundViolation : public Error {
public:
    BoundViolation(double x_, double ratio_)
        : Error("likelihood bound violated at x=" + std::to_string(x_) +
                " ratio=" + std::to_string(ratio_)),
          x(x_), ratio(ratio_) {}
    double x;
    double ratio;
};

class EnvelopeViolation : public Error {
public:
    EnvelopeViolation(double x_, double ratio_)
        : Error("envelope does not dominate target at x=" + std::to_string(x_) +
                " ratio=" + std::to_string(ratio_)),
          x(x_), ratio(ratio_) {}
    double x;
    double ratio;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset_)
        : Error("syntax error at offset " + std::to_string(offset_) + ": " + msg), offset(offset_) {}
    std::size_t offset;
};

}  // namespace garsamp
