#pragma once

#include <stdexcept>
#include <string>

namespace scakit {

// Base for all toolkit errors. The CLI maps these to exit code 1;
// argument/usage problems are handled by the parser and map to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Malformed file content. row/col are 1-based data coordinates, -1 when the
// failure is not tied to a cell (bad magic, truncated payload, ...).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long row = -1, long col = -1)
        : Error(msg), row(row), col(col) {}
    long row;
    long col;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid value in otherwise well-formed input (NaN entries, negative data
// where non-negativity is required, duplicate labels, bad parameters).
class ValueError : public Error {
public:
    using Error::Error;
};

// Input is degenerate for the requested statistic (zero variance, zero
// vector, constant column).
class DegenerateError : public Error {
public:
    using Error::Error;
};

// Consensus outlier filtering left fewer components than requested clusters.
class InsufficientComponentsError : public Error {
public:
    InsufficientComponentsError(const std::string& msg, double kept_fraction)
        : Error(msg), kept_fraction(kept_fraction) {}
    double kept_fraction;
};

}  // namespace scakit
