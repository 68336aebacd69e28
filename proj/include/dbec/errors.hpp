#ifndef DBEC_ERRORS_HPP
#define DBEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dbec {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidGrid : Error {
    explicit InvalidGrid(const std::string& msg) : Error("InvalidGrid: " + msg) {}
};

struct NonFiniteField : Error {
    explicit NonFiniteField(const std::string& msg) : Error("NonFiniteField: " + msg) {}
};

struct InvalidScale : Error {
    explicit InvalidScale(const std::string& msg) : Error("InvalidScale: " + msg) {}
};

struct NotDefocusable : Error {
    explicit NotDefocusable(const std::string& msg) : Error("NotDefocusable: " + msg) {}
};

struct NotUnstableRegime : Error {
    explicit NotUnstableRegime(const std::string& msg) : Error("NotUnstableRegime: " + msg) {}
};

struct NoDescentDirection : Error {
    explicit NoDescentDirection(const std::string& msg) : Error("NoDescentDirection: " + msg) {}
};

struct MaxIterations : Error {
    explicit MaxIterations(const std::string& msg) : Error("MaxIterations: " + msg) {}
};

struct BasinEscape : Error {
    explicit BasinEscape(const std::string& msg) : Error("BasinEscape: " + msg) {}
};

struct InsufficientSamples : Error {
    explicit InsufficientSamples(const std::string& msg) : Error("InsufficientSamples: " + msg) {}
};

struct InvalidPhysical : Error {
    explicit InvalidPhysical(const std::string& msg) : Error("InvalidPhysical: " + msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("ConfigError: " + msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("IoError: " + msg) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error("FormatError: " + msg) {}
};

} // namespace dbec

#endif
