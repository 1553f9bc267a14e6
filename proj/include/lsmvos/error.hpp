#pragma once

#include <stdexcept>
#include <string>

namespace lsmvos {

// Every failure raised by the library derives from Error so callers (the CLI,
// the Python module) can map them to a single diagnostic path.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace lsmvos
