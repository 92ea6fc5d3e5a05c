#pragma once

#include <stdexcept>
#include <string>

namespace geosmr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class UnknownRegionError : public Error {
public:
    explicit UnknownRegionError(const std::string& region)
        : Error("unknown region: " + region), region_(region) {}
    const std::string& region() const noexcept { return region_; }

private:
    std::string region_;
};

class DegeneratePlacementError : public Error {
public:
    using Error::Error;
};

class LeaderNotInPlacementError : public Error {
public:
    using Error::Error;
};

class MissingLeaderError : public Error {
public:
    using Error::Error;
};

class NotLeaderBasedError : public Error {
public:
    using Error::Error;
};

class InvalidCountError : public Error {
public:
    using Error::Error;
};

class NoFeasiblePlacementError : public Error {
public:
    using Error::Error;
};

class InvalidPathError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace geosmr
