#pragma once

#include <stdexcept>
#include <string>

namespace flatcore {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionTooSmall : Error {
    explicit DimensionTooSmall(const std::string& msg) : Error(msg) {}
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

struct ZeroField : Error {
    explicit ZeroField(const std::string& msg) : Error(msg) {}
};

struct DisconnectedDomain : Error {
    explicit DisconnectedDomain(const std::string& msg) : Error(msg) {}
};

struct NotStarShaped : Error {
    explicit NotStarShaped(const std::string& msg) : Error(msg) {}
};

struct NoConvergence : Error {
    explicit NoConvergence(const std::string& msg) : Error(msg) {}
};

struct NoRoot : Error {
    explicit NoRoot(const std::string& msg) : Error(msg) {}
};

struct MaxIterations : Error {
    explicit MaxIterations(const std::string& msg) : Error(msg) {}
};

struct StepFailure : Error {
    explicit StepFailure(const std::string& msg) : Error(msg) {}
};

struct NoEventBeforeRmax : Error {
    explicit NoEventBeforeRmax(const std::string& msg) : Error(msg) {}
};

struct NoSignChange : Error {
    explicit NoSignChange(const std::string& msg) : Error(msg) {}
};

struct ToleranceNotMet : Error {
    explicit ToleranceNotMet(const std::string& msg) : Error(msg) {}
};

struct SupportExceedsDomain : Error {
    explicit SupportExceedsDomain(const std::string& msg) : Error(msg) {}
};

struct BracketFailure : Error {
    explicit BracketFailure(const std::string& msg) : Error(msg) {}
};

struct ProbeOutsideDomain : Error {
    explicit ProbeOutsideDomain(const std::string& msg) : Error(msg) {}
};

} // namespace flatcore
