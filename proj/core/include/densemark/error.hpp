#pragma once

#include <stdexcept>
#include <string>

namespace densemark {

enum class ErrorCode {
    Config,        // invalid configuration or scheme
    Geometry,      // degenerate geometry (coincident points, zero tangent)
    Domain,        // parameter outside curve domain
    Contract,      // caller violated a documented precondition
    Parse,         // malformed input file
    Validation,    // schema-level validation failure
    Annotation,    // degenerate annotation (e.g. coincident eye corners)
    Training,      // optimizer divergence or non-finite loss
    Usage,         // bad CLI invocation
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline Error config_error(const std::string& msg)     { return {ErrorCode::Config, msg}; }
inline Error geometry_error(const std::string& msg)   { return {ErrorCode::Geometry, msg}; }
inline Error domain_error(const std::string& msg)     { return {ErrorCode::Domain, msg}; }
inline Error contract_error(const std::string& msg)   { return {ErrorCode::Contract, msg}; }
inline Error parse_error(const std::string& msg)      { return {ErrorCode::Parse, msg}; }
inline Error validation_error(const std::string& msg) { return {ErrorCode::Validation, msg}; }
inline Error annotation_error(const std::string& msg) { return {ErrorCode::Annotation, msg}; }
inline Error training_error(const std::string& msg)   { return {ErrorCode::Training, msg}; }
inline Error usage_error(const std::string& msg)      { return {ErrorCode::Usage, msg}; }

} // namespace densemark
