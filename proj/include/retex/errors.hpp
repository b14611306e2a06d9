#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace retex {

// Error classes map onto CLI exit codes: config/contract -> 2,
// denoiser/remote -> 3, geometry -> 4.
enum class ErrorClass { Config, Denoiser, Geometry };

inline int exit_code(ErrorClass c) {
    switch (c) {
        case ErrorClass::Config: return 2;
        case ErrorClass::Denoiser: return 3;
        case ErrorClass::Geometry: return 4;
    }
    return 1;
}

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string msg) : std::runtime_error(std::move(msg)), cls_(cls) {}
    ErrorClass error_class() const { return cls_; }

private:
    ErrorClass cls_;
};

#define RETEX_DEFINE_ERROR(Name, Class)                                     \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& msg) : Error(Class, msg) {}        \
    }

RETEX_DEFINE_ERROR(ParseError, ErrorClass::Geometry);
RETEX_DEFINE_ERROR(MissingUVs, ErrorClass::Geometry);
RETEX_DEFINE_ERROR(DegenerateBounds, ErrorClass::Geometry);
RETEX_DEFINE_ERROR(EmptyProjection, ErrorClass::Geometry);
RETEX_DEFINE_ERROR(ConfigError, ErrorClass::Config);
RETEX_DEFINE_ERROR(ShapeMismatch, ErrorClass::Config);
RETEX_DEFINE_ERROR(ResolutionMismatch, ErrorClass::Config);
RETEX_DEFINE_ERROR(TooLarge, ErrorClass::Config);
RETEX_DEFINE_ERROR(ZeroSelectedViews, ErrorClass::Config);
RETEX_DEFINE_ERROR(RemoteUnavailable, ErrorClass::Denoiser);
RETEX_DEFINE_ERROR(RemoteBadResponse, ErrorClass::Denoiser);

#undef RETEX_DEFINE_ERROR

}  // namespace retex
