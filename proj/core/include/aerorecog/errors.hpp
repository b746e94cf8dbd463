#pragma once

#include <stdexcept>
#include <string>

namespace aerorecog {

/// Base class for all library errors. `code()` is a stable machine-readable
/// identifier used by the CLI when emitting error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define AERORECOG_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& what = #Name)                \
            : Error(#Name, what) {}                                   \
    }

AERORECOG_DEFINE_ERROR(SingularWarp);
AERORECOG_DEFINE_ERROR(ImageTooSmall);
AERORECOG_DEFINE_ERROR(RegistrationDiverged);
AERORECOG_DEFINE_ERROR(SingularHessian);
AERORECOG_DEFINE_ERROR(EmptyBurst);
AERORECOG_DEFINE_ERROR(InvalidStep);
AERORECOG_DEFINE_ERROR(DegenerateRegion);
AERORECOG_DEFINE_ERROR(InsufficientSamples);
AERORECOG_DEFINE_ERROR(RankDeficient);
AERORECOG_DEFINE_ERROR(AmbientMismatch);
AERORECOG_DEFINE_ERROR(DuplicateLabel);
AERORECOG_DEFINE_ERROR(EmptyGallery);
AERORECOG_DEFINE_ERROR(ConfigMismatch);
AERORECOG_DEFINE_ERROR(UnknownLabel);
AERORECOG_DEFINE_ERROR(ConfigInvalid);
AERORECOG_DEFINE_ERROR(ManifestInvalid);
AERORECOG_DEFINE_ERROR(IoError);

#undef AERORECOG_DEFINE_ERROR

}  // namespace aerorecog
