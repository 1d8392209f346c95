#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pairdistill {

/// Machine-readable failure category. The CLI maps these to exit codes.
enum class ErrorCategory {
    DegenerateInput,
    Domain,
    Divergence,
    Configuration,
    EmptyStream,
    NoTrigger,
    NoPeak,
    MissingTruth,
    RankDeficient,
    NonPhysical,
    FileFormat,
    ConfigParse,
    Io,
};

std::string_view category_name(ErrorCategory category) noexcept;

/// Exit code for a category; always nonzero.
int category_exit_code(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

}  // namespace pairdistill
