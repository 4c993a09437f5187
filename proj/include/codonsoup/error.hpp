#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codonsoup {

enum class Errc {
    MissingLowering,
    LoweringCycle,
    InvalidAlphabet,
    TooManyInstructions,
    UnknownMnemonic,
    AddNumberRange,
    NoCodonForInstruction,
    AssemblySyntax,
    LengthMismatch,
    BadFormat,
    VersionMismatch,
    CorruptSnapshot,
    ConfigError,
    IoError,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for the library; `code()` tells callers what went wrong.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

    /// Configuration/input problems (CLI exit code 1) as opposed to runtime failures.
    bool is_config_error() const noexcept;

private:
    Errc code_;
};

} // namespace codonsoup
