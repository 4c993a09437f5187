#include "codonsoup/error.hpp"

namespace codonsoup {

std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::MissingLowering:
        return "MissingLowering";
    case Errc::LoweringCycle:
        return "LoweringCycle";
    case Errc::InvalidAlphabet:
        return "InvalidAlphabet";
    case Errc::TooManyInstructions:
        return "TooManyInstructions";
    case Errc::UnknownMnemonic:
        return "UnknownMnemonic";
    case Errc::AddNumberRange:
        return "AddNumberRange";
    case Errc::NoCodonForInstruction:
        return "NoCodonForInstruction";
    case Errc::AssemblySyntax:
        return "AssemblySyntax";
    case Errc::LengthMismatch:
        return "LengthMismatch";
    case Errc::BadFormat:
        return "BadFormat";
    case Errc::VersionMismatch:
        return "VersionMismatch";
    case Errc::CorruptSnapshot:
        return "CorruptSnapshot";
    case Errc::ConfigError:
        return "ConfigError";
    case Errc::IoError:
        return "IoError";
    }
    return "Unknown";
}

bool Error::is_config_error() const noexcept
{
    switch (code_) {
    case Errc::CorruptSnapshot:
    case Errc::IoError:
        return false;
    default:
        return true;
    }
}

} // namespace codonsoup
