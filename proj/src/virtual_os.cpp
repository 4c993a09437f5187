#include "codonsoup/virtual_os.hpp"

#include "codonsoup/error.hpp"

#include <set>

namespace codonsoup {

namespace {

// Plausible-looking library exports so that the table has a realistic hash density.
constexpr std::string_view kDecoyNames[] = {
    "GetTickCount",     "Sleep",           "GetLastError",     "SetLastError",     "CloseHandle",
    "CreateFileA",      "ReadFile",        "WriteFile",        "GetFileSize",      "SetFilePointer",
    "FindFirstFileA",   "FindNextFileA",   "FindClose",        "CopyFileA",        "DeleteFileA",
    "MoveFileA",        "GetModuleHandleA", "GetProcAddress",  "LoadLibraryA",     "FreeLibrary",
    "VirtualAlloc",     "VirtualFree",     "VirtualProtect",   "HeapAlloc",        "HeapFree",
    "GetProcessHeap",   "CreateThread",    "ExitThread",       "WaitForSingleObject", "CreateProcessA",
    "WinExec",          "GetCommandLineA", "GetEnvironmentVariableA", "SetEnvironmentVariableA", "GetCurrentDirectoryA",
    "SetCurrentDirectoryA", "GetSystemTime", "GetLocalTime",   "QueryPerformanceCounter", "GetVersionExA",
    "lstrlenA",         "lstrcpyA",        "lstrcatA",         "lstrcmpA",         "MultiByteToWideChar",
    "WideCharToMultiByte", "CreateMutexA", "ReleaseMutex",     "OpenProcess",      "TerminateProcess",
    "GetCurrentProcess", "GetCurrentProcessId", "GetTempPathA", "GetTempFileNameA", "CreateDirectoryA",
    "RemoveDirectoryA", "GetFileAttributesA", "SetFileAttributesA", "MapViewOfFile",
};

} // namespace

const VirtualOs& VirtualOs::standard()
{
    static const VirtualOs os = [] {
        std::vector<std::pair<std::string, ApiHandler>> table{
            {"valloc", ApiHandler::Valloc}, {"vspawn", ApiHandler::Vspawn}, {"vexit", ApiHandler::Vexit},
            {"vrand", ApiHandler::Vrand},   {"vpeer", ApiHandler::Vpeer},
        };
        for (auto name : kDecoyNames)
            table.emplace_back(std::string(name), ApiHandler::Decoy);
        return VirtualOs(std::move(table));
    }();
    return os;
}

VirtualOs VirtualOs::synthetic(std::span<const std::string> names)
{
    std::vector<std::pair<std::string, ApiHandler>> table;
    table.reserve(names.size());
    for (const auto& n : names)
        table.emplace_back(n, ApiHandler::Decoy);
    return VirtualOs(std::move(table));
}

VirtualOs::VirtualOs(std::vector<std::pair<std::string, ApiHandler>> exports)
{
    std::set<std::string> seen;
    exports_.reserve(exports.size());
    std::uint32_t addr = layout::kStubBase;
    for (auto& [name, handler] : exports) {
        if (name.empty() || !seen.insert(name).second)
            throw Error(Errc::ConfigError, "export names must be unique and non-empty: '" + name + "'");
        exports_.push_back({name, addr, handler, hash12(name)});
        auto& slot = first_by_hash_[exports_.back().hash];
        if (slot == 0)
            slot = addr;
        addr += layout::kStubStride;
    }
    stub_end_ = addr;
}

const Export* VirtualOs::export_at(std::uint32_t address) const noexcept
{
    if (!in_stub_region(address) || (address - layout::kStubBase) % layout::kStubStride != 0)
        return nullptr;
    return &exports_[(address - layout::kStubBase) / layout::kStubStride];
}

std::uint32_t resolve_api(const VirtualOs& os, std::uint32_t h) noexcept
{
    return os.stub_for_hash(h);
}

} // namespace codonsoup
