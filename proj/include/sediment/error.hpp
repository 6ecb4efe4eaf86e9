#pragma once

#include <stdexcept>
#include <string>

namespace sediment {

// Base for all domain errors surfaced to callers (CLI maps these to exit 1).
struct EngineError : std::runtime_error {
    explicit EngineError(const std::string& what) : std::runtime_error(what) {}
};

struct VaultError : EngineError {
    using EngineError::EngineError;
};

struct PageFormatError : VaultError {
    using VaultError::VaultError;
};

// Staging or committing outside the journal contract.
struct JournalError : VaultError {
    using VaultError::VaultError;
};

struct BudgetExceededError : JournalError {
    using JournalError::JournalError;
};

struct RawContaminationError : JournalError {
    using JournalError::JournalError;
};

struct VaultLockedError : JournalError {
    using JournalError::JournalError;
};

// Retryable physical write failure; fault hooks throw this to exercise the
// retry path. Anything else thrown from a hook is treated as a hard crash.
struct TaskWriteError : JournalError {
    using JournalError::JournalError;
};

// Commit gave up after exhausting retries and rolled the task back.
struct TaskRolledBackError : JournalError {
    using JournalError::JournalError;
};

struct MemoryIndexError : EngineError {
    using EngineError::EngineError;
};

struct OracleError : EngineError {
    using EngineError::EngineError;
};

// A fixture-backed oracle never improvises: an unscripted key is an error.
struct FixtureMissError : OracleError {
    using OracleError::OracleError;
};

struct PipelineError : EngineError {
    using EngineError::EngineError;
};

struct LedgerError : EngineError {
    using EngineError::EngineError;
};

struct SimulationError : EngineError {
    using EngineError::EngineError;
};

// Malformed config or report files (CLI maps these to exit 2).
struct ConfigError : EngineError {
    using EngineError::EngineError;
};

}  // namespace sediment
