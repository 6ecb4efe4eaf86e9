#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "sediment/layout.hpp"
#include "sediment/page.hpp"

namespace sediment {

enum class JournalState { open, committed, rolled_back };

struct CommitReport {
    int files_applied = 0;
    int retries = 0;
};

// All vault mutation flows through a TaskJournal. Writes are staged in memory
// against a per-task budget, then committed atomically: an intent record with
// backups lands in .journal/ before the first target file is touched, so a
// crash mid-commit is always recoverable and a failed commit restores the
// vault byte-for-byte.
struct JournalOptions {
    int write_budget = 8;
    int max_write_attempts = 4;
};

class TaskJournal {
public:
    // Called before every write attempt. Throw TaskWriteError to simulate a
    // retryable fault; any other exception models a hard crash and leaves the
    // intent record on disk for recover().
    using FaultHook = std::function<void(const std::filesystem::path&, int attempt)>;

    // Acquires the vault lock; throws VaultLockedError if another task holds
    // it or an unrecovered journal exists.
    TaskJournal(const VaultLayout& vault, std::string task_id,
                JournalOptions options = JournalOptions());
    ~TaskJournal();

    TaskJournal(const TaskJournal&) = delete;
    TaskJournal& operator=(const TaskJournal&) = delete;

    const std::string& task_id() const { return task_id_; }
    JournalState state() const { return state_; }
    int staged_count() const { return static_cast<int>(staged_.size()); }

    // Paths are vault-relative. Restaging the same path replaces the pending
    // op without consuming additional budget.
    void stage_page(const WikiPage& page);
    void stage_write(const std::filesystem::path& vault_relative, const std::string& content);
    void stage_delete(const std::filesystem::path& vault_relative);

    bool has_staged(const std::filesystem::path& vault_relative) const;
    std::optional<std::string> staged_content(const std::filesystem::path& vault_relative) const;
    // Staged bytes if present, else current disk content, else nullopt.
    std::optional<std::string> read_through(const std::filesystem::path& vault_relative) const;

    // Applies staged ops in staging order with bounded retries per file.
    // Throws TaskRolledBackError after restoring backups if a file exhausts
    // its attempts. Releases the lock on both outcomes.
    CommitReport commit(const FaultHook& hook = nullptr);
    void rollback();

    static bool needs_recovery(const VaultLayout& vault);
    // Reverts a crashed commit from its intent record and clears the lock.
    static void recover(const VaultLayout& vault);

private:
    struct StagedOp {
        bool is_delete = false;
        std::string content;
        int order = 0;
    };

    void ensure_open() const;
    void check_target(const std::filesystem::path& vault_relative) const;
    void reserve_slot(const std::filesystem::path& vault_relative);
    void release_lock();

    VaultLayout vault_;
    std::string task_id_;
    JournalOptions options_;
    JournalState state_ = JournalState::open;
    std::map<std::filesystem::path, StagedOp> staged_;
    int next_order_ = 0;
    bool holds_lock_ = false;
};

}  // namespace sediment
