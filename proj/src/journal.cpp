#include "sediment/journal.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <nlohmann/json.hpp>

#include "sediment/error.hpp"
#include "sediment/io.hpp"

namespace sediment {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

bool path_under(const fs::path& candidate, const fs::path& dir) {
    auto c = candidate.lexically_normal();
    auto d = dir.lexically_normal();
    auto cit = c.begin();
    for (auto dit = d.begin(); dit != d.end(); ++dit, ++cit) {
        if (cit == c.end() || *cit != *dit) return false;
    }
    return true;
}

}  // namespace

TaskJournal::TaskJournal(const VaultLayout& vault, std::string task_id,
                         JournalOptions options)
    : vault_(vault), task_id_(std::move(task_id)), options_(options) {
    if (needs_recovery(vault_)) {
        throw VaultLockedError("vault has an unrecovered journal; run recovery first");
    }
    int fd = ::open(vault_.lock_path.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
    if (fd < 0) {
        throw VaultLockedError("vault is locked: " + vault_.lock_path.string());
    }
    std::string owner = task_id_ + "\n";
    ssize_t n = ::write(fd, owner.data(), owner.size());
    (void)n;  // lock content is informational only
    ::close(fd);
    holds_lock_ = true;
}

TaskJournal::~TaskJournal() {
    if (state_ == JournalState::open) {
        state_ = JournalState::rolled_back;
        staged_.clear();
    }
    release_lock();
}

void TaskJournal::release_lock() {
    if (holds_lock_) {
        std::error_code ec;
        fs::remove(vault_.lock_path, ec);
        holds_lock_ = false;
    }
}

void TaskJournal::ensure_open() const {
    if (state_ != JournalState::open) {
        throw JournalError("journal " + task_id_ + " is no longer open");
    }
}

void TaskJournal::check_target(const fs::path& vault_relative) const {
    fs::path norm = vault_relative.lexically_normal();
    if (norm.is_absolute()) {
        throw JournalError("journal paths are vault-relative: " + vault_relative.string());
    }
    fs::path abs = (vault_.root / norm).lexically_normal();
    if (path_under(abs, vault_.raw_dir)) {
        throw RawContaminationError("raw layer is read-only: " + vault_relative.string());
    }
    if (path_under(abs, vault_.wiki_dir) || path_under(abs, vault_.output_dir)) return;
    if (abs == vault_.manifest_path.lexically_normal()) return;
    throw JournalError("path outside writable layers: " + vault_relative.string());
}

void TaskJournal::reserve_slot(const fs::path& vault_relative) {
    if (!staged_.count(vault_relative) &&
        static_cast<int>(staged_.size()) >= options_.write_budget) {
        throw BudgetExceededError("write budget of " + std::to_string(options_.write_budget) +
                                  " exceeded by " + vault_relative.string());
    }
}

void TaskJournal::stage_page(const WikiPage& page) {
    ensure_open();
    fs::path abs = (vault_.root / page.path).lexically_normal();
    if (path_under(abs, vault_.wiki_dir)) {
        if (!path_under(abs, vault_.kind_dir(page.kind))) {
            throw JournalError("page kind " + std::string(page_kind_name(page.kind)) +
                               " does not match directory of " + page.path.string());
        }
    }
    stage_write(page.path, serialize_page(page));
}

void TaskJournal::stage_write(const fs::path& vault_relative, const std::string& content) {
    ensure_open();
    fs::path key = vault_relative.lexically_normal();
    check_target(key);
    reserve_slot(key);
    StagedOp& op = staged_[key];
    op.is_delete = false;
    op.content = content;
    if (op.order == 0) op.order = ++next_order_;
}

void TaskJournal::stage_delete(const fs::path& vault_relative) {
    ensure_open();
    fs::path key = vault_relative.lexically_normal();
    check_target(key);
    reserve_slot(key);
    StagedOp& op = staged_[key];
    op.is_delete = true;
    op.content.clear();
    if (op.order == 0) op.order = ++next_order_;
}

bool TaskJournal::has_staged(const fs::path& vault_relative) const {
    return staged_.count(vault_relative.lexically_normal()) > 0;
}

std::optional<std::string> TaskJournal::staged_content(const fs::path& vault_relative) const {
    auto it = staged_.find(vault_relative.lexically_normal());
    if (it == staged_.end() || it->second.is_delete) return std::nullopt;
    return it->second.content;
}

std::optional<std::string> TaskJournal::read_through(const fs::path& vault_relative) const {
    fs::path key = vault_relative.lexically_normal();
    auto it = staged_.find(key);
    if (it != staged_.end()) {
        if (it->second.is_delete) return std::nullopt;
        return it->second.content;
    }
    fs::path abs = vault_.root / key;
    if (!fs::exists(abs)) return std::nullopt;
    return read_file(abs);
}

CommitReport TaskJournal::commit(const FaultHook& hook) {
    ensure_open();

    // Apply in staging order so dependent writes land in a sensible sequence.
    std::vector<std::pair<fs::path, const StagedOp*>> ordered;
    ordered.reserve(staged_.size());
    for (const auto& [path, op] : staged_) ordered.emplace_back(path, &op);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.second->order < b.second->order; });

    // Intent record: content and backup files plus a manifest, fsynced before
    // the first target is touched. Recovery reverts from these backups.
    fs::create_directories(vault_.journal_dir);
    ordered_json intent;
    intent["task_id"] = task_id_;
    intent["state"] = "applying";
    ordered_json entries = ordered_json::array();
    int idx = 0;
    for (const auto& [path, op] : ordered) {
        ordered_json e;
        e["target"] = path.generic_string();
        e["op"] = op->is_delete ? "delete" : "write";
        fs::path abs = vault_.root / path;
        if (!op->is_delete) {
            fs::path content_file = vault_.journal_dir / ("content." + std::to_string(idx));
            write_file_atomic(content_file, op->content);
            e["content"] = content_file.filename().string();
        }
        if (fs::exists(abs)) {
            fs::path backup_file = vault_.journal_dir / ("backup." + std::to_string(idx));
            write_file_atomic(backup_file, read_file(abs));
            e["backup"] = backup_file.filename().string();
        }
        entries.push_back(e);
        ++idx;
    }
    intent["entries"] = entries;
    write_file_atomic(vault_.journal_dir / "intent.json", intent.dump(2));

    CommitReport report;
    bool failed = false;
    std::string failure;
    for (const auto& [path, op] : ordered) {
        fs::path abs = vault_.root / path;
        bool applied = false;
        for (int attempt = 1; attempt <= options_.max_write_attempts; ++attempt) {
            try {
                if (hook) hook(path, attempt);
                if (op->is_delete) {
                    fs::remove(abs);
                } else {
                    write_file_atomic(abs, op->content);
                }
                applied = true;
                break;
            } catch (const TaskWriteError&) {
                ++report.retries;
            }
        }
        if (!applied) {
            failed = true;
            failure = path.generic_string();
            break;
        }
        ++report.files_applied;
    }

    if (failed) {
        // Restore every touched file from the intent record, then surface the
        // failure. The vault is byte-identical to its pre-commit state.
        recover(vault_);
        holds_lock_ = false;  // recover() removed the lock file
        state_ = JournalState::rolled_back;
        staged_.clear();
        throw TaskRolledBackError("task " + task_id_ + " rolled back: write to " + failure +
                                  " failed after " +
                                  std::to_string(options_.max_write_attempts) + " attempts");
    }

    fs::remove_all(vault_.journal_dir);
    state_ = JournalState::committed;
    release_lock();
    return report;
}

void TaskJournal::rollback() {
    ensure_open();
    staged_.clear();
    state_ = JournalState::rolled_back;
    release_lock();
}

bool TaskJournal::needs_recovery(const VaultLayout& vault) {
    return fs::exists(vault.journal_dir / "intent.json");
}

void TaskJournal::recover(const VaultLayout& vault) {
    fs::path intent_path = vault.journal_dir / "intent.json";
    if (fs::exists(intent_path)) {
        ordered_json intent = ordered_json::parse(read_file(intent_path));
        // Revert in reverse apply order.
        const auto& entries = intent["entries"];
        for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
            const auto& e = *it;
            fs::path target = vault.root / fs::path(e["target"].get<std::string>());
            if (e.contains("backup")) {
                fs::path backup = vault.journal_dir / e["backup"].get<std::string>();
                write_file_atomic(target, read_file(backup));
            } else {
                std::error_code ec;
                fs::remove(target, ec);
            }
        }
    }
    std::error_code ec;
    fs::remove_all(vault.journal_dir, ec);
    fs::remove(vault.lock_path, ec);
}

}  // namespace sediment
