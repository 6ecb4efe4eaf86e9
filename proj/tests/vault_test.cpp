#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <unistd.h>

#include <filesystem>
#include <memory>
#include <random>
#include <regex>

#include "sediment/clock.hpp"
#include "sediment/error.hpp"
#include "sediment/facts.hpp"
#include "sediment/hash.hpp"
#include "sediment/index.hpp"
#include "sediment/io.hpp"
#include "sediment/journal.hpp"
#include "sediment/layout.hpp"
#include "sediment/links.hpp"
#include "sediment/lint.hpp"
#include "sediment/manifest.hpp"
#include "sediment/merge.hpp"
#include "sediment/page.hpp"
#include "sediment/text.hpp"

using namespace sediment;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("sediment-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

WikiPage make_page(const VaultLayout& vault, PageKind kind, const std::string& title,
                   int importance, const std::string& body) {
    WikiPage p;
    p.path = vault.default_page_path(kind, title);
    p.kind = kind;
    p.title = title;
    p.importance = importance;
    p.created_at = "2026-04-01T08:00:00Z";
    p.updated_at = "2026-04-01T08:00:00Z";
    p.body = body;
    refresh_links(p);
    return p;
}

void commit_pages(const VaultLayout& vault, const std::vector<WikiPage>& pages,
                  int budget = 32) {
    TaskJournal journal(vault, "seed", {.write_budget = budget});
    for (const WikiPage& p : pages) {
        journal.stage_page(p);
        update_index(vault, journal, p);
    }
    journal.commit();
}

// Reference implementation for the link scanner: regex over runs that contain
// no bracket or newline, with the same trim-and-drop rule.
std::vector<std::string> regex_links(const std::string& body) {
    static const std::regex pattern(R"(\[\[([^\[\]\n]+)\]\])");
    std::vector<std::string> out;
    auto begin = std::sregex_iterator(body.begin(), body.end(), pattern);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        std::string target = trim((*it)[1].str());
        if (!target.empty()) out.push_back(target);
    }
    return out;
}

}  // namespace

TEST_CASE("tokenize and canonical title") {
    CHECK(tokenize("AI-Assisted Coding") == std::vector<std::string>{"ai", "assisted", "coding"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(token_set("b a b A") == std::vector<std::string>{"a", "b"});
    CHECK(canonical_title("  OpenClaw   Project ") == "openclaw project");
    CHECK(canonical_title("OpenClaw") == canonical_title("openclaw"));
    CHECK(canonical_title("A\tB") == "a b");
    CHECK(slug("Peter Steinberger!") == "peter-steinberger");
    CHECK(slug("!!!") == "page");
}

TEST_CASE("clock conversions") {
    CHECK(epoch_to_iso8601(0) == "1970-01-01T00:00:00Z");
    CHECK(epoch_to_iso8601(parse_epoch("2026-04-01T08:00:00Z")) == "2026-04-01T08:00:00Z");
    CHECK(parse_epoch("1746000000") == 1746000000);
    CHECK_THROWS_AS(parse_epoch("yesterday"), ConfigError);
    SteppingClock clock(100, 5);
    CHECK(clock.now_epoch_seconds() == 100);
    CHECK(clock.now_epoch_seconds() == 105);
}

TEST_CASE("extract_links examples") {
    CHECK(extract_links("see [[OpenClaw]] and [[OpenClaw]]") ==
          std::vector<std::string>{"OpenClaw", "OpenClaw"});
    CHECK(extract_links("no links here").empty());
    CHECK(extract_links("broken [[half").empty());
    CHECK(extract_links("[[ spaced out ]]") == std::vector<std::string>{"spaced out"});
    CHECK(extract_links("[[]]").empty());
    CHECK(extract_links("[[ ]]").empty());
    CHECK(extract_links("[[[x]]") == std::vector<std::string>{"x"});
    CHECK(extract_links("[[a]] then [[b]]") == std::vector<std::string>{"a", "b"});
    CHECK(extract_links("[[a\nb]]").empty());
}

TEST_CASE("extract_links agrees with regex oracle on random bracket soup") {
    std::mt19937 rng(20260401);
    const std::string alphabet = "[]ab \n";
    std::uniform_int_distribution<int> len(0, 40);
    std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
    for (int i = 0; i < 1000; ++i) {
        std::string s;
        int n = len(rng);
        for (int k = 0; k < n; ++k) s += alphabet[pick(rng)];
        CAPTURE(s);
        CHECK(extract_links(s) == regex_links(s));
    }
}

TEST_CASE("rewrite_links rewrites canonically equal targets only") {
    std::string body = "uses [[openclaw]] and [[OpenClaw  Agent]], not [[half";
    std::string out = rewrite_links(body, "openclaw", "OpenClaw");
    CHECK(out == "uses [[OpenClaw]] and [[OpenClaw  Agent]], not [[half");
    CHECK(rewrite_links("[[a]][[b]]", "b", "c") == "[[a]][[c]]");
    CHECK(rewrite_links("plain text", "a", "b") == "plain text");
}

TEST_CASE("page serialization round trip") {
    WikiPage p;
    p.path = "wiki/entities/openclaw.md";
    p.kind = PageKind::entity;
    p.title = "OpenClaw";
    p.importance = 5;
    p.created_at = "2026-04-01T08:00:00Z";
    p.updated_at = "2026-04-01T09:00:00Z";
    p.body = "Built by [[Peter Steinberger]].\n\n## Facts\n\n- 2021: Released.";
    refresh_links(p);

    std::string text = serialize_page(p);
    WikiPage q = parse_page(p.path, text);
    CHECK(q.title == p.title);
    CHECK(q.kind == p.kind);
    CHECK(q.importance == p.importance);
    CHECK(q.created_at == p.created_at);
    CHECK(q.updated_at == p.updated_at);
    CHECK(q.body == p.body);
    CHECK(q.links == std::vector<std::string>{"Peter Steinberger"});
    CHECK(serialize_page(q) == text);
}

TEST_CASE("page parse errors") {
    CHECK_THROWS_AS(parse_page("x.md", "no header at all"), PageFormatError);
    CHECK_THROWS_AS(parse_page("x.md", "---\ntitle: X\n---\n"), PageFormatError);
    std::string bad_importance =
        "---\ntitle: X\nkind: entity\nimportance: 9\ncreated_at: t\nupdated_at: t\n---\n\nbody";
    CHECK_THROWS_AS(parse_page("x.md", bad_importance), PageFormatError);
}

TEST_CASE("vault init and open") {
    TempDir tmp;
    fs::path root = tmp.path / "vault";
    VaultLayout vault = init_vault(root);
    CHECK(is_vault(root));
    CHECK(fs::exists(vault.index_path));
    CHECK(fs::exists(vault.manifest_path));
    CHECK(vault.default_page_path(PageKind::entity, "Peter Steinberger") ==
          fs::path("wiki/entities/peter-steinberger.md"));

    std::string before = hash_tree(root);
    init_vault(root);  // idempotent on an existing vault
    CHECK(hash_tree(root) == before);

    fs::path messy = tmp.path / "messy";
    fs::create_directories(messy);
    write_file(messy / "stray.txt", "not a vault");
    CHECK_THROWS_AS(init_vault(messy), VaultError);
    CHECK_THROWS_AS(open_vault(tmp.path / "missing"), VaultError);
}

TEST_CASE("manifest delta detection") {
    VaultManifest m = VaultManifest::parse(
        R"({"source":"raw/a.md","content_hash":"sha256:1","ingested_at":"t","produced_pages":[]})"
        "\n"
        R"({"source":"raw/a.md","content_hash":"sha256:2","ingested_at":"t","produced_pages":[]})"
        "\n");
    CHECK(m.entries.size() == 1);
    CHECK(m.entries.at("raw/a.md").content_hash == "sha256:2");  // last line wins
    CHECK(m.needs_ingest("raw/b.md", "sha256:x"));
    CHECK(m.needs_ingest("raw/a.md", "sha256:3"));
    CHECK_FALSE(m.needs_ingest("raw/a.md", "sha256:2"));
    CHECK_THROWS_AS(VaultManifest::parse("{\"nope\":1}\n"), VaultError);
}

TEST_CASE("journal enforces write budget over distinct paths") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    TaskJournal journal(vault, "t1");
    for (int i = 0; i < 8; ++i) {
        journal.stage_write("wiki/entities/p" + std::to_string(i) + ".md", "x");
    }
    CHECK(journal.staged_count() == 8);
    journal.stage_write("wiki/entities/p0.md", "restaged");  // same path, no new slot
    CHECK(journal.staged_count() == 8);
    CHECK_THROWS_AS(journal.stage_write("wiki/entities/p8.md", "x"), BudgetExceededError);
    CHECK_THROWS_AS(journal.stage_delete("wiki/entities/p9.md"), BudgetExceededError);
    journal.rollback();
}

TEST_CASE("journal rejects raw layer and foreign paths") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    TaskJournal journal(vault, "t1");
    CHECK_THROWS_AS(journal.stage_write("raw/source.md", "x"), RawContaminationError);
    CHECK_THROWS_AS(journal.stage_write("../outside.md", "x"), JournalError);
    CHECK_THROWS_AS(journal.stage_write("memory.jsonl", "x"), JournalError);
    journal.stage_write("manifest.jsonl", "");  // manifest is journal-writable
    journal.rollback();
}

TEST_CASE("stage_page validates kind directory") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    TaskJournal journal(vault, "t1");
    WikiPage p = make_page(vault, PageKind::entity, "OpenClaw", 5, "body");
    p.path = "wiki/concepts/openclaw.md";  // entity staged into concepts dir
    CHECK_THROWS_AS(journal.stage_page(p), JournalError);
    journal.rollback();
}

TEST_CASE("single writer lock") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    auto first = std::make_unique<TaskJournal>(vault, "t1");
    CHECK_THROWS_AS(TaskJournal(vault, "t2"), VaultLockedError);
    first->rollback();
    TaskJournal second(vault, "t3");  // lock released by rollback
    second.rollback();
}

TEST_CASE("rollback is byte identity for any staged script") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    commit_pages(vault, {make_page(vault, PageKind::entity, "Existing", 3, "keep me")});
    std::string before = hash_tree(vault.root);

    std::mt19937 rng(7);
    for (int round = 0; round < 20; ++round) {
        TaskJournal journal(vault, "round" + std::to_string(round));
        std::uniform_int_distribution<int> count(0, 8);
        int k = count(rng);
        for (int i = 0; i < k; ++i) {
            switch (rng() % 3) {
                case 0:
                    journal.stage_write("wiki/entities/new" + std::to_string(i) + ".md", "x");
                    break;
                case 1: journal.stage_delete("wiki/entities/existing.md"); break;
                default: journal.stage_write("wiki/index.md", "# Index rewritten\n"); break;
            }
        }
        journal.rollback();
        CHECK(hash_tree(vault.root) == before);
    }
}

TEST_CASE("commit applies staged writes and retries transient faults") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    TaskJournal journal(vault, "t1");
    WikiPage p = make_page(vault, PageKind::entity, "OpenClaw", 5, "body");
    journal.stage_page(p);
    update_index(vault, journal, p);

    int faults_left = 2;
    CommitReport report = journal.commit([&](const fs::path& target, int) {
        if (target == p.path && faults_left > 0) {
            --faults_left;
            throw TaskWriteError("transient");
        }
    });
    CHECK(report.files_applied == 2);
    CHECK(report.retries == 2);
    CHECK(journal.state() == JournalState::committed);
    CHECK(load_page(vault, p.path).title == "OpenClaw");
    CHECK_FALSE(fs::exists(vault.lock_path));
    CHECK_FALSE(fs::exists(vault.journal_dir));
}

TEST_CASE("exhausted retries roll the whole task back") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    commit_pages(vault, {make_page(vault, PageKind::entity, "Existing", 3, "original")});
    std::string before = hash_tree(vault.root);

    TaskJournal journal(vault, "t1");
    WikiPage updated = load_page(vault, "wiki/entities/existing.md");
    updated.body = "mutated";
    refresh_links(updated);
    journal.stage_page(updated);  // applies first, must be restored
    journal.stage_write("wiki/entities/doomed.md", "never lands");

    CHECK_THROWS_AS(journal.commit([&](const fs::path& target, int) {
        if (target == fs::path("wiki/entities/doomed.md")) throw TaskWriteError("disk full");
    }),
                    TaskRolledBackError);
    CHECK(hash_tree(vault.root) == before);
    CHECK_FALSE(fs::exists(vault.lock_path));
    TaskJournal next(vault, "t2");  // vault usable again
    next.rollback();
}

TEST_CASE("crash mid-commit leaves a recoverable journal") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    commit_pages(vault, {make_page(vault, PageKind::entity, "Existing", 3, "original")});
    std::string before = hash_tree(vault.root);

    // Leaked deliberately: a crashed process never runs destructors.
    auto* journal = new TaskJournal(vault, "t1");
    WikiPage updated = load_page(vault, "wiki/entities/existing.md");
    updated.body = "half applied";
    refresh_links(updated);
    journal->stage_page(updated);
    journal->stage_write("wiki/entities/late.md", "x");

    bool applied_one = false;
    CHECK_THROWS_AS(journal->commit([&](const fs::path& target, int) {
        if (target == fs::path("wiki/entities/late.md")) {
            applied_one = true;
            throw std::runtime_error("power cut");
        }
    }),
                    std::runtime_error);
    CHECK(applied_one);
    CHECK(TaskJournal::needs_recovery(vault));
    CHECK(hash_tree(vault.root) != before);  // first write already landed
    CHECK_THROWS_AS(TaskJournal(vault, "t2"), VaultLockedError);

    TaskJournal::recover(vault);
    CHECK(hash_tree(vault.root) == before);
    CHECK_FALSE(TaskJournal::needs_recovery(vault));
    TaskJournal fresh(vault, "t3");
    fresh.rollback();
}

TEST_CASE("fact lines parse and render") {
    auto dated = parse_fact_line("- 2021: Released [[OpenClaw]].");
    REQUIRE(dated.has_value());
    CHECK(dated->date == "2021");
    CHECK(dated->statement == "Released [[OpenClaw]].");
    auto undated = parse_fact_line("- Maintains a popular blog.");
    REQUIRE(undated.has_value());
    CHECK_FALSE(undated->date.has_value());
    CHECK(parse_fact_line("not a bullet") == std::nullopt);
    CHECK(parse_fact_line("- 2026-13: bad month")->date == std::nullopt);  // plain statement
    CHECK(render_fact_line(*dated) == "- 2021: Released [[OpenClaw]].");
    CHECK(is_fact_date("2026-03"));
    CHECK_FALSE(is_fact_date("203"));
    CHECK_FALSE(is_fact_date("2026-3"));
}

TEST_CASE("merge_facts orders chronologically with undated last") {
    std::vector<FactLine> existing = {{"2021", "a"}, {"2024", "b"}};
    std::vector<FactLine> incoming = {{"2020", "c"}, {"2026", "d"}, {"2023", "e"}};
    int added = 0;
    auto merged = merge_facts(existing, incoming, &added);
    CHECK(added == 3);
    std::vector<std::string> dates;
    for (const auto& f : merged) dates.push_back(*f.date);
    CHECK(dates == std::vector<std::string>{"2020", "2021", "2023", "2024", "2026"});

    auto deduped = merge_facts(merged, {{"2019", "a"}, {std::nullopt, "fresh"}}, &added);
    CHECK(added == 1);  // "a" already present
    CHECK(deduped.back().statement == "fresh");
    CHECK_FALSE(deduped.back().date.has_value());
}

TEST_CASE("merge_facts matches a brute-force sort oracle") {
    std::mt19937 rng(99);
    for (int round = 0; round < 200; ++round) {
        std::vector<FactLine> existing, incoming;
        auto random_fact = [&](int i) {
            FactLine f;
            if (rng() % 4 != 0) f.date = std::to_string(2015 + static_cast<int>(rng() % 12));
            f.statement = "fact " + std::to_string(i);
            return f;
        };
        int n = rng() % 6, m = rng() % 6;
        for (int i = 0; i < n; ++i) existing.push_back(random_fact(static_cast<int>(rng() % 8)));
        for (int i = 0; i < m; ++i) incoming.push_back(random_fact(static_cast<int>(rng() % 8)));
        auto merged = merge_facts(existing, incoming);

        // Oracle: concatenate, drop repeated statements, stable sort on date.
        std::vector<FactLine> oracle;
        for (const auto& f : existing) oracle.push_back(f);
        for (const auto& f : incoming) oracle.push_back(f);
        std::vector<FactLine> unique;
        for (const auto& f : oracle) {
            bool seen = false;
            for (const auto& u : unique) seen = seen || u.statement == f.statement;
            if (!seen) unique.push_back(f);
        }
        std::stable_sort(unique.begin(), unique.end(), [](const FactLine& a, const FactLine& b) {
            std::string ka = a.date.value_or("~");  // '~' sorts after digits
            std::string kb = b.date.value_or("~");
            return ka < kb;
        });
        CHECK(merged == unique);
    }
}

TEST_CASE("facts section replace and strip") {
    std::string body = "Intro text.\n\n## Facts\n\n- 2021: old\n\n## Notes\n\nKeep this.";
    std::string replaced = replace_facts_section(body, {{"2020", "new"}});
    CHECK(replaced.find("- 2020: new") != std::string::npos);
    CHECK(replaced.find("- 2021: old") == std::string::npos);
    CHECK(replaced.find("Keep this.") != std::string::npos);
    CHECK(extract_facts(replaced).size() == 1);

    std::string stripped = strip_facts_section(body);
    CHECK(stripped.find("## Facts") == std::string::npos);
    CHECK(stripped.find("Keep this.") != std::string::npos);

    std::string appended = replace_facts_section("No section yet.", {{std::nullopt, "solo"}});
    CHECK(extract_facts(appended).size() == 1);
}

TEST_CASE("index stays sorted and costs one write per task") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    TaskJournal journal(vault, "t1", {.write_budget = 8});
    std::vector<std::string> titles = {"Zeta", "Alpha", "Mid", "alpha two", "Beta", "Omega"};
    for (const auto& t : titles) {
        WikiPage p = make_page(vault, PageKind::entity, t, 3, "body");
        journal.stage_page(p);
        update_index(vault, journal, p);
    }
    CHECK(journal.staged_count() == 7);  // 6 pages + 1 index slot
    journal.commit();

    IndexDoc doc = parse_index(read_file(vault.index_path));
    const auto& entities = doc.groups.at(PageKind::entity);
    CHECK(entities == std::vector<std::string>{"Alpha", "alpha two", "Beta", "Mid", "Omega",
                                               "Zeta"});

    TaskJournal again(vault, "t2");
    WikiPage p = make_page(vault, PageKind::entity, "ALPHA", 3, "body");
    CHECK_FALSE(update_index(vault, again, p));  // canonically present already
    CHECK(again.staged_count() == 0);
    again.rollback();
}

TEST_CASE("lint finds dangling links, orphans, and raw mutations") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");

    std::vector<WikiPage> pages;
    for (int i = 0; i < 10; ++i) {
        std::string title = "Page " + std::to_string(i);
        std::string body = i + 1 < 10 ? "next: [[Page " + std::to_string(i + 1) + "]]" : "end";
        pages.push_back(make_page(vault, PageKind::entity, title, 3, body));
    }
    // Chain 0->1->...->9 leaves 0 unlinked; cut the 8->9 edge for a second orphan.
    pages[8].body = "no more links";
    refresh_links(pages[8]);
    commit_pages(vault, pages);

    LintReport clean = lint_vault(vault);
    CHECK(clean.pages_checked == 10);
    CHECK(clean.dangling_links.empty());
    CHECK(clean.orphan_pages.size() == 2);
    CHECK(clean.orphan_rate() == doctest::Approx(0.2));
    CHECK(clean.index_missing.empty());
    CHECK(clean.raw_violations.empty());

    // A page pointing nowhere, a mutated raw source, and a corrupt page file.
    commit_pages(vault, {make_page(vault, PageKind::concept_page, "Pointer", 3, "[[Nonexistent]]")});
    write_file(vault.raw_dir / "notes.md", "tampered");
    append_line_durable(vault.manifest_path,
                        manifest_entry_line({"raw/notes.md", "sha256:stale", "t", {}}));
    write_file(vault.entities_dir / "broken.md", "not a page");

    LintReport dirty = lint_vault(vault);
    REQUIRE(dirty.dangling_links.size() == 1);
    CHECK(dirty.dangling_links[0].target == "Nonexistent");
    REQUIRE(dirty.raw_violations.size() == 1);
    CHECK(dirty.raw_violations[0].detail == "mutated");
    CHECK(dirty.unreadable_files.size() == 1);
    CHECK_FALSE(dirty.clean());
    CHECK(format_lint_report(dirty).find("Nonexistent") != std::string::npos);
}

TEST_CASE("merge combines duplicate pages and rewrites inbound links") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");

    WikiPage older = make_page(vault, PageKind::entity, "OpenClaw", 4,
                               "First take.\n\n## Facts\n\n- 2024: beta shipped");
    older.created_at = "2026-01-01T00:00:00Z";
    WikiPage newer = make_page(vault, PageKind::entity, "openclaw", 5,
                               "Second take.\n\n## Facts\n\n- 2025: v1 shipped\n- 2026: v2");
    newer.path = "wiki/entities/openclaw-2.md";
    newer.created_at = "2026-02-01T00:00:00Z";
    WikiPage fan = make_page(vault, PageKind::entity, "Fan", 2, "Loves [[openclaw]].");
    commit_pages(vault, {older, newer, fan});

    SteppingClock clock(parse_epoch("2026-04-02T08:00:00Z"));
    TaskJournal journal(vault, "merge");
    MergeReport report = merge_duplicates(vault, journal, clock);
    journal.commit();

    REQUIRE(report.merged_groups.size() == 1);
    CHECK_FALSE(report.rolled_back);
    CHECK(report.merged_groups[0].survivor == fs::path("wiki/entities/openclaw.md"));
    CHECK(report.merged_groups[0].absorbed ==
          std::vector<fs::path>{"wiki/entities/openclaw-2.md"});
    CHECK(report.inbound_rewrites == 1);
    CHECK_FALSE(fs::exists(vault.abs("wiki/entities/openclaw-2.md")));

    WikiPage merged = load_page(vault, "wiki/entities/openclaw.md");
    CHECK(merged.importance == 5);
    CHECK(merged.body.find("Merged from \"openclaw\"") != std::string::npos);
    auto facts = extract_facts(merged.body);
    REQUIRE(facts.size() == 3);
    CHECK(*facts[0].date == "2024");
    CHECK(*facts[2].date == "2026");
    CHECK(load_page(vault, "wiki/entities/fan.md").body == "Loves [[OpenClaw]].");

    LintReport lint = lint_vault(vault);
    CHECK(lint.dangling_links.empty());
    IndexDoc doc = parse_index(read_file(vault.index_path));
    CHECK(doc.groups.at(PageKind::entity) == std::vector<std::string>{"Fan", "OpenClaw"});
}

TEST_CASE("three-way merge orders interleaved dated facts") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    WikiPage a = make_page(vault, PageKind::concept_page, "Topic", 3, "## Facts\n\n- 2025: mid");
    a.created_at = "2026-01-01T00:00:00Z";
    WikiPage b = make_page(vault, PageKind::concept_page, "topic", 3, "## Facts\n\n- 2026: late");
    b.path = "wiki/concepts/topic-2.md";
    b.created_at = "2026-01-02T00:00:00Z";
    WikiPage c = make_page(vault, PageKind::concept_page, "TOPIC", 3, "## Facts\n\n- 2024: early");
    c.path = "wiki/concepts/topic-3.md";
    c.created_at = "2026-01-03T00:00:00Z";
    commit_pages(vault, {a, b, c});

    SteppingClock clock(parse_epoch("2026-04-02T08:00:00Z"));
    TaskJournal journal(vault, "merge");
    merge_duplicates(vault, journal, clock);
    journal.commit();

    auto facts = extract_facts(load_page(vault, "wiki/concepts/topic.md").body);
    std::vector<std::string> dates;
    for (const auto& f : facts) dates.push_back(f.date.value_or("?"));
    std::vector<std::string> sorted_dates = dates;
    std::sort(sorted_dates.begin(), sorted_dates.end());
    CHECK(dates == sorted_dates);
    CHECK(dates == std::vector<std::string>{"2024", "2025", "2026"});
}

TEST_CASE("merge without duplicates stages nothing") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    commit_pages(vault, {make_page(vault, PageKind::entity, "Solo", 3, "alone")});
    SteppingClock clock(parse_epoch("2026-04-02T08:00:00Z"));
    TaskJournal journal(vault, "merge");
    MergeReport report = merge_duplicates(vault, journal, clock);
    CHECK(report.merged_groups.empty());
    CHECK(journal.staged_count() == 0);
    journal.rollback();
}

TEST_CASE("merge rolls back when the budget cannot hold the groups") {
    TempDir tmp;
    VaultLayout vault = init_vault(tmp.path / "v");
    std::vector<WikiPage> pages;
    for (int g = 0; g < 5; ++g) {
        for (int d = 0; d < 2; ++d) {
            std::string title = d == 0 ? "Group " + std::to_string(g)
                                       : "group " + std::to_string(g);
            WikiPage p = make_page(vault, PageKind::entity, title, 3, "body " + std::to_string(d));
            if (d == 1) p.path = "wiki/entities/group-" + std::to_string(g) + "-dup.md";
            p.created_at = d == 0 ? "2026-01-01T00:00:00Z" : "2026-01-02T00:00:00Z";
            pages.push_back(p);
        }
    }
    commit_pages(vault, pages);
    std::string before = hash_tree(vault.root);

    SteppingClock clock(parse_epoch("2026-04-02T08:00:00Z"));
    TaskJournal journal(vault, "merge");  // default budget of 8 < 10 staged writes
    MergeReport report = merge_duplicates(vault, journal, clock);
    CHECK(report.rolled_back);
    CHECK(report.merged_groups.empty());
    CHECK(report.remaining_groups.size() == 5);
    CHECK(journal.state() == JournalState::rolled_back);
    CHECK(hash_tree(vault.root) == before);
}
