#include "sediment/layout.hpp"

#include "sediment/error.hpp"
#include "sediment/io.hpp"
#include "sediment/text.hpp"

namespace sediment {

namespace fs = std::filesystem;

VaultLayout VaultLayout::at(const fs::path& root) {
    VaultLayout v;
    v.root = root;
    v.raw_dir = root / "raw";
    v.wiki_dir = root / "wiki";
    v.output_dir = root / "output";
    v.sources_dir = v.wiki_dir / "sources";
    v.entities_dir = v.wiki_dir / "entities";
    v.concepts_dir = v.wiki_dir / "concepts";
    v.synthesis_dir = v.wiki_dir / "synthesis";
    v.index_path = v.wiki_dir / "index.md";
    v.manifest_path = root / "manifest.jsonl";
    v.memory_path = root / "memory.jsonl";
    v.lock_path = root / ".vault.lock";
    v.journal_dir = root / ".journal";
    return v;
}

fs::path VaultLayout::kind_dir(PageKind kind) const {
    switch (kind) {
        case PageKind::source_summary: return sources_dir;
        case PageKind::entity: return entities_dir;
        case PageKind::concept_page: return concepts_dir;
        case PageKind::synthesis: return synthesis_dir;
    }
    throw VaultError("unknown page kind");
}

fs::path VaultLayout::abs(const fs::path& vault_relative) const {
    return root / vault_relative;
}

fs::path VaultLayout::rel(const fs::path& absolute) const {
    return fs::relative(absolute, root);
}

fs::path VaultLayout::default_page_path(PageKind kind, const std::string& title) const {
    return rel(kind_dir(kind)) / (slug(title) + ".md");
}

bool is_vault(const fs::path& root) {
    VaultLayout v = VaultLayout::at(root);
    return fs::is_directory(v.raw_dir) && fs::is_directory(v.sources_dir) &&
           fs::is_directory(v.entities_dir) && fs::is_directory(v.concepts_dir) &&
           fs::is_directory(v.synthesis_dir) && fs::is_directory(v.output_dir) &&
           fs::is_regular_file(v.index_path) && fs::is_regular_file(v.manifest_path);
}

VaultLayout init_vault(const fs::path& root) {
    if (fs::exists(root)) {
        if (!fs::is_directory(root)) throw VaultError(root.string() + " is not a directory");
        if (is_vault(root)) return VaultLayout::at(root);
        if (!fs::is_empty(root)) {
            throw VaultError(root.string() + " is not empty and not a vault");
        }
    }
    VaultLayout v = VaultLayout::at(root);
    fs::create_directories(v.raw_dir);
    fs::create_directories(v.sources_dir);
    fs::create_directories(v.entities_dir);
    fs::create_directories(v.concepts_dir);
    fs::create_directories(v.synthesis_dir);
    fs::create_directories(v.output_dir);
    write_file(v.index_path, "# Index\n");
    write_file(v.manifest_path, "");
    return v;
}

VaultLayout open_vault(const fs::path& root) {
    if (!is_vault(root)) throw VaultError(root.string() + " is not a vault");
    return VaultLayout::at(root);
}

WikiPage load_page(const VaultLayout& vault, const fs::path& vault_relative) {
    return parse_page(vault_relative, read_file(vault.abs(vault_relative)));
}

}  // namespace sediment
