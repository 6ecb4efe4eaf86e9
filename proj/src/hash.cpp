#include "sediment/hash.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <vector>

#include "sediment/error.hpp"
#include "sediment/io.hpp"

namespace sediment {

namespace {

std::string digest_hex(const unsigned char* data, std::size_t len) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int md_len = 0;
    if (EVP_Digest(data, len, md, &md_len, EVP_sha256(), nullptr) != 1) {
        throw EngineError("sha256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out = "sha256:";
    out.reserve(7 + md_len * 2);
    for (unsigned int i = 0; i < md_len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    return digest_hex(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
}

std::string sha256_file(const std::filesystem::path& file) {
    return sha256_hex(read_file(file));
}

std::string hash_tree(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    if (fs::exists(dir)) {
        for (const auto& entry : fs::recursive_directory_iterator(dir)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) {
        acc += fs::relative(f, dir).generic_string();
        acc += '\0';
        acc += sha256_file(f);
        acc += '\n';
    }
    return sha256_hex(acc);
}

}  // namespace sediment
