#include "sediment/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sediment/error.hpp"

namespace sediment {

namespace fs = std::filesystem;

namespace {

void write_fd_all(int fd, const std::string& content, const fs::path& file) {
    std::size_t off = 0;
    while (off < content.size()) {
        ssize_t n = ::write(fd, content.data() + off, content.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            int err = errno;
            ::close(fd);
            throw EngineError("write failed for " + file.string() + ": " + std::strerror(err));
        }
        off += static_cast<std::size_t>(n);
    }
}

}  // namespace

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw EngineError("cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw EngineError("read failed for " + file.string());
    return ss.str();
}

void write_file(const fs::path& file, const std::string& content) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw EngineError("cannot write " + file.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw EngineError("write failed for " + file.string());
}

void write_file_atomic(const fs::path& file, const std::string& content) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    fs::path tmp = file;
    tmp += ".tmp";
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw EngineError("cannot open temp file " + tmp.string());
    write_fd_all(fd, content, tmp);
    if (::fsync(fd) != 0) {
        ::close(fd);
        throw EngineError("fsync failed for " + tmp.string());
    }
    ::close(fd);
    std::error_code ec;
    fs::rename(tmp, file, ec);
    if (ec) {
        fs::remove(tmp);
        throw EngineError("rename failed for " + file.string() + ": " + ec.message());
    }
}

void append_line_durable(const fs::path& file, const std::string& line) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    int fd = ::open(file.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw EngineError("cannot open " + file.string() + " for append");
    write_fd_all(fd, line + "\n", file);
    if (::fsync(fd) != 0) {
        ::close(fd);
        throw EngineError("fsync failed for " + file.string());
    }
    ::close(fd);
}

std::vector<fs::path> list_files_sorted(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<fs::path> list_files_recursive_sorted(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace sediment
