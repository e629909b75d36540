#ifndef MALEX_IO_HPP
#define MALEX_IO_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "malex/errors.hpp"

namespace malex {

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace malex

#endif  // MALEX_IO_HPP
