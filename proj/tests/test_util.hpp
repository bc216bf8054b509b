#ifndef CFR_TEST_UTIL_HPP
#define CFR_TEST_UTIL_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cfr/taxonomy.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) {
    const char* env = std::getenv("CFR_DATA");
    return (env ? std::string(env) : std::string("data")) + "/" + name;
}

inline const cfr::Taxonomy& default_taxonomy() {
    static cfr::Taxonomy t = cfr::Taxonomy::load_file(data_path("taxonomy.json"));
    return t;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// fresh scratch directory per test binary run
inline std::string scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("cfr_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

// three-level toy taxonomy used by the brute-force enumeration properties
inline cfr::Taxonomy toy_taxonomy() {
    return cfr::Taxonomy::from_json_text(R"({
        "name": "root",
        "children": [
            {"name": "A", "children": [
                {"name": "A1", "children": [{"name": "A1a", "children": []}]},
                {"name": "A2", "children": []}
            ]},
            {"name": "B", "children": [
                {"name": "B1", "children": []}
            ]}
        ]
    })");
}

}  // namespace testutil

#endif
