#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bemflow/idd_schema.hpp"

namespace testutil {

inline std::filesystem::path repo_root() { return std::filesystem::path(BEMFLOW_REPO_ROOT); }
inline std::filesystem::path fixtures() { return repo_root() / "tests" / "fixtures"; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline const bemflow::idd::IddSchema& schema() {
    static const bemflow::idd::IddSchema s = bemflow::idd::parse_idd(
        read_file(repo_root() / "share" / "idd" / "energyplus_core.idd"));
    return s;
}

}  // namespace testutil
