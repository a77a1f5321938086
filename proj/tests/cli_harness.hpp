#pragma once

// Runs the reefmap executable as a child process and captures its streams.

#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace harness {

namespace fs = std::filesystem;

struct Result {
    int code = -1;
    std::string out;
    std::string err;

    // Parses `key=value` lines of stdout; later keys win.
    std::map<std::string, std::string> values() const {
        std::map<std::string, std::string> m;
        std::istringstream in(out);
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) m[line.substr(0, eq)] = line.substr(eq + 1);
        }
        return m;
    }
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& p, const std::string& bytes) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary | std::ios::trunc) << bytes;
}

// Removes every scratch directory when the test process exits.
struct ScratchRegistry {
    std::vector<fs::path> dirs;
    ~ScratchRegistry() {
        std::error_code ec;
        for (const auto& d : dirs) fs::remove_all(d, ec);
    }
};

// Fresh, unique scratch directory under the system temp dir.
inline fs::path scratch(const std::string& tag) {
    static ScratchRegistry registry;
    static std::atomic<int> counter{0};
    const auto dir = fs::temp_directory_path() /
                     ("reefmap_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    registry.dirs.push_back(dir);
    return dir;
}

inline std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

// `args` is appended verbatim; quote paths with quote().
inline Result run(const std::string& args, const fs::path& workdir) {
    const auto out_path = workdir / ".stdout";
    const auto err_path = workdir / ".stderr";
    const std::string cmd = "cd " + quote(workdir.string()) + " && " + quote(REEFMAP_CLI) + " " + args + " >" +
                            quote(out_path.string()) + " 2>" + quote(err_path.string());
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

}  // namespace harness
