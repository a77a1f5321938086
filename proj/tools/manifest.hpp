#pragma once

// Run manifest written next to every command's outputs: tool version, input
// and output digests, the effective configuration, per-stage timings and the
// error (if any).

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace reefmap::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

class Manifest {
public:
    Manifest(std::string command, std::filesystem::path path);

    const std::filesystem::path& path() const { return path_; }

    void set_config(nlohmann::json config) { doc_["config"] = std::move(config); }
    void note(const std::string& key, nlohmann::json value) { doc_["notes"][key] = std::move(value); }

    // Directories are digested file by file in name order.
    void add_input(const std::filesystem::path& p);

    // Writes `bytes` to `p` and records its digest.
    void write_output(const std::filesystem::path& p, const std::string& bytes);
    // Records a file or directory that was written by other means.
    void add_output(const std::filesystem::path& p);

    void fail(const std::string& kind, const std::string& message);

    // Starts a named stage; the previous one (if any) is closed.
    void stage(const std::string& name);

    // Closes the open stage and writes the manifest. Never throws.
    bool save();

private:
    void record(nlohmann::json& list, const std::filesystem::path& p);
    void close_stage();

    std::string command_;
    std::filesystem::path path_;
    nlohmann::json doc_;
    std::string open_stage_;
    std::chrono::steady_clock::time_point stage_start_;
};

}  // namespace reefmap::cli
