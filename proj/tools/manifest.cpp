#include "manifest.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

#include "reefmap/errors.hpp"
#include "reefmap/ingest.hpp"

namespace reefmap::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[md[k] >> 4];
        out += hex[md[k] & 0xf];
    }
    return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

Manifest::Manifest(std::string command, fs::path path) : command_(std::move(command)), path_(std::move(path)) {
    doc_["tool"] = "reefmap";
    doc_["version"] = REEFMAP_VERSION;
    doc_["command"] = command_;
    doc_["status"] = "ok";
    doc_["inputs"] = nlohmann::json::array();
    doc_["outputs"] = nlohmann::json::array();
    doc_["timings_ms"] = nlohmann::json::object();
    doc_["config"] = nlohmann::json::object();
}

void Manifest::record(nlohmann::json& list, const fs::path& p) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(p)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        nlohmann::json entry{{"path", p.string()}, {"kind", "directory"}, {"files", nlohmann::json::array()}};
        std::string combined;
        for (const auto& f : files) {
            const auto digest = sha256_file(f);
            combined += f.filename().string() + ":" + digest + "\n";
            entry["files"].push_back({{"name", f.filename().string()}, {"sha256", digest}});
        }
        entry["sha256"] = sha256_hex(combined);
        list.push_back(std::move(entry));
        return;
    }
    const auto bytes = read_file(p);
    list.push_back({{"path", p.string()}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
}

void Manifest::add_input(const fs::path& p) { record(doc_["inputs"], p); }

void Manifest::write_output(const fs::path& p, const std::string& bytes) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(p.string() + ": cannot write");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(p.string() + ": write failed");
    out.close();
    doc_["outputs"].push_back({{"path", p.string()}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
}

void Manifest::add_output(const fs::path& p) { record(doc_["outputs"], p); }

void Manifest::fail(const std::string& kind, const std::string& message) {
    doc_["status"] = "error";
    doc_["error"] = {{"kind", kind}, {"message", message}};
}

void Manifest::close_stage() {
    if (open_stage_.empty()) return;
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - stage_start_).count();
    doc_["timings_ms"][open_stage_] = ms;
    open_stage_.clear();
}

void Manifest::stage(const std::string& name) {
    close_stage();
    open_stage_ = name;
    stage_start_ = std::chrono::steady_clock::now();
}

bool Manifest::save() {
    close_stage();
    try {
        if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        out << doc_.dump(2) << '\n';
        return static_cast<bool>(out);
    } catch (...) {
        return false;
    }
}

}  // namespace reefmap::cli
