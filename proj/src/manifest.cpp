#include "oslab/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace oslab {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string digest_hex(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file for digest: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return digest_hex(ss.str());
}

std::string current_utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& dir) {
    nlohmann::ordered_json j;
    j["kind"] = manifest.kind;
    j["config_digest"] = manifest.configDigest;
    j["tool_version"] = manifest.toolVersion;
    j["started_at"] = manifest.startedAt;
    j["finished_at"] = manifest.finishedAt;
    j["workers"] = manifest.workers;
    j["seed"] = manifest.seed;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& o : manifest.outputs) {
        j["outputs"].push_back({{"name", o.name}, {"digest", o.digest}});
    }
    j["notes"] = manifest.notes;

    namespace fs = std::filesystem;
    const fs::path target = fs::path(dir) / "manifest.json";
    const fs::path tmp = fs::path(dir) / "manifest.json.tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out << j.dump(2) << '\n';
        if (!out.good()) throw IoError("failed writing manifest: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot move manifest into place: " + ec.message());
}

} // namespace oslab
