#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oslab/errors.hpp"

namespace oslab {

// 64-bit FNV-1a over a byte string; cheap, stable across platforms, good
// enough for change detection (not a cryptographic hash).
std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_hex(const std::string& bytes);
std::string digest_file(const std::string& path);

struct OutputRecord {
    std::string name;   // path relative to the run directory
    std::string digest; // hex digest of the file contents
};

struct RunManifest {
    std::string kind;
    std::string configDigest;
    std::string toolVersion;
    std::string startedAt;  // ISO 8601 UTC
    std::string finishedAt;
    int workers = 1;
    std::uint64_t seed = 0;
    std::vector<OutputRecord> outputs;
    std::vector<std::string> notes;
};

std::string current_utc_timestamp();

// Serializes to manifest.json inside `dir`. Written to a temp file first and
// renamed into place so a crash never leaves a half-written manifest.
void write_manifest(const RunManifest& manifest, const std::string& dir);

} // namespace oslab
