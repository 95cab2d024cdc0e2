#ifndef MCCM_IO_HPP
#define MCCM_IO_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mccm/cascade.hpp"
#include "mccm/spectrum.hpp"

namespace mccm {

// Shortest-roundtrip decimal for a double ("%.17g"); bit-exact on read-back.
std::string format_double(double v);

void write_field_bin(const CascadeField& field, const std::filesystem::path& path);
CascadeField read_field_bin(const std::filesystem::path& path);
void write_field_csv(const CascadeField& field, const std::filesystem::path& path);

void write_spectrum_bin(const Spectrum& sp, const std::filesystem::path& path);
Spectrum read_spectrum_bin(const std::filesystem::path& path);
void write_spectrum_csv(const Spectrum& sp, const std::filesystem::path& path);
Spectrum read_spectrum_csv(const std::filesystem::path& path);
void write_spectrum_json(const Spectrum& sp, const std::filesystem::path& path);
Spectrum read_spectrum_json(const std::filesystem::path& path);
Spectrum read_spectrum(const std::filesystem::path& path);  // by extension

std::string fnv1a_digest_bytes(const void* data, std::size_t n);
std::string fnv1a_digest_file(const std::filesystem::path& path);

// Every run writes a manifest before its data files are considered valid:
// command echo, full config echo, master seed, wall time, output digests.
struct RunManifest {
  std::string command;
  nlohmann::json* config = nullptr;  // borrowed during write only
  std::uint64_t master_seed = 0;
  double wall_seconds = 0;
  std::map<std::string, std::string> output_digests;
};

void write_manifest(const RunManifest& m, const nlohmann::json& config,
                    const std::filesystem::path& path);

}  // namespace mccm

#endif
