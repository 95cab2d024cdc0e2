#include "mccm/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mccm/errors.hpp"

namespace mccm {

namespace {

constexpr char kFieldMagic[8] = {'M', 'C', 'C', 'M', 'F', 'L', 'D', '\0'};
constexpr char kSpecMagic[8] = {'M', 'C', 'C', 'M', 'S', 'P', 'C', '\0'};

struct FieldHeader {
  char magic[8];
  std::uint32_t version;
  std::uint32_t b;
  std::uint32_t depth;
  std::uint32_t reserved;
  std::uint64_t seed;
  char base_tag[16];
};

struct SpectrumHeader {
  char magic[8];
  std::uint32_t version;
  std::uint32_t b;
  std::uint32_t depth;
  std::uint32_t reserved;
  std::uint64_t seed;
  std::uint64_t kmax;
};

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream os(path, mode);
  if (!os) throw Error(ErrorCode::IOError, "cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream is(path, mode);
  if (!is) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  return is;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_bin(const CascadeField& field, const std::filesystem::path& path) {
  FieldHeader h{};
  std::memcpy(h.magic, kFieldMagic, 8);
  h.version = 1;
  h.b = static_cast<std::uint32_t>(field.spec.b);
  h.depth = static_cast<std::uint32_t>(field.depth);
  h.seed = field.seed;
  std::snprintf(h.base_tag, sizeof h.base_tag, "%s", field.base_tag().c_str());
  auto os = open_out(path, std::ios::binary);
  os.write(reinterpret_cast<const char*>(&h), sizeof h);
  os.write(reinterpret_cast<const char*>(field.masses.data()),
           static_cast<std::streamsize>(field.masses.size() * sizeof(double)));
}

CascadeField read_field_bin(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::binary);
  FieldHeader h{};
  is.read(reinterpret_cast<char*>(&h), sizeof h);
  if (!is || std::memcmp(h.magic, kFieldMagic, 8) != 0)
    throw Error(ErrorCode::IOError, "not a field dump: " + path.string());
  CascadeField f;
  f.spec.b = static_cast<int>(h.b);
  f.depth = static_cast<int>(h.depth);
  f.seed = h.seed;
  f.masses.resize(pow_u64(h.b, static_cast<int>(h.depth)));
  is.read(reinterpret_cast<char*>(f.masses.data()),
          static_cast<std::streamsize>(f.masses.size() * sizeof(double)));
  if (!is) throw Error(ErrorCode::IOError, "truncated field dump: " + path.string());
  return f;
}

void write_field_csv(const CascadeField& field, const std::filesystem::path& path) {
  auto os = open_out(path, std::ios::out);
  os << "index,mass\n";
  for (std::size_t k = 0; k < field.masses.size(); ++k)
    os << k << ',' << format_double(field.masses[k]) << '\n';
}

void write_spectrum_bin(const Spectrum& sp, const std::filesystem::path& path) {
  SpectrumHeader h{};
  std::memcpy(h.magic, kSpecMagic, 8);
  h.version = 1;
  h.b = static_cast<std::uint32_t>(sp.spec.b);
  h.depth = static_cast<std::uint32_t>(sp.depth);
  h.seed = sp.seed;
  h.kmax = sp.kmax;
  auto os = open_out(path, std::ios::binary);
  os.write(reinterpret_cast<const char*>(&h), sizeof h);
  os.write(reinterpret_cast<const char*>(sp.coeffs.data()),
           static_cast<std::streamsize>(sp.coeffs.size() * sizeof(std::complex<double>)));
}

Spectrum read_spectrum_bin(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::binary);
  SpectrumHeader h{};
  is.read(reinterpret_cast<char*>(&h), sizeof h);
  if (!is || std::memcmp(h.magic, kSpecMagic, 8) != 0)
    throw Error(ErrorCode::IOError, "not a spectrum dump: " + path.string());
  Spectrum sp;
  sp.spec.b = static_cast<int>(h.b);
  sp.depth = static_cast<int>(h.depth);
  sp.seed = h.seed;
  sp.kmax = h.kmax;
  sp.coeffs.resize(h.kmax + 1);
  is.read(reinterpret_cast<char*>(sp.coeffs.data()),
          static_cast<std::streamsize>(sp.coeffs.size() * sizeof(std::complex<double>)));
  if (!is) throw Error(ErrorCode::IOError, "truncated spectrum dump: " + path.string());
  return sp;
}

void write_spectrum_csv(const Spectrum& sp, const std::filesystem::path& path) {
  auto os = open_out(path, std::ios::out);
  os << "s,re,im,abs2\n";
  for (std::size_t s = 0; s < sp.coeffs.size(); ++s)
    os << s << ',' << format_double(sp.coeffs[s].real()) << ',' << format_double(sp.coeffs[s].imag())
       << ',' << format_double(std::norm(sp.coeffs[s])) << '\n';
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::in);
  std::string line;
  if (!std::getline(is, line) || line.rfind("s,re,im", 0) != 0)
    throw Error(ErrorCode::IOError, "not a spectrum csv: " + path.string());
  Spectrum sp;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::uint64_t s;
    double re, im, abs2;
    if (std::sscanf(line.c_str(), "%llu,%lf,%lf,%lf", reinterpret_cast<unsigned long long*>(&s),
                    &re, &im, &abs2) < 3)
      throw Error(ErrorCode::IOError, "bad spectrum row: " + line);
    sp.coeffs.emplace_back(re, im);
  }
  if (sp.coeffs.empty()) throw Error(ErrorCode::IOError, "empty spectrum: " + path.string());
  sp.kmax = sp.coeffs.size() - 1;
  return sp;
}

void write_spectrum_json(const Spectrum& sp, const std::filesystem::path& path) {
  nlohmann::json j;
  j["b"] = sp.spec.b;
  j["depth"] = sp.depth;
  j["seed"] = sp.seed;
  j["kmax"] = sp.kmax;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t s = 0; s < sp.coeffs.size(); ++s)
    rows.push_back({sp.coeffs[s].real(), sp.coeffs[s].imag()});
  j["coeffs"] = rows;
  auto os = open_out(path, std::ios::out);
  os << j.dump() << '\n';
}

Spectrum read_spectrum_json(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::in);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::IOError, "bad spectrum json " + path.string() + ": " + e.what());
  }
  Spectrum sp;
  sp.spec.b = j.value("b", 0);
  sp.depth = j.value("depth", 0);
  sp.seed = j.value("seed", std::uint64_t{0});
  for (const auto& row : j.at("coeffs"))
    sp.coeffs.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
  if (sp.coeffs.empty()) throw Error(ErrorCode::IOError, "empty spectrum: " + path.string());
  sp.kmax = sp.coeffs.size() - 1;
  return sp;
}

Spectrum read_spectrum(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_spectrum_csv(path);
  if (path.extension() == ".json") return read_spectrum_json(path);
  return read_spectrum_bin(path);
}

std::string fnv1a_digest_bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fnv1a_digest_file(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return fnv1a_digest_bytes(bytes.data(), bytes.size());
}

void write_manifest(const RunManifest& m, const nlohmann::json& config,
                    const std::filesystem::path& path) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config"] = config;
  j["master_seed"] = m.master_seed;
  j["version"] = "1.0.0";
  j["wall_seconds"] = m.wall_seconds;
  nlohmann::json outs;
  for (const auto& [file, digest] : m.output_digests) outs[file] = digest;
  j["outputs"] = outs;
  auto os = open_out(path, std::ios::out);
  os << j.dump(2) << '\n';
}

}  // namespace mccm
