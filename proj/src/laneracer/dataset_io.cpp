#include <zlib.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "laneracer/binary_io.hpp"
#include "laneracer/dataset.hpp"
#include "laneracer/error.hpp"

// LRDS layout (little endian):
//   "LRDS" | u32 version | u64 manifest bytes | u64 payload bytes
//   manifest (JSON text) | payload (fixed-stride records)
//   u32 chunk count | u32 CRC32 per 64 MiB chunk of manifest + payload
// Record: RGB bytes | f64 v | f64 w | f64 t | u32 circuit | u32 episode | u32 frame index

namespace lr::data {

namespace {

constexpr std::size_t kRecordTail = 3 * 8 + 3 * 4;

std::size_t record_stride(const DatasetManifest& m) { return 3ull * m.width * m.height + kRecordTail; }

std::string manifest_json(const DatasetManifest& m) {
  nlohmann::ordered_json j;
  j["format_version"] = m.version;
  j["sample_count"] = m.sample_count;
  j["width"] = m.width;
  j["height"] = m.height;
  j["horizon_row"] = m.horizon_row;
  j["record_stride"] = record_stride(m);
  j["circuits"] = m.circuits;
  auto eps = nlohmann::ordered_json::array();
  for (const auto& e : m.episodes) {
    nlohmann::ordered_json je;
    je["id"] = e.id;
    je["circuit"] = e.circuit_id;
    je["offset"] = e.offset;
    je["count"] = e.count;
    eps.push_back(je);
  }
  j["episodes"] = eps;
  j["label_normalization"] = {{"v_max", m.limits.v_max}, {"w_max", m.limits.w_max}};
  return j.dump(2) + "\n";
}

DatasetManifest parse_manifest(const std::string& text) {
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.version = j.at("format_version").get<std::uint32_t>();
    m.sample_count = j.at("sample_count").get<std::uint64_t>();
    m.width = j.at("width").get<std::uint32_t>();
    m.height = j.at("height").get<std::uint32_t>();
    m.horizon_row = j.at("horizon_row").get<std::uint32_t>();
    m.circuits = j.at("circuits").get<std::vector<std::string>>();
    for (const auto& je : j.at("episodes")) {
      m.episodes.push_back({je.at("id").get<std::uint32_t>(), je.at("circuit").get<std::uint32_t>(),
                            je.at("offset").get<std::uint64_t>(), je.at("count").get<std::uint64_t>()});
    }
    m.limits.v_max = j.at("label_normalization").at("v_max").get<double>();
    m.limits.w_max = j.at("label_normalization").at("w_max").get<double>();
    if (j.at("record_stride").get<std::uint64_t>() != record_stride(m)) {
      fail(ErrorCode::format, "dataset: record stride disagrees with the image size");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, std::string("dataset: malformed manifest: ") + e.what());
  }
  return m;
}

std::vector<std::uint32_t> chunk_crcs(const std::uint8_t* data, std::size_t n) {
  std::vector<std::uint32_t> out;
  std::size_t off = 0;
  do {
    const std::size_t len = std::min(kChecksumChunk, n - off);
    out.push_back(static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data + off, static_cast<uInt>(len))));
    off += len;
  } while (off < n);
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  validate_dataset(ds);
  const std::string manifest = manifest_json(ds.manifest);
  const std::size_t stride = record_stride(ds.manifest);
  bin::Writer w;
  w.magic("LRDS");
  w.u32(ds.manifest.version);
  w.u64(manifest.size());
  w.u64(stride * ds.samples.size());
  const std::size_t body_start = w.buffer().size();
  w.bytes(manifest.data(), manifest.size());
  w.buffer().reserve(body_start + manifest.size() + stride * ds.samples.size() + 64);
  for (const Sample& s : ds.samples) {
    w.bytes(s.frame.rgb.data(), s.frame.rgb.size());
    w.f64(s.v);
    w.f64(s.w);
    w.f64(s.t);
    w.u32(s.circuit_id);
    w.u32(s.episode_id);
    w.u32(s.frame_index);
  }
  const auto crcs = chunk_crcs(w.buffer().data() + body_start, w.buffer().size() - body_start);
  w.u32(static_cast<std::uint32_t>(crcs.size()));
  for (auto c : crcs) w.u32(c);
  return std::move(w.buffer());
}

Dataset decode_dataset(const std::vector<std::uint8_t>& bytes) {
  bin::Reader r(bytes.data(), bytes.size(), "dataset");
  if (!r.magic("LRDS")) fail(ErrorCode::format, "dataset: bad magic (not an LRDS file)");
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion) {
    fail(ErrorCode::version, "dataset: format version " + std::to_string(version) + " is not supported (expected " +
                                 std::to_string(kDatasetVersion) + ")");
  }
  const std::uint64_t manifest_len = r.u64();
  const std::uint64_t payload_len = r.u64();
  if (manifest_len > r.remaining() || payload_len > r.remaining() - manifest_len) fail(ErrorCode::format, "dataset: file is truncated");
  const std::uint8_t* body = r.cursor();
  const std::size_t body_len = manifest_len + payload_len;
  r.skip(body_len);
  const std::uint32_t n_chunks = r.u32();
  const auto expect = chunk_crcs(body, body_len);
  if (n_chunks != expect.size()) fail(ErrorCode::format, "dataset: checksum table has the wrong length");
  for (std::uint32_t i = 0; i < n_chunks; ++i) {
    if (r.u32() != expect[i]) fail(ErrorCode::checksum, "dataset: CRC32 mismatch in chunk " + std::to_string(i));
  }
  if (r.remaining() != 0) fail(ErrorCode::format, "dataset: trailing bytes after checksum table");

  Dataset ds;
  ds.manifest = parse_manifest(std::string(reinterpret_cast<const char*>(body), manifest_len));
  ds.manifest.version = version;
  const std::size_t stride = record_stride(ds.manifest);
  if (payload_len != stride * ds.manifest.sample_count) {
    fail(ErrorCode::format, "dataset: payload size does not match sample_count x record stride");
  }
  bin::Reader p(body + manifest_len, payload_len, "dataset");
  ds.samples.resize(ds.manifest.sample_count);
  for (Sample& s : ds.samples) {
    s.frame = ImageFrame(ds.manifest.width, ds.manifest.height);
    s.frame.horizon_row = ds.manifest.horizon_row;
    p.bytes(s.frame.rgb.data(), s.frame.rgb.size());
    s.v = p.f64();
    s.w = p.f64();
    s.t = p.f64();
    s.circuit_id = p.u32();
    s.episode_id = p.u32();
    s.frame_index = p.u32();
  }
  validate_dataset(ds);
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& path) { bin::write_file(path, encode_dataset(ds)); }

Dataset read_dataset(const std::string& path) { return decode_dataset(bin::read_file(path)); }

void export_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "export: cannot create directory '" + dir + "': " + ec.message());
  std::ofstream csv(fs::path(dir) / "labels.csv", std::ios::binary);
  if (!csv) fail(ErrorCode::io, "export: cannot write labels.csv in '" + dir + "'");
  csv << "index,episode,circuit,frame_index,t,v,w,file\n";
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const Sample& s = ds.samples[i];
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.ppm", i);
    std::ofstream img(fs::path(dir) / name, std::ios::binary);
    if (!img) fail(ErrorCode::io, std::string("export: cannot write ") + name);
    img << "P6\n" << s.frame.width << ' ' << s.frame.height << "\n255\n";
    img.write(reinterpret_cast<const char*>(s.frame.rgb.data()), static_cast<std::streamsize>(s.frame.rgb.size()));
    csv << i << ',' << s.episode_id << ',' << ds.manifest.circuits.at(s.circuit_id) << ',' << s.frame_index << ','
        << fmt(s.t) << ',' << fmt(s.v) << ',' << fmt(s.w) << ',' << name << '\n';
  }
  if (!csv) fail(ErrorCode::io, "export: write to labels.csv failed");
}

}  // namespace lr::data
