// Reader/writer for the survey log triple: survey.dat (header), chanK.son
// (framed ping records) and chanK.idx (time/offset index). "BSL1" layout,
// little-endian throughout, CRC-32 per record.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bathykit/detail/bytes.hpp"
#include "bathykit/detail/crc32.hpp"

namespace bathykit::sonarlog {

// ---------------------------------------------------------------------------
// Instrument constants (Helix-class CHIRP side-imaging sounder).

struct SonarSpec {
  static constexpr double max_depth_m = 457.0;
  static constexpr double side_range_m = 73.0;
  static constexpr int beam_2d_low_khz = 83;    // 60 degree cone
  static constexpr int beam_2d_high_khz = 200;  // 20 degree cone
  static constexpr int beam_imaging_khz = 455;
  static constexpr double down_beam_deg_200khz = 20.0;
  static constexpr double down_beam_deg_83khz = 60.0;
  static constexpr double side_beam_deg = 86.0;
  // CHIRP modulation spans, kHz
  static constexpr int chirp_2d_low[2] = {75, 95};
  static constexpr int chirp_2d_high[2] = {175, 225};
  static constexpr int chirp_imaging[2] = {420, 520};
};

enum class Beam : std::uint8_t {
  down_200khz = 0,
  down_83khz = 1,
  down_imaging = 2,
  side_port = 3,
  side_starboard = 4,
};

/// Frequency the unit drives each beam with.
inline std::uint16_t beam_frequency_khz(std::uint8_t beam_id) {
  switch (beam_id) {
    case 0: return 200;
    case 1: return 83;
    default: return 455;  // imaging beams
  }
}

// ---------------------------------------------------------------------------
// Errors

class SonarlogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public SonarlogError {
 public:
  using SonarlogError::SonarlogError;
};

class BadMagic : public SonarlogError {
 public:
  explicit BadMagic(const std::string& what, std::uint64_t offset = 0)
      : SonarlogError(what), offset(offset) {}
  std::uint64_t offset;
};

class TruncatedRecord : public SonarlogError {
 public:
  explicit TruncatedRecord(std::uint64_t last_good_offset)
      : SonarlogError("SON stream truncated mid-record after offset " +
                      std::to_string(last_good_offset)),
        last_good_offset(last_good_offset) {}
  std::uint64_t last_good_offset;
};

class CrcMismatch : public SonarlogError {
 public:
  explicit CrcMismatch(std::size_t record_number)
      : SonarlogError("CRC mismatch in record " + std::to_string(record_number)),
        record_number(record_number) {}
  std::size_t record_number;
};

class BadRecordLength : public SonarlogError {
 public:
  explicit BadRecordLength(std::uint64_t offset)
      : SonarlogError("impossible record length at offset " +
                      std::to_string(offset)),
        offset(offset) {}
  std::uint64_t offset;
};

class NonMonotonicTime : public SonarlogError {
 public:
  explicit NonMonotonicTime(std::size_t record_number)
      : SonarlogError("time_offset_ms not strictly increasing at record " +
                      std::to_string(record_number)),
        record_number(record_number) {}
  std::size_t record_number;
};

class NoValidRecords : public SonarlogError {
 public:
  using SonarlogError::SonarlogError;
};

class InvariantViolation : public SonarlogError {
 public:
  using SonarlogError::SonarlogError;
};

// ---------------------------------------------------------------------------
// Wire layout

inline constexpr std::array<std::uint8_t, 4> kSyncPattern = {0xC0, 0xDE, 0xAB,
                                                             0x21};
inline constexpr char kDatMagic[4] = {'B', 'S', 'L', '1'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 64;
inline constexpr std::size_t kDeviceNameBytes = 32;
/// Fixed part of one ping record: everything except the echo samples.
/// 4 sync + 4 len + 4 time + 4 lat + 4 lon + 2 heading + 2 speed + 4 depth
/// + 2 freq + 1 beam + 2 count + 4 crc.
inline constexpr std::uint32_t kRecordFixedBytes = 37;
inline constexpr std::size_t kIndexEntryBytes = 12;
inline constexpr std::uint32_t kMaxDepthCm = 45700;

enum class WaterType : std::uint8_t { fresh = 0, salt = 1 };

struct SurveyHeader {
  std::uint16_t channel_count = 1;
  std::uint64_t epoch_start_ms = 0;
  WaterType water_type = WaterType::fresh;
  float sound_speed_mps = 1482.0f;
  std::string device_name;  ///< up to 32 UTF-8 bytes, zero padded on disk
};

struct PingRecord {
  std::uint32_t time_offset_ms = 0;  ///< since SurveyHeader::epoch_start_ms
  std::int32_t lat_e7 = 0;           ///< degrees * 1e7
  std::int32_t lon_e7 = 0;
  std::uint16_t heading_cdeg = 0;  ///< centidegrees, [0, 35999]
  std::uint16_t speed_cmps = 0;
  std::uint32_t depth_cm = 0;  ///< raw sonar depth, <= 45700
  std::uint16_t freq_khz = 200;
  std::uint8_t beam_id = 0;
  std::vector<std::uint8_t> samples;  ///< echo intensities

  std::uint32_t record_len() const {
    return kRecordFixedBytes + static_cast<std::uint32_t>(samples.size());
  }
  double lat_deg() const { return lat_e7 / 1e7; }
  double lon_deg() const { return lon_e7 / 1e7; }
  double depth_m() const { return depth_cm / 100.0; }
  double heading_deg() const { return heading_cdeg / 100.0; }
  double speed_mps() const { return speed_cmps / 100.0; }

  bool operator==(const PingRecord&) const = default;
};

struct IndexEntry {
  std::uint32_t time_offset_ms = 0;
  std::uint64_t byte_offset = 0;
  bool operator==(const IndexEntry&) const = default;
};

struct Survey {
  SurveyHeader header;
  std::vector<std::vector<PingRecord>> channels;
};

namespace detail {

inline void check_ping(const PingRecord& p) {
  if (p.heading_cdeg >= 36000)
    throw InvariantViolation("heading_cdeg out of range");
  if (p.depth_cm > kMaxDepthCm)
    throw InvariantViolation("depth_cm exceeds 45700 (457 m unit limit)");
  if (p.beam_id > 4) throw InvariantViolation("beam_id out of range");
  if (p.freq_khz != beam_frequency_khz(p.beam_id))
    throw InvariantViolation("freq_khz inconsistent with beam_id");
  if (p.samples.size() > 0xFFFF)
    throw InvariantViolation("too many echo samples for one record");
}

inline void check_header(const SurveyHeader& h) {
  if (h.channel_count < 1) throw InvariantViolation("channel_count must be >= 1");
  if (!(h.sound_speed_mps >= 1400.0f && h.sound_speed_mps <= 1600.0f))
    throw InvariantViolation("sound_speed_mps outside [1400, 1600]");
  if (h.device_name.size() > kDeviceNameBytes)
    throw InvariantViolation("device_name longer than 32 bytes");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Serialization

inline std::vector<std::uint8_t> serialize_header(const SurveyHeader& h) {
  detail::check_header(h);
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes);
  out.insert(out.end(), kDatMagic, kDatMagic + 4);
  bathykit::detail::put_le<std::uint16_t>(out, kFormatVersion);
  bathykit::detail::put_le<std::uint16_t>(out, h.channel_count);
  bathykit::detail::put_le<std::uint64_t>(out, h.epoch_start_ms);
  bathykit::detail::put_le<std::uint8_t>(out,
                                         static_cast<std::uint8_t>(h.water_type));
  bathykit::detail::put_le<float>(out, h.sound_speed_mps);
  for (std::size_t i = 0; i < kDeviceNameBytes; ++i)
    out.push_back(i < h.device_name.size()
                      ? static_cast<std::uint8_t>(h.device_name[i])
                      : 0);
  out.resize(kHeaderBytes, 0);  // reserved padding
  return out;
}

inline SurveyHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kHeaderBytes)
    throw TruncatedRecord(0);
  if (std::memcmp(bytes.data(), kDatMagic, 4) != 0)
    throw BadMagic("survey.dat does not start with BSL1");
  const auto version = bathykit::detail::get_le<std::uint16_t>(&bytes[4]);
  if (version != kFormatVersion)
    throw BadMagic("unsupported BSL version " + std::to_string(version));
  SurveyHeader h;
  h.channel_count = bathykit::detail::get_le<std::uint16_t>(&bytes[6]);
  h.epoch_start_ms = bathykit::detail::get_le<std::uint64_t>(&bytes[8]);
  h.water_type = static_cast<WaterType>(bytes[16]);
  h.sound_speed_mps = bathykit::detail::get_le<float>(&bytes[17]);
  const std::uint8_t* name = &bytes[21];
  std::size_t len = 0;
  while (len < kDeviceNameBytes && name[len] != 0) ++len;
  h.device_name.assign(reinterpret_cast<const char*>(name), len);
  detail::check_header(h);
  return h;
}

inline void serialize_record(const PingRecord& p,
                             std::vector<std::uint8_t>& out) {
  detail::check_ping(p);
  const std::size_t start = out.size();
  out.insert(out.end(), kSyncPattern.begin(), kSyncPattern.end());
  bathykit::detail::put_le<std::uint32_t>(out, p.record_len());
  bathykit::detail::put_le<std::uint32_t>(out, p.time_offset_ms);
  bathykit::detail::put_le<std::int32_t>(out, p.lat_e7);
  bathykit::detail::put_le<std::int32_t>(out, p.lon_e7);
  bathykit::detail::put_le<std::uint16_t>(out, p.heading_cdeg);
  bathykit::detail::put_le<std::uint16_t>(out, p.speed_cmps);
  bathykit::detail::put_le<std::uint32_t>(out, p.depth_cm);
  bathykit::detail::put_le<std::uint16_t>(out, p.freq_khz);
  bathykit::detail::put_le<std::uint8_t>(out, p.beam_id);
  bathykit::detail::put_le<std::uint16_t>(out,
                                          static_cast<std::uint16_t>(p.samples.size()));
  out.insert(out.end(), p.samples.begin(), p.samples.end());
  // CRC covers everything after the sync pattern, excluding itself.
  const std::uint32_t crc = bathykit::detail::crc32(out.data() + start + 4,
                                                    out.size() - start - 4);
  bathykit::detail::put_le<std::uint32_t>(out, crc);
}

/// Decodes the body of one record (the record_len field onward, CRC already
/// verified). `body` spans [record_len .. crc).
inline PingRecord parse_record_body(std::span<const std::uint8_t> body,
                                    std::uint64_t offset) {
  PingRecord p;
  p.time_offset_ms = bathykit::detail::get_le<std::uint32_t>(&body[4]);
  p.lat_e7 = bathykit::detail::get_le<std::int32_t>(&body[8]);
  p.lon_e7 = bathykit::detail::get_le<std::int32_t>(&body[12]);
  p.heading_cdeg = bathykit::detail::get_le<std::uint16_t>(&body[16]);
  p.speed_cmps = bathykit::detail::get_le<std::uint16_t>(&body[18]);
  p.depth_cm = bathykit::detail::get_le<std::uint32_t>(&body[20]);
  p.freq_khz = bathykit::detail::get_le<std::uint16_t>(&body[24]);
  p.beam_id = body[26];
  const auto sample_count = bathykit::detail::get_le<std::uint16_t>(&body[27]);
  const auto record_len = bathykit::detail::get_le<std::uint32_t>(&body[0]);
  if (record_len != kRecordFixedBytes + sample_count)
    throw BadRecordLength(offset);
  p.samples.assign(body.begin() + 29, body.begin() + 29 + sample_count);
  return p;
}

// ---------------------------------------------------------------------------
// Streaming reader. Holds at most one record in memory.

class SonReader {
 public:
  explicit SonReader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at clean end of stream.
  std::optional<PingRecord> next() {
    std::uint8_t head[8];
    in_.read(reinterpret_cast<char*>(head), 4);
    if (in_.gcount() == 0 && in_.eof()) return std::nullopt;
    if (in_.gcount() != 4) throw TruncatedRecord(offset_);
    if (std::memcmp(head, kSyncPattern.data(), 4) != 0)
      throw BadMagic("sync pattern not found", offset_);
    in_.read(reinterpret_cast<char*>(head + 4), 4);
    if (in_.gcount() != 4) throw TruncatedRecord(offset_);
    const auto record_len = bathykit::detail::get_le<std::uint32_t>(head + 4);
    if (record_len < kRecordFixedBytes ||
        record_len > kRecordFixedBytes + 0xFFFF)
      throw BadRecordLength(offset_);
    buf_.resize(record_len - 4);  // record_len field onward
    std::memcpy(buf_.data(), head + 4, 4);
    in_.read(reinterpret_cast<char*>(buf_.data()) + 4, record_len - 8);
    if (in_.gcount() != static_cast<std::streamsize>(record_len - 8))
      throw TruncatedRecord(offset_);
    const std::size_t body_len = buf_.size() - 4;
    const auto stored_crc =
        bathykit::detail::get_le<std::uint32_t>(buf_.data() + body_len);
    if (bathykit::detail::crc32(buf_.data(), body_len) != stored_crc)
      throw CrcMismatch(record_number_);
    PingRecord p = parse_record_body({buf_.data(), body_len}, offset_);
    if (have_prev_ && p.time_offset_ms <= prev_time_)
      throw NonMonotonicTime(record_number_);
    have_prev_ = true;
    prev_time_ = p.time_offset_ms;
    offset_ += record_len;
    ++record_number_;
    return p;
  }

  std::uint64_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::vector<std::uint8_t> buf_;
  std::uint64_t offset_ = 0;
  std::size_t record_number_ = 0;
  std::uint32_t prev_time_ = 0;
  bool have_prev_ = false;
};

// ---------------------------------------------------------------------------
// Whole-survey write/read

namespace detail {

inline std::string chan_basename(std::size_t k, const char* ext) {
  return "chan" + std::to_string(k) + ext;
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace detail

/// Serializes one channel; returns (son bytes, idx bytes).
inline std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>
serialize_channel(std::span<const PingRecord> pings) {
  std::vector<std::uint8_t> son, idx;
  std::uint64_t last_time = 0;
  bool have_last = false;
  for (const PingRecord& p : pings) {
    if (have_last && p.time_offset_ms <= last_time)
      throw InvariantViolation("pings must be strictly ordered by time_offset_ms");
    have_last = true;
    last_time = p.time_offset_ms;
    bathykit::detail::put_le<std::uint32_t>(idx, p.time_offset_ms);
    bathykit::detail::put_le<std::uint64_t>(idx, son.size());
    serialize_record(p, son);
  }
  return {std::move(son), std::move(idx)};
}

/// Writes survey.dat plus chanK.son / chanK.idx for every channel.
inline void write_survey(const SurveyHeader& header,
                         const std::vector<std::vector<PingRecord>>& channels,
                         const std::filesystem::path& dir) {
  if (header.channel_count != channels.size())
    throw InvariantViolation("channel_count does not match channel data");
  std::filesystem::create_directories(dir);
  detail::write_file(dir / "survey.dat", serialize_header(header));
  for (std::size_t k = 0; k < channels.size(); ++k) {
    auto [son, idx] = serialize_channel(channels[k]);
    detail::write_file(dir / detail::chan_basename(k, ".son"), son);
    detail::write_file(dir / detail::chan_basename(k, ".idx"), idx);
  }
}

inline void write_survey(const Survey& s, const std::filesystem::path& dir) {
  write_survey(s.header, s.channels, dir);
}

inline std::vector<PingRecord> read_son(std::istream& in) {
  std::vector<PingRecord> pings;
  SonReader reader(in);
  while (auto p = reader.next()) pings.push_back(std::move(*p));
  return pings;
}

inline Survey read_survey(const std::filesystem::path& dir) {
  Survey s;
  s.header = parse_header(detail::read_file(dir / "survey.dat"));
  s.channels.resize(s.header.channel_count);
  for (std::size_t k = 0; k < s.channels.size(); ++k) {
    std::ifstream in(dir / detail::chan_basename(k, ".son"), std::ios::binary);
    if (!in) throw IoError("missing " + detail::chan_basename(k, ".son"));
    s.channels[k] = read_son(in);
  }
  return s;
}

inline std::vector<IndexEntry> parse_index(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % kIndexEntryBytes != 0)
    throw TruncatedRecord(bytes.size() - bytes.size() % kIndexEntryBytes);
  std::vector<IndexEntry> entries;
  entries.reserve(bytes.size() / kIndexEntryBytes);
  for (std::size_t i = 0; i < bytes.size(); i += kIndexEntryBytes) {
    IndexEntry e;
    e.time_offset_ms = bathykit::detail::get_le<std::uint32_t>(&bytes[i]);
    e.byte_offset = bathykit::detail::get_le<std::uint64_t>(&bytes[i + 4]);
    if (!entries.empty() && (e.time_offset_ms <= entries.back().time_offset_ms ||
                             e.byte_offset <= entries.back().byte_offset))
      throw NonMonotonicTime(entries.size());
    entries.push_back(e);
  }
  return entries;
}

inline std::vector<IndexEntry> read_index(const std::filesystem::path& path) {
  return parse_index(detail::read_file(path));
}

inline std::vector<std::uint8_t> serialize_index(
    std::span<const IndexEntry> entries) {
  std::vector<std::uint8_t> out;
  out.reserve(entries.size() * kIndexEntryBytes);
  for (const IndexEntry& e : entries) {
    bathykit::detail::put_le<std::uint32_t>(out, e.time_offset_ms);
    bathykit::detail::put_le<std::uint64_t>(out, e.byte_offset);
  }
  return out;
}

/// Rebuilds an index from a SON stream alone: scans for sync patterns and
/// admits only candidates whose length and CRC both check out. Corrupted
/// records are skipped. Throws NoValidRecords if a non-empty stream yields
/// nothing.
inline std::vector<IndexEntry> rebuild_index(
    std::span<const std::uint8_t> son) {
  std::vector<IndexEntry> entries;
  std::size_t pos = 0;
  while (pos + kRecordFixedBytes <= son.size()) {
    if (std::memcmp(&son[pos], kSyncPattern.data(), 4) != 0) {
      ++pos;
      continue;
    }
    const auto record_len = bathykit::detail::get_le<std::uint32_t>(&son[pos + 4]);
    if (record_len < kRecordFixedBytes ||
        record_len > kRecordFixedBytes + 0xFFFF ||
        pos + record_len > son.size()) {
      ++pos;
      continue;
    }
    const std::size_t body_len = record_len - 8;
    const auto stored_crc = bathykit::detail::get_le<std::uint32_t>(
        &son[pos + record_len - 4]);
    if (bathykit::detail::crc32(&son[pos + 4], body_len) != stored_crc) {
      ++pos;
      continue;
    }
    const auto sample_count =
        bathykit::detail::get_le<std::uint16_t>(&son[pos + 31]);
    if (record_len != kRecordFixedBytes + sample_count) {
      ++pos;
      continue;
    }
    IndexEntry e;
    e.time_offset_ms = bathykit::detail::get_le<std::uint32_t>(&son[pos + 8]);
    e.byte_offset = pos;
    entries.push_back(e);
    pos += record_len;
  }
  if (entries.empty() && !son.empty())
    throw NoValidRecords("no valid records found in SON stream");
  return entries;
}

inline std::vector<IndexEntry> rebuild_index(
    const std::filesystem::path& son_path) {
  const auto bytes = detail::read_file(son_path);
  return rebuild_index(std::span<const std::uint8_t>(bytes));
}

}  // namespace bathykit::sonarlog
