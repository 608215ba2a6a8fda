#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <random>
#include <sstream>

#include "bathykit/sonarlog.hpp"
#include "support/test_helpers.hpp"

using namespace bathykit::sonarlog;
namespace ts = testsupport;

namespace {

SurveyHeader test_header(std::uint16_t channels) {
  SurveyHeader h;
  h.channel_count = channels;
  h.epoch_start_ms = 1710000000000ull;
  h.water_type = WaterType::fresh;
  h.sound_speed_mps = 1482.0f;
  h.device_name = "HELIX5-SI-G2";
  return h;
}

PingRecord minimal_ping(std::uint32_t t) {
  PingRecord p;
  p.time_offset_ms = t;
  p.lat_e7 = 191356670;
  p.lon_e7 = 728956670;
  p.heading_cdeg = 9000;
  p.speed_cmps = 150;
  p.depth_cm = 230;
  p.beam_id = 0;
  p.freq_khz = 200;
  return p;
}

}  // namespace

TEST_CASE("survey header is exactly 64 bytes with the documented layout") {
  const auto bytes = serialize_header(test_header(2));
  REQUIRE(bytes.size() == 64);
  CHECK(std::memcmp(bytes.data(), "BSL1", 4) == 0);
  CHECK(bytes[4] == 1);  // version, little-endian u16
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 2);  // channel count
  CHECK(bytes[7] == 0);
  // epoch 1710000000000 = 0x018E23F14C00 little-endian at offset 8
  CHECK(bytes[8] == 0x00);
  CHECK(bytes[9] == 0x4C);
  CHECK(bytes[10] == 0xF1);
  CHECK(bytes[11] == 0x23);
  CHECK(bytes[12] == 0x8E);
  CHECK(bytes[13] == 0x01);
  CHECK(bytes[16] == 0);  // fresh water
  CHECK(bytes[21] == 'H');
  CHECK(bytes[52] == 0);  // name zero-padded
  const SurveyHeader back = parse_header(bytes);
  CHECK(back.channel_count == 2);
  CHECK(back.epoch_start_ms == 1710000000000ull);
  CHECK(back.device_name == "HELIX5-SI-G2");
  CHECK(back.sound_speed_mps == 1482.0f);
}

TEST_CASE("a zero-sample record is exactly 37 bytes (field-width sum)") {
  // 4 sync + 4 len + 4 time + 4 lat + 4 lon + 2 hdg + 2 spd + 4 depth
  // + 2 freq + 1 beam + 2 count + 0 samples + 4 crc = 37
  std::vector<std::uint8_t> bytes;
  serialize_record(minimal_ping(1000), bytes);
  REQUIRE(bytes.size() == 37);
  CHECK(bytes[0] == 0xC0);
  CHECK(bytes[1] == 0xDE);
  CHECK(bytes[2] == 0xAB);
  CHECK(bytes[3] == 0x21);
  CHECK(bytes[4] == 37);  // record_len
  CHECK(bytes[5] == 0);
  // time_offset at byte 8
  CHECK(bytes[8] == 0xE8);
  CHECK(bytes[9] == 0x03);
  // depth_cm 230 at offset 24
  CHECK(bytes[24] == 230);
  CHECK(bytes[25] == 0);
  // freq 200 kHz at offset 28
  CHECK(bytes[28] == 200);
  CHECK(bytes[29] == 0);
  CHECK(bytes[30] == 0);  // beam 0
  CHECK(bytes[31] == 0);  // sample count
  CHECK(bytes[32] == 0);
}

TEST_CASE("writer emits one index entry per ping and empty files for empty "
          "channels") {
  const auto dir = ts::fresh_dir("writer_empty");
  std::vector<std::vector<PingRecord>> channels(2);
  channels[0] = {minimal_ping(10), minimal_ping(20), minimal_ping(30)};
  write_survey(test_header(2), channels, dir);

  CHECK(std::filesystem::file_size(dir / "survey.dat") == 64);
  CHECK(std::filesystem::file_size(dir / "chan0.son") == 3 * 37);
  CHECK(std::filesystem::file_size(dir / "chan0.idx") == 3 * 12);
  CHECK(std::filesystem::file_size(dir / "chan1.son") == 0);
  CHECK(std::filesystem::file_size(dir / "chan1.idx") == 0);

  const auto idx = read_index(dir / "chan0.idx");
  REQUIRE(idx.size() == 3);
  CHECK(idx[0].byte_offset == 0);
  CHECK(idx[1].byte_offset == 37);
  CHECK(idx[2].byte_offset == 74);
  CHECK(idx[0].time_offset_ms == 10);
  CHECK(idx[2].time_offset_ms == 30);

  // every index offset dereferences to the sync pattern
  const auto son = ts::slurp(dir / "chan0.son");
  for (const auto& e : idx)
    CHECK(std::memcmp(son.data() + e.byte_offset, kSyncPattern.data(), 4) == 0);
}

TEST_CASE("write then read returns bit-identical pings") {
  std::mt19937_64 rng(101);
  const auto dir = ts::fresh_dir("roundtrip_basic");
  std::vector<std::vector<PingRecord>> channels(3);
  for (auto& c : channels) c = ts::random_pings(rng, 25);
  write_survey(test_header(3), channels, dir);
  const Survey back = read_survey(dir);
  CHECK(back.header.channel_count == 3);
  REQUIRE(back.channels.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(back.channels[k] == channels[k]);
}

TEST_CASE("writer rejects invariant violations") {
  const auto dir = ts::fresh_dir("writer_reject");
  SECTION("unordered pings") {
    std::vector<std::vector<PingRecord>> ch(1);
    ch[0] = {minimal_ping(20), minimal_ping(10)};
    CHECK_THROWS_AS(write_survey(test_header(1), ch, dir), InvariantViolation);
  }
  SECTION("equal timestamps are also rejected (index must be strict)") {
    std::vector<std::vector<PingRecord>> ch(1);
    ch[0] = {minimal_ping(10), minimal_ping(10)};
    CHECK_THROWS_AS(write_survey(test_header(1), ch, dir), InvariantViolation);
  }
  SECTION("depth beyond the unit limit") {
    auto p = minimal_ping(10);
    p.depth_cm = 45701;
    std::vector<std::vector<PingRecord>> ch{{p}};
    CHECK_THROWS_AS(write_survey(test_header(1), ch, dir), InvariantViolation);
  }
  SECTION("heading out of range") {
    auto p = minimal_ping(10);
    p.heading_cdeg = 36000;
    std::vector<std::vector<PingRecord>> ch{{p}};
    CHECK_THROWS_AS(write_survey(test_header(1), ch, dir), InvariantViolation);
  }
  SECTION("freq/beam pairing") {
    auto p = minimal_ping(10);
    p.beam_id = 1;  // 83 kHz beam
    p.freq_khz = 200;
    std::vector<std::vector<PingRecord>> ch{{p}};
    CHECK_THROWS_AS(write_survey(test_header(1), ch, dir), InvariantViolation);
  }
  SECTION("channel count mismatch") {
    std::vector<std::vector<PingRecord>> ch(2);
    CHECK_THROWS_AS(write_survey(test_header(1), ch, dir), InvariantViolation);
  }
  SECTION("sound speed outside water range") {
    auto h = test_header(1);
    h.sound_speed_mps = 300.0f;
    std::vector<std::vector<PingRecord>> ch(1);
    CHECK_THROWS_AS(write_survey(h, ch, dir), InvariantViolation);
  }
}

TEST_CASE("reader reports corruption precisely") {
  std::mt19937_64 rng(202);
  auto pings = ts::random_pings(rng, 10);
  auto [son, idx] = serialize_channel(pings);

  SECTION("corrupt byte in samples -> CrcMismatch at that record") {
    std::uint64_t off = 0;
    for (int i = 0; i < 4; ++i) off += pings[i].record_len();
    auto bad = son;
    bad[off + 20] ^= 0x01;
    std::istringstream in(std::string(bad.begin(), bad.end()));
    SonReader reader(in);
    for (int i = 0; i < 4; ++i) REQUIRE(reader.next().has_value());
    try {
      reader.next();
      FAIL("expected CrcMismatch");
    } catch (const CrcMismatch& e) {
      CHECK(e.record_number == 4);
    }
  }

  SECTION("truncated file -> TruncatedRecord naming the last good offset") {
    std::uint64_t off = 0;
    for (int i = 0; i < 7; ++i) off += pings[i].record_len();
    auto cut = son;
    cut.resize(off + 10);  // mid record 7
    std::istringstream in(std::string(cut.begin(), cut.end()));
    try {
      read_son(in);
      FAIL("expected TruncatedRecord");
    } catch (const TruncatedRecord& e) {
      CHECK(e.last_good_offset == off);
    }
  }

  SECTION("bad sync -> BadMagic with offset") {
    auto bad = son;
    bad[0] = 0x00;
    std::istringstream in(std::string(bad.begin(), bad.end()));
    try {
      read_son(in);
      FAIL("expected BadMagic");
    } catch (const BadMagic& e) {
      CHECK(e.offset == 0);
    }
  }

  SECTION("non-monotonic time -> NonMonotonicTime") {
    PingRecord a = pings[0], b = pings[1];
    a.time_offset_ms = 100;
    b.time_offset_ms = 100;  // equal is already non-monotonic
    std::vector<std::uint8_t> bytes;
    serialize_record(a, bytes);
    serialize_record(b, bytes);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    CHECK_THROWS_AS(read_son(in), NonMonotonicTime);
  }

  SECTION("bad DAT magic") {
    auto hdr = serialize_header(test_header(1));
    hdr[0] = 'X';
    CHECK_THROWS_AS(parse_header(hdr), BadMagic);
  }
}

TEST_CASE("round-trip property: write -> read -> write is byte-identical") {
  std::mt19937_64 rng(303);
  for (int iter = 0; iter < 50; ++iter) {
    std::uniform_int_distribution<std::size_t> count(0, 30);
    const auto pings = ts::random_pings(rng, count(rng));
    auto [son, idx] = serialize_channel(pings);
    std::istringstream in(std::string(son.begin(), son.end()));
    const auto back = read_son(in);
    REQUIRE(back == pings);
    auto [son2, idx2] = serialize_channel(back);
    CHECK(son2 == son);
    CHECK(idx2 == idx);
  }
}

TEST_CASE("CRC detects every single-byte mutation in a record body") {
  std::mt19937_64 rng(404);
  const auto pings = ts::random_pings(rng, 3, 24);
  auto [son, idx] = serialize_channel(pings);
  std::uint64_t off = 0;
  for (const auto& p : pings) {
    // any byte after the sync pattern: some framing or integrity error
    for (std::uint32_t i = 4; i < p.record_len(); ++i) {
      auto bad = son;
      bad[off + i] ^= 0x5A;
      std::istringstream in(std::string(bad.begin(), bad.end()));
      CHECK_THROWS_AS(read_son(in), SonarlogError);
    }
    // bytes covered by the CRC and not the length field itself must fail
    // specifically as a CRC mismatch
    for (std::uint32_t i = 8; i < p.record_len() - 4; ++i) {
      auto bad = son;
      bad[off + i] ^= 0x01;
      std::istringstream in(std::string(bad.begin(), bad.end()));
      bool crc_detected = false;
      try {
        read_son(in);
      } catch (const CrcMismatch&) {
        crc_detected = true;
      } catch (const SonarlogError&) {
        // wrong error class for this byte range
      }
      CHECK(crc_detected);
    }
    off += p.record_len();
  }
}

TEST_CASE("rebuild_index reproduces the writer's index byte-for-byte") {
  std::mt19937_64 rng(505);
  const auto pings = ts::random_pings(rng, 40);
  auto [son, idx] = serialize_channel(pings);
  const auto rebuilt = rebuild_index(std::span<const std::uint8_t>(son));
  CHECK(serialize_index(rebuilt) == idx);

  SECTION("empty SON gives an empty index") {
    const std::vector<std::uint8_t> empty;
    CHECK(rebuild_index(std::span<const std::uint8_t>(empty)).empty());
  }

  SECTION("a corrupted record among 10 is skipped, 9 survive") {
    const auto ten = ts::random_pings(rng, 10);
    auto [son10, idx10] = serialize_channel(ten);
    std::uint64_t off = 0;
    for (int i = 0; i < 5; ++i) off += ten[i].record_len();
    son10[off + 15] ^= 0xFF;  // corrupt record 5's body
    const auto entries = rebuild_index(std::span<const std::uint8_t>(son10));
    CHECK(entries.size() == 9);
    for (const auto& e : entries)
      CHECK(e.time_offset_ms != ten[5].time_offset_ms);
  }

  SECTION("garbage-only stream raises NoValidRecords") {
    std::vector<std::uint8_t> junk(500, 0x77);
    CHECK_THROWS_AS(rebuild_index(std::span<const std::uint8_t>(junk)),
                    NoValidRecords);
  }
}

TEST_CASE("streaming reader yields records one at a time") {
  std::mt19937_64 rng(606);
  const auto pings = ts::random_pings(rng, 100, 512);
  auto [son, idx] = serialize_channel(pings);
  std::istringstream in(std::string(son.begin(), son.end()));
  SonReader reader(in);
  std::size_t n = 0;
  std::uint64_t expect_offset = 0;
  while (auto p = reader.next()) {
    expect_offset += p->record_len();
    CHECK(reader.offset() == expect_offset);
    CHECK(*p == pings[n]);
    ++n;
  }
  CHECK(n == pings.size());
}

TEST_CASE("golden fixture stays stable") {
  const std::filesystem::path golden(BATHYKIT_GOLDEN_DIR);
  const Survey s = read_survey(golden);
  CHECK(s.header.device_name == "HELIX5-SI-G2");
  CHECK(s.header.epoch_start_ms == 1710000000000ull);
  REQUIRE(s.channels.size() == 1);
  REQUIRE(s.channels[0].size() == 3);
  CHECK(s.channels[0][0].depth_cm == 230);
  CHECK(s.channels[0][1].depth_cm == 410);
  CHECK(s.channels[0][2].depth_cm == 583);
  CHECK(s.channels[0][2].samples.size() == 8);

  // regenerating from the parsed pings reproduces the files byte-for-byte
  const auto dir = ts::fresh_dir("golden_rewrite");
  write_survey(s, dir);
  CHECK(ts::slurp(dir / "survey.dat") == ts::slurp(golden / "survey.dat"));
  CHECK(ts::slurp(dir / "chan0.son") == ts::slurp(golden / "chan0.son"));
  CHECK(ts::slurp(dir / "chan0.idx") == ts::slurp(golden / "chan0.idx"));
}
