#pragma once

// Readers and writers for RTTM, the DPE1 embedding and DPP1 posterior binary
// layouts, Kaldi-style segment lists and flat key=value run configuration.
//
// Binary layouts (all little-endian):
//   DPE1: "DPE1" u32 version=1, u32 dim, u32 count,
//         count x (f64 onset, f64 offset, dim x f32)
//   DPP1: "DPP1" u32 version=1, u32 n_tracks, u32 n_frames, f64 frame_shift,
//         n_tracks x n_frames f32 (row-major)

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "diarkit/core.hpp"

namespace diarkit::io {

using Bytes = std::vector<std::uint8_t>;
using RttmMap = std::map<std::string, Diarization>;

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Millisecond-quantized seconds rendered as "S.mmm" without going through
// floating-point formatting.
inline std::string format_ms(long long ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%03lld", ms / 1000, ms % 1000);
  return buf;
}

inline long long to_ms(double seconds) { return std::llround(seconds * 1000.0); }

class Writer {
 public:
  void raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw FormatError("truncated payload");
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) throw FormatError("trailing bytes after payload");
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

inline void expect_header(Reader& r, std::string_view magic) {
  if (r.raw(4) != magic) throw FormatError("bad magic, expected " + std::string(magic));
  const auto version = r.u32();
  if (version != 1) throw FormatError("unsupported version " + std::to_string(version));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// RTTM

// Parses SPEAKER lines into per-recording diarizations. Turns keep their
// input order apart from a stable sort by onset; nothing is merged.
// Non-SPEAKER record types are skipped and reported through `warnings`.
inline RttmMap parse_rttm(std::string_view text, std::vector<std::string>* warnings = nullptr) {
  RttmMap out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const auto fields = detail::split_ws(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    const std::string where = "RTTM line " + std::to_string(line_no) + ": ";
    if (fields[0] != "SPEAKER") {
      if (warnings) warnings->push_back(where + "skipping record type " + std::string(fields[0]));
      continue;
    }
    if (fields.size() != 10) {
      throw FormatError(where + "expected 10 fields, got " + std::to_string(fields.size()));
    }
    double onset = 0.0, dur = 0.0;
    if (!detail::parse_double(fields[3], onset) || !detail::parse_double(fields[4], dur)) {
      throw FormatError(where + "bad onset/duration");
    }
    if (onset < 0.0) throw FormatError(where + "negative onset");
    if (dur <= 0.0) throw FormatError(where + "non-positive duration");
    auto& d = out[std::string(fields[1])];
    d.recording_id = std::string(fields[1]);
    d.turns.push_back({{onset, onset + dur}, std::string(fields[7])});
  }
  for (auto& [rec, d] : out) {
    std::stable_sort(d.turns.begin(), d.turns.end(), [](const Turn& a, const Turn& b) {
      return a.segment.onset < b.segment.onset;
    });
  }
  return out;
}

// Canonical RTTM: millisecond times, sorted by (recording, onset, speaker).
// Turns shorter than 1 ms after quantization are written as 1 ms.
inline std::string write_rttm(std::span<const Diarization> diars) {
  struct Row {
    std::string rec;
    long long on;
    std::string spk;
    long long off;
  };
  std::vector<Row> rows;
  for (const auto& d : diars) {
    for (const auto& t : d.turns) {
      const long long on = detail::to_ms(t.segment.onset);
      long long off = detail::to_ms(t.segment.offset);
      if (off <= on) off = on + 1;
      rows.push_back({d.recording_id, on, t.speaker, off});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.rec, a.on, a.spk, a.off) < std::tie(b.rec, b.on, b.spk, b.off);
  });
  std::string out;
  for (const auto& r : rows) {
    out += "SPEAKER " + r.rec + " 1 " + detail::format_ms(r.on) + " " +
           detail::format_ms(r.off - r.on) + " <NA> <NA> " + r.spk + " <NA> <NA>\n";
  }
  return out;
}

inline std::string write_rttm(const Diarization& d) {
  return write_rttm(std::span<const Diarization>(&d, 1));
}

inline std::string write_rttm(const RttmMap& m) {
  std::vector<Diarization> v;
  for (const auto& [rec, d] : m) v.push_back(d);
  return write_rttm(v);
}

// ---------------------------------------------------------------------------
// DPE1 embeddings

inline Bytes write_embeddings(const EmbeddingSequence& seq) {
  check_embeddings(seq);
  detail::Writer w;
  w.raw("DPE1");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(seq.dim));
  w.u32(static_cast<std::uint32_t>(seq.records.size()));
  for (const auto& r : seq.records) {
    w.f64(r.segment.onset);
    w.f64(r.segment.offset);
    for (float v : r.vector) w.f32(v);
  }
  return w.take();
}

inline EmbeddingSequence read_embeddings(std::span<const std::uint8_t> bytes) {
  detail::Reader r(bytes);
  detail::expect_header(r, "DPE1");
  EmbeddingSequence seq;
  seq.dim = r.u32();
  const std::uint32_t count = r.u32();
  const std::size_t record_bytes = 16 + 4 * seq.dim;
  if (count > 0 && r.remaining() / record_bytes < count) throw FormatError("truncated payload");
  seq.records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    EmbeddingRecord rec;
    rec.segment.onset = r.f64();
    rec.segment.offset = r.f64();
    if (!is_valid(rec.segment)) {
      throw FormatError("record " + std::to_string(i) + ": invalid segment");
    }
    rec.vector.resize(seq.dim);
    for (auto& v : rec.vector) {
      v = r.f32();
      if (!std::isfinite(v)) throw FormatError("record " + std::to_string(i) + ": NaN/Inf value");
    }
    seq.records.push_back(std::move(rec));
  }
  r.expect_end();
  return seq;
}

// ---------------------------------------------------------------------------
// DPP1 posteriors

inline Bytes write_posteriors(std::span<const FrameTrack> tracks) {
  const std::size_t n_frames = tracks.empty() ? 0 : tracks.front().size();
  const double shift = tracks.empty() ? kDefaultFrameShift : tracks.front().frame_shift;
  for (const auto& t : tracks) {
    check_track(t);
    if (t.size() != n_frames) throw ConstraintError("posterior tracks differ in length");
    if (t.frame_shift != shift) throw ConstraintError("posterior tracks differ in frame shift");
  }
  detail::Writer w;
  w.raw("DPP1");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(tracks.size()));
  w.u32(static_cast<std::uint32_t>(n_frames));
  w.f64(shift);
  for (const auto& t : tracks) {
    for (float v : t.values) w.f32(v);
  }
  return w.take();
}

inline std::vector<FrameTrack> read_posteriors(std::span<const std::uint8_t> bytes) {
  detail::Reader r(bytes);
  detail::expect_header(r, "DPP1");
  const std::uint32_t n_tracks = r.u32();
  const std::uint32_t n_frames = r.u32();
  const double shift = r.f64();
  if (!(shift > 0.0) || !std::isfinite(shift)) throw FormatError("frame shift must be positive");
  const std::uint64_t n_values = static_cast<std::uint64_t>(n_tracks) * n_frames;
  if (r.remaining() / 4 < n_values) throw FormatError("truncated payload");
  std::vector<FrameTrack> tracks(n_tracks);
  for (auto& t : tracks) {
    t.frame_shift = shift;
    t.values.resize(n_frames);
    for (auto& v : t.values) {
      v = r.f32();
      if (!(v >= 0.0f && v <= 1.0f)) throw FormatError("posterior value outside [0,1]");
    }
  }
  r.expect_end();
  return tracks;
}

// ---------------------------------------------------------------------------
// Kaldi-style segment lists: "<utt-id> <recording> <onset> <offset>"

inline std::string write_segments(const std::string& recording_id, std::span<const Segment> segs) {
  std::string out;
  char id[32];
  for (std::size_t i = 0; i < segs.size(); ++i) {
    std::snprintf(id, sizeof id, "-%05zu", i);
    out += recording_id + id + " " + recording_id + " " +
           detail::format_ms(detail::to_ms(segs[i].onset)) + " " +
           detail::format_ms(detail::to_ms(segs[i].offset)) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flat key=value configuration. '#' starts a comment; keys must be unique.

using Config = std::map<std::string, std::string>;

inline Config parse_config(std::string_view text) {
  Config out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw FormatError(where + "expected key = value");
    std::string key = detail::trim(std::string_view(body).substr(0, eq));
    std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) throw FormatError(where + "empty key or value");
    if (!out.emplace(key, value).second) throw FormatError(where + "duplicate key " + key);
  }
  return out;
}

}  // namespace diarkit::io
