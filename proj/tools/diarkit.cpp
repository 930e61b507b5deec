// diarkit: stage-per-subcommand diarization pipeline driver.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <thread>

#include "diarkit/diarkit.hpp"

namespace fs = std::filesystem;
using namespace diarkit;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

io::Bytes read_bytes(const std::string& path) {
  const auto s = read_text(path);
  return io::Bytes(s.begin(), s.end());
}

void write_file(const std::string& path, std::string_view data) {
  if (path == "-") {
    std::cout << data;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

void write_file(const std::string& path, const io::Bytes& data) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

io::RttmMap load_rttm(const std::string& path) {
  std::vector<std::string> warnings;
  auto m = io::parse_rttm(read_text(path), &warnings);
  for (const auto& w : warnings) std::cerr << path << ": " << w << "\n";
  return m;
}

// The single recording of an RTTM file, or the one named by `rec`.
Diarization load_one(const std::string& path, const std::string& rec) {
  auto m = load_rttm(path);
  if (!rec.empty()) {
    auto it = m.find(rec);
    return it == m.end() ? Diarization{rec, {}} : it->second;
  }
  if (m.size() != 1) throw ConstraintError(path + " holds " + std::to_string(m.size()) + " recordings; pass --recording");
  return m.begin()->second;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
// to per-index slots by the caller; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const auto workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Subcommand options

struct Common {
  std::string config;
  int jobs = 1;
};

struct VadFuseOpts {
  std::vector<std::string> inputs;
  float threshold = 0.5f;
  double min_on = 0.0, min_off = 0.0;
  std::string recording = "rec", out = "-", segments, ref;
};

struct SegmentOpts {
  std::string speech, out = "-", recording;
  double window = 1.28, shift = 0.32;
};

struct AhcOpts {
  std::string emb, out = "-", recording = "rec", linkage = "average";
  cluster::AhcParams params;
};

struct ScOpts {
  std::string emb, out = "-", recording = "rec";
  int max_speakers = cluster::kDefaultMaxSpeakers;
  std::size_t context = cluster::kDefaultContext;
  double prune = cluster::kDefaultPrune;
  std::uint64_t seed = 0;
};

struct OverlapOpts {
  std::string base, od, out = "-", recording;
  float overlap_thr = overlap::TsVadConfig{}.overlap_thr;
  double min_on = 0.0, min_off = 0.0;
};

struct TsVadOpts {
  std::string mode = "partial", base, posteriors, speech, out = "-", recording;
  overlap::TsVadConfig cfg;
};

struct FuseOpts {
  std::vector<std::string> inputs;
  std::vector<double> weights;
  double rank_exponent = fusion::kDefaultRankExponent;
  std::string out = "-";
};

struct ScoreOpts {
  std::string ref, hyp, format = "text";
  double collar = metrics::kDefaultCollar;
  bool no_overlap = false, per_recording = false;
};

struct SimulateOpts {
  std::string out_dir = ".", recording = "rec", tsvad_base;
  double duration = 600.0, pattern_duration = 900.0, within_cos = 0.9, noise = 0.2, od_noise = 0.1;
  double shift = 0.32, frame_shift = kDefaultFrameShift, vad_flip = 0.1;
  int speakers = 4, patterns = 8, vad_systems = 3;
  bool keep_silence = false;
  std::size_t dim = 256;
  std::uint64_t seed = 0;
  overlap::TsVadConfig cfg;
};

// ---------------------------------------------------------------------------
// Subcommand bodies

int run_vad_fuse(const VadFuseOpts& o) {
  std::vector<FrameTrack> decisions;
  for (const auto& path : o.inputs) {
    for (const auto& track : io::read_posteriors(read_bytes(path))) {
      const auto segs = vad::binarize(track, o.threshold, o.min_on, o.min_off);
      decisions.push_back(rasterize(segs, track.frame_shift, track.duration()));
    }
  }
  const auto fused = vad::fuse_majority(decisions);
  const auto speech = derasterize(fused);
  Diarization d{o.recording, {}};
  for (const auto& s : speech) d.turns.push_back({s, "speech"});
  write_file(o.out, io::write_rttm(d));
  if (!o.segments.empty()) write_file(o.segments, io::write_segments(o.recording, speech));
  if (!o.ref.empty()) {
    const auto ref = rasterize(speech_support(load_one(o.ref, o.recording)), fused.frame_shift, fused.duration());
    std::cerr << "system  FA%  MISS%  error%\n";
    auto row = [&](const std::string& name, const FrameTrack& t) {
      const auto m = vad::vad_metrics(t, ref);
      std::cerr << name << "  " << fmt3(m.fa_pct) << "  " << fmt3(m.miss_pct) << "  " << fmt3(m.error_pct) << "\n";
    };
    for (std::size_t i = 0; i < decisions.size(); ++i) row("input" + std::to_string(i), decisions[i]);
    row("fused", fused);
  }
  return 0;
}

int run_segment(const SegmentOpts& o) {
  std::string text;
  for (const auto& [rec, d] : load_rttm(o.speech)) {
    if (!o.recording.empty() && rec != o.recording) continue;
    const auto speech = speech_support(d);
    text += io::write_segments(rec, cluster::uniform_segments(speech, o.window, o.shift));
  }
  write_file(o.out, text);
  return 0;
}

cluster::Linkage parse_linkage(const std::string& s) {
  if (s == "average") return cluster::Linkage::Average;
  if (s == "single") return cluster::Linkage::Single;
  if (s == "complete") return cluster::Linkage::Complete;
  throw ConstraintError("unknown linkage " + s);
}

int run_ahc(AhcOpts o) {
  o.params.linkage = parse_linkage(o.linkage);
  const auto embs = io::read_embeddings(read_bytes(o.emb));
  write_file(o.out, io::write_rttm(cluster::diarize_ahc(embs, o.params, o.recording)));
  return 0;
}

int run_sc(const ScOpts& o) {
  const auto embs = io::read_embeddings(read_bytes(o.emb));
  const auto d = cluster::diarize_sc(embs, cluster::CosineAffinityProvider{}, o.recording, o.max_speakers,
                                     o.context, o.seed, o.prune);
  write_file(o.out, io::write_rttm(d));
  return 0;
}

int run_overlap_assign(const OverlapOpts& o) {
  const auto base = load_one(o.base, o.recording);
  const auto tracks = io::read_posteriors(read_bytes(o.od));
  if (tracks.size() != 1) throw ConstraintError("overlap posterior file must hold exactly one track");
  const auto regions = vad::binarize(tracks[0], o.overlap_thr, o.min_on, o.min_off);
  write_file(o.out, io::write_rttm(overlap::assign_overlap_two_nearest(base, regions)));
  return 0;
}

int run_tsvad_merge(const TsVadOpts& o) {
  const auto base = load_one(o.base, o.recording);
  const auto speech_d = o.speech.empty() ? base : load_one(o.speech, base.recording_id);
  const CompactTimeline timeline(speech_support(speech_d));
  const auto selection = overlap::select_targets(base, {}, o.cfg);
  const auto tracks = io::read_posteriors(read_bytes(o.posteriors));
  const auto slots = selection.slot_speakers();
  const auto ts = overlap::tsvad_decode(tracks, slots, o.cfg, timeline, base.recording_id);
  Diarization out;
  if (o.mode == "full") {
    out = overlap::merge_full(ts, overlap::turns_of(base, selection.kept_aside));
  } else if (o.mode == "partial") {
    out = overlap::merge_partial(base, ts, tracks.empty() ? kDefaultFrameShift : tracks.front().frame_shift);
  } else {
    throw ConstraintError("unknown mode " + o.mode);
  }
  write_file(o.out, io::write_rttm(out));
  return 0;
}

int run_fuse(const FuseOpts& o, int jobs) {
  std::vector<io::RttmMap> systems;
  std::set<std::string> recs;
  for (const auto& path : o.inputs) {
    systems.push_back(load_rttm(path));
    for (const auto& [rec, d] : systems.back()) recs.insert(rec);
  }
  const std::vector<std::string> rec_list(recs.begin(), recs.end());
  std::vector<Diarization> fused(rec_list.size());
  parallel_for(rec_list.size(), jobs, [&](std::size_t i) {
    std::vector<Diarization> per;
    for (const auto& m : systems) {
      auto it = m.find(rec_list[i]);
      per.push_back(it == m.end() ? Diarization{rec_list[i], {}} : it->second);
    }
    fused[i] = fusion::fuse(per, o.weights, o.rank_exponent);
  });
  write_file(o.out, io::write_rttm(std::span<const Diarization>(fused)));
  return 0;
}

int run_score(const ScoreOpts& o, int jobs) {
  const auto ref = load_rttm(o.ref);
  const auto hyp = load_rttm(o.hyp);
  for (const auto& [rec, d] : hyp) {
    if (!ref.count(rec)) std::cerr << "warning: hypothesis recording " << rec << " has no reference; skipped\n";
  }
  std::vector<std::string> recs;
  for (const auto& [rec, d] : ref) recs.push_back(rec);
  std::vector<metrics::DerReport> reports(recs.size());
  parallel_for(recs.size(), jobs, [&](std::size_t i) {
    auto it = hyp.find(recs[i]);
    const Diarization h = it == hyp.end() ? Diarization{recs[i], {}} : it->second;
    reports[i] = metrics::der(ref.at(recs[i]), h, o.collar, !o.no_overlap);
  });
  const auto total = metrics::combine(reports);

  std::ostringstream out;
  if (o.format == "kv") {
    auto kv = [&](const std::string& prefix, const metrics::DerReport& r) {
      out << prefix << "scored=" << fmt3(r.scored_speech) << "\n"
          << prefix << "fa=" << fmt3(r.fa_pct) << "\n"
          << prefix << "miss=" << fmt3(r.miss_pct) << "\n"
          << prefix << "confusion=" << fmt3(r.confusion_pct) << "\n"
          << prefix << "der=" << fmt3(r.der_pct) << "\n"
          << prefix << "jer=" << fmt3(r.jer_pct) << "\n";
    };
    if (o.per_recording) {
      for (std::size_t i = 0; i < recs.size(); ++i) kv(recs[i] + ".", reports[i]);
    }
    kv("", total);
  } else if (o.format == "text") {
    auto row = [&](const std::string& name, const metrics::DerReport& r) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%-24s %10.3f %8.3f %8.3f %8.3f %8.3f %8.3f\n", name.c_str(), r.scored_speech,
                    r.fa_pct, r.miss_pct, r.confusion_pct, r.der_pct, r.jer_pct);
      out << buf;
    };
    char head[256];
    std::snprintf(head, sizeof head, "%-24s %10s %8s %8s %8s %8s %8s\n", "recording", "scored_s", "FA%", "MISS%",
                  "CONF%", "DER%", "JER%");
    out << head;
    if (o.per_recording) {
      for (std::size_t i = 0; i < recs.size(); ++i) row(recs[i], reports[i]);
    }
    row("*** OVERALL ***", total);
  } else {
    throw ConstraintError("unknown format " + o.format);
  }
  std::cout << out.str();
  return 0;
}

int run_simulate(const SimulateOpts& o) {
  if (o.patterns < 1) throw ConstraintError("need at least one pattern");
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  std::vector<Diarization> pool;
  for (int i = 0; i < o.patterns; ++i) {
    pool.push_back(simulate::generate_conversation(o.speakers, o.pattern_duration,
                                                   o.seed * 1000003ULL + static_cast<std::uint64_t>(i)));
  }
  const auto truth = o.keep_silence
                         ? simulate::generate_conversation(o.speakers, o.duration, o.seed, {}, o.recording)
                         : simulate::simulate_labels(pool, o.duration, o.seed, o.recording);
  write_file((dir / "ref.rttm").string(), io::write_rttm(truth));

  Diarization speech{o.recording, {}};
  for (const auto& s : speech_support(truth)) speech.turns.push_back({s, "speech"});
  write_file((dir / "speech.rttm").string(), io::write_rttm(speech));

  const auto embs = simulate::simulate_embeddings(truth, o.dim, o.within_cos, o.seed + 1, 1.28, o.shift);
  write_file((dir / "emb.dpe").string(), io::write_embeddings(embs));

  const double end = end_time(truth);
  const std::vector<FrameTrack> od{simulate::simulate_overlap_posterior(truth, o.od_noise, o.frame_shift, end)};
  write_file((dir / "od.dpp").string(), io::write_posteriors(od));

  // Independent noisy copies of the oracle speech decision.
  std::mt19937_64 rng(o.seed + 2);
  std::bernoulli_distribution flip(o.vad_flip);
  const auto clean = rasterize(speech_support(truth), o.frame_shift, end);
  for (int v = 0; v < o.vad_systems; ++v) {
    auto t = clean;
    for (auto& x : t.values) x = flip(rng) ? 1.0f - x : x;
    const std::vector<FrameTrack> one{t};
    write_file((dir / ("vad" + std::to_string(v) + ".dpp")).string(), io::write_posteriors(one));
  }

  if (!o.tsvad_base.empty()) {
    // Slots follow the base labels; each slot carries the activity of the
    // reference speaker that the base label is matched to.
    const auto base = load_one(o.tsvad_base, o.recording);
    const auto selection = overlap::select_targets(base, {}, o.cfg);
    const auto mapping = metrics::der(truth, base, 0.0).mapping;
    std::map<std::string, std::vector<Segment>> renamed;
    for (const auto& [spk, segs] : speaker_supports(truth)) {
      auto it = mapping.find(spk);
      renamed[it == mapping.end() ? "\x01unmatched-" + spk : it->second] = segs;
    }
    const auto target = from_supports(o.recording, renamed);
    const auto ts = simulate::simulate_tsvad_posteriors(target, selection.slot_speakers(), o.noise, o.frame_shift,
                                                        CompactTimeline(speech_support(truth)));
    write_file((dir / "ts.dpp").string(), io::write_posteriors(ts));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Config handling: key = value lines become `--key value` arguments for the
// chosen subcommand, placed before the user's own arguments. Keys the user
// sets explicitly are skipped so command-line flags win.

std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  std::string config_path;
  CLI::App* sub = nullptr;
  std::size_t sub_pos = 0;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    if (!sub) {
      for (auto* s : app.get_subcommands({})) {
        if (s->get_name() == args[i]) {
          sub = s;
          sub_pos = i;
        }
      }
    }
  }
  if (config_path.empty() || !sub) return args;

  auto user_sets = [&](const std::string& flag) {
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  std::vector<std::string> injected;
  for (const auto& [key, value] : io::parse_config(read_text(config_path))) {
    if (key == "config") throw FormatError(config_path + ": config files cannot include other configs");
    const std::string flag = "--" + key;
    if (key == "jobs") {
      if (!user_sets(flag)) {
        injected.push_back(flag);
        injected.push_back(value);
      }
      continue;
    }
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) {
      bool known = false;
      for (auto* s : app.get_subcommands({})) known |= s->get_option_no_throw(flag) != nullptr;
      if (!known) throw FormatError(config_path + ": unknown key " + key);
      continue;
    }
    if (user_sets(flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1") injected.push_back(flag);
      else if (value != "false" && value != "0") throw FormatError(config_path + ": " + key + " expects true/false");
      continue;
    }
    // One token, so list options stop at the value instead of eating positionals.
    injected.push_back(flag + "=" + value);
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diarkit: speaker diarization pipeline stages"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config, "flat key = value file; command-line flags win");
  app.add_option("--jobs", common.jobs, "worker threads for per-recording work")->check(CLI::PositiveNumber);

  VadFuseOpts vf;
  auto* c_vad = app.add_subcommand("vad-fuse", "binarize VAD posteriors and fuse them by majority vote");
  c_vad->add_option("inputs", vf.inputs, "posterior files (DPP1)")->required();
  c_vad->add_option("--threshold", vf.threshold, "speech decision threshold")->capture_default_str();
  c_vad->add_option("--min-on", vf.min_on, "drop speech runs shorter than this (s)")->capture_default_str();
  c_vad->add_option("--min-off", vf.min_off, "fill gaps shorter than this (s)")->capture_default_str();
  c_vad->add_option("--recording", vf.recording, "recording id")->capture_default_str();
  c_vad->add_option("--out", vf.out, "speech RTTM output")->capture_default_str();
  c_vad->add_option("--segments", vf.segments, "optional Kaldi-style segments output");
  c_vad->add_option("--ref", vf.ref, "reference RTTM; prints FA/MISS/error to stderr");

  SegmentOpts sg;
  auto* c_seg = app.add_subcommand("segment", "cut speech regions into uniform windows");
  c_seg->add_option("--speech", sg.speech, "speech RTTM")->required();
  c_seg->add_option("--window", sg.window, "window length (s)")->capture_default_str();
  c_seg->add_option("--shift", sg.shift, "window shift (s)")->capture_default_str();
  c_seg->add_option("--recording", sg.recording, "only this recording");
  c_seg->add_option("--out", sg.out, "segments output")->capture_default_str();

  AhcOpts ah;
  auto* c_ahc = app.add_subcommand("diarize-ahc", "agglomerative clustering of uniform-segment embeddings");
  c_ahc->add_option("--emb", ah.emb, "embedding file (DPE1)")->required();
  c_ahc->add_option("--recording", ah.recording, "recording id")->capture_default_str();
  c_ahc->add_option("--segment-thr", ah.params.segment_thr, "cosine needed to merge consecutive segments")->capture_default_str();
  c_ahc->add_option("--stop-thr", ah.params.stop_thr, "AHC stop threshold (cosine)")->capture_default_str();
  c_ahc->add_option("--long-min", ah.params.long_min, "minimum duration of a long cluster (s)")->capture_default_str();
  c_ahc->add_option("--speaker-thr", ah.params.speaker_thr, "cosine needed to join a long cluster")->capture_default_str();
  c_ahc->add_option("--linkage", ah.linkage, "average|single|complete")->capture_default_str();
  c_ahc->add_option("--out", ah.out, "RTTM output")->capture_default_str();

  ScOpts sc;
  auto* c_sc = app.add_subcommand("diarize-sc", "spectral clustering of uniform-segment embeddings");
  c_sc->add_option("--emb", sc.emb, "embedding file (DPE1)")->required();
  c_sc->add_option("--recording", sc.recording, "recording id")->capture_default_str();
  c_sc->add_option("--max-speakers", sc.max_speakers, "upper bound on the speaker count")->capture_default_str();
  c_sc->add_option("--context", sc.context, "segments per affinity window")->capture_default_str();
  c_sc->add_option("--prune", sc.prune, "fraction of each affinity row kept (0 disables)")->capture_default_str();
  c_sc->add_option("--seed", sc.seed, "k-means seed")->capture_default_str();
  c_sc->add_option("--out", sc.out, "RTTM output")->capture_default_str();

  OverlapOpts ov;
  auto* c_ov = app.add_subcommand("overlap-assign", "label detected overlap with the two nearest speakers");
  c_ov->add_option("--base", ov.base, "clustering RTTM")->required();
  c_ov->add_option("--od", ov.od, "overlap posterior file (DPP1, one track)")->required();
  c_ov->add_option("--overlap-thr", ov.overlap_thr, "overlap decision threshold")->capture_default_str();
  c_ov->add_option("--min-on", ov.min_on, "drop overlap runs shorter than this (s)")->capture_default_str();
  c_ov->add_option("--min-off", ov.min_off, "fill overlap gaps shorter than this (s)")->capture_default_str();
  c_ov->add_option("--recording", ov.recording, "recording in --base");
  c_ov->add_option("--out", ov.out, "RTTM output")->capture_default_str();

  TsVadOpts tv;
  auto* c_tv = app.add_subcommand("tsvad-merge", "decode TS-VAD posteriors and merge them with a base result");
  c_tv->add_option("--mode", tv.mode, "full|partial")->check(CLI::IsMember({"full", "partial"}))->capture_default_str();
  c_tv->add_option("--base", tv.base, "clustering RTTM that defines the slots")->required();
  c_tv->add_option("--posteriors", tv.posteriors, "per-slot posteriors (DPP1) on the speech-only timeline")->required();
  c_tv->add_option("--speech", tv.speech, "speech RTTM defining the speech-only timeline (default: base)");
  c_tv->add_option("--n-slots", tv.cfg.n_slots, "number of target slots")->capture_default_str();
  c_tv->add_option("--chunk", tv.cfg.chunk, "decoding chunk (s)")->capture_default_str();
  c_tv->add_option("--min-enroll", tv.cfg.min_enroll, "speech needed for a slot (s)")->capture_default_str();
  c_tv->add_option("--decision-thr", tv.cfg.decision_thr, "speaker decision threshold")->capture_default_str();
  c_tv->add_option("--recording", tv.recording, "recording in --base");
  c_tv->add_option("--out", tv.out, "RTTM output")->capture_default_str();

  FuseOpts fu;
  auto* c_fu = app.add_subcommand("fuse", "overlap-aware fusion of several RTTM systems");
  c_fu->add_option("inputs", fu.inputs, "RTTM files, best system first")->required();
  c_fu->add_option("--weights", fu.weights, "comma-separated per-system weights (default: rank weights)")
      ->delimiter(',')
      ->allow_extra_args(false);
  c_fu->add_option("--rank-exponent", fu.rank_exponent, "rank weight exponent")->capture_default_str();
  c_fu->add_option("--out", fu.out, "RTTM output")->capture_default_str();

  ScoreOpts so;
  auto* c_so = app.add_subcommand("score", "DER and JER against a reference");
  c_so->add_option("--ref", so.ref, "reference RTTM")->required();
  c_so->add_option("--hyp", so.hyp, "hypothesis RTTM")->required();
  c_so->add_option("--collar", so.collar, "no-score collar around reference boundaries (s)")->capture_default_str();
  c_so->add_flag("--no-overlap", so.no_overlap, "exclude reference overlap from scoring");
  c_so->add_flag("--per-recording", so.per_recording, "also print one row per recording");
  c_so->add_option("--format", so.format, "text|kv")->check(CLI::IsMember({"text", "kv"}))->capture_default_str();

  SimulateOpts si;
  auto* c_si = app.add_subcommand("simulate", "write a synthetic recording: labels, embeddings, posteriors");
  c_si->add_option("--out-dir", si.out_dir, "output directory")->capture_default_str();
  c_si->add_option("--recording", si.recording, "recording id")->capture_default_str();
  c_si->add_option("--duration", si.duration, "speech duration of the recording (s)")->capture_default_str();
  c_si->add_option("--speakers", si.speakers, "speakers per pattern conversation")->capture_default_str();
  c_si->add_flag("--keep-silence", si.keep_silence, "emit one pattern conversation with its pauses instead");
  c_si->add_option("--patterns", si.patterns, "pattern pool size")->capture_default_str();
  c_si->add_option("--pattern-duration", si.pattern_duration, "pattern length (s)")->capture_default_str();
  c_si->add_option("--dim", si.dim, "embedding dimension")->capture_default_str();
  c_si->add_option("--within-cos", si.within_cos, "expected cosine of an embedding to its centroid")->capture_default_str();
  c_si->add_option("--shift", si.shift, "embedding window shift (s)")->capture_default_str();
  c_si->add_option("--frame-shift", si.frame_shift, "posterior frame shift (s)")->capture_default_str();
  c_si->add_option("--od-noise", si.od_noise, "overlap posterior noise")->capture_default_str();
  c_si->add_option("--vad-systems", si.vad_systems, "number of noisy VAD outputs")->capture_default_str();
  c_si->add_option("--vad-flip", si.vad_flip, "per-frame flip probability of VAD outputs")->capture_default_str();
  c_si->add_option("--tsvad-base", si.tsvad_base, "base RTTM; also write per-slot TS-VAD posteriors (ts.dpp)");
  c_si->add_option("--noise", si.noise, "TS-VAD posterior noise")->capture_default_str();
  c_si->add_option("--n-slots", si.cfg.n_slots, "number of target slots")->capture_default_str();
  c_si->add_option("--min-enroll", si.cfg.min_enroll, "speech needed for a slot (s)")->capture_default_str();
  c_si->add_option("--seed", si.seed, "random seed")->capture_default_str();

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(app, std::move(args));
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    try {
      app.parse(std::move(rev));
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 1;
    }

    if (c_vad->parsed()) return run_vad_fuse(vf);
    if (c_seg->parsed()) return run_segment(sg);
    if (c_ahc->parsed()) return run_ahc(ah);
    if (c_sc->parsed()) return run_sc(sc);
    if (c_ov->parsed()) return run_overlap_assign(ov);
    if (c_tv->parsed()) return run_tsvad_merge(tv);
    if (c_fu->parsed()) return run_fuse(fu, common.jobs);
    if (c_so->parsed()) return run_score(so, common.jobs);
    if (c_si->parsed()) return run_simulate(si);
  } catch (const ConstraintError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
