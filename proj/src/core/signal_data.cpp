// Copyright 2026 The ppgbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ppgbench/core/signal_data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "ppgbench/core/error.h"
#include "ppgbench/core/rng.h"

namespace ppgbench {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Sub-stream indices for synth_session; each physiological component draws
// from its own generator so switching one off leaves the others untouched.
enum Stream : std::uint64_t {
  kLayoutStream = 1,
  kBeatStream,
  kJitterStream,
  kNoiseStream,
  kDriftStream,
  kSpeechStream,
};

double draw(Rng& rng, Range r) { return uniform(rng, r.lo, r.hi); }

double snap(double t, double rate) { return std::round(t * rate) / rate; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

const json& field(const json& doc, const char* name, std::string_view what) {
  if (!doc.is_object()) throw ParseError(std::string(what) + ": document is not an object");
  auto it = doc.find(name);
  if (it == doc.end()) {
    throw ParseError(std::string(what) + ": missing field '" + name + "'");
  }
  return *it;
}

double number_field(const json& doc, const char* name, std::string_view what) {
  const json& v = field(doc, name, what);
  if (!v.is_number()) {
    throw ParseError(std::string(what) + ": field '" + name + "' is not a number");
  }
  return v.get<double>();
}

std::string string_field(const json& doc, const char* name, std::string_view what) {
  const json& v = field(doc, name, what);
  if (!v.is_string()) {
    throw ParseError(std::string(what) + ": field '" + name + "' is not a string");
  }
  return v.get<std::string>();
}

}  // namespace

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::kMale: return "male";
    case Gender::kFemale: return "female";
    case Gender::kUnknown: return "unknown";
  }
  return "unknown";
}

Gender parse_gender(std::string_view s) {
  if (s == "male") return Gender::kMale;
  if (s == "female") return Gender::kFemale;
  if (s == "unknown") return Gender::kUnknown;
  throw ParseError("unknown gender '" + std::string(s) + "'");
}

std::string_view to_string(SessionKind k) {
  switch (k) {
    case SessionKind::kCreditCard: return "credit_card";
    case SessionKind::kSilence: return "silence";
    case SessionKind::kPin: return "pin";
    case SessionKind::kSentences: return "sentences";
    case SessionKind::kFreeSpeech: return "free_speech";
  }
  return "silence";
}

SessionKind parse_session_kind(std::string_view s) {
  for (SessionKind k : kAllSessionKinds) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown session kind '" + std::string(s) + "'");
}

void PpgRecord::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw ValidationError("record " + subject_id + "/" + session_id +
                          ": sample_rate_hz must be positive");
  }
  if (samples.empty()) {
    throw ValidationError("record " + subject_id + "/" + session_id + ": no samples");
  }
}

double AlignmentTrack::total_speech_s() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.end_s - s.start_s;
  return total;
}

void AlignmentTrack::validate() const {
  if (!(record_duration_s >= 0.0)) {
    throw ValidationError("alignment: record_duration_s must be non-negative");
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (!(s.start_s >= 0.0) || !(s.start_s < s.end_s)) {
      std::ostringstream msg;
      msg << "alignment: segment " << i << " [" << s.start_s << ", " << s.end_s
          << ") must satisfy 0 <= start < end";
      throw ValidationError(msg.str());
    }
    if (s.end_s > record_duration_s) {
      std::ostringstream msg;
      msg << "alignment: segment " << i << " ends at " << s.end_s
          << " s, past the record duration " << record_duration_s << " s";
      throw ValidationError(msg.str());
    }
    if (i > 0 && segments[i - 1].end_s > s.start_s) {
      std::ostringstream msg;
      msg << "alignment: segments " << i - 1 << " and " << i << " overlap";
      throw ValidationError(msg.str());
    }
  }
}

void SubjectProfile::validate() const {
  if (!(heart_rate_hz >= 0.8 && heart_rate_hz <= 2.0)) {
    throw ValidationError("subject " + subject_id + ": heart_rate_hz outside [0.8, 2.0]");
  }
  if (!(noise_sigma >= 0.0)) throw ValidationError("subject " + subject_id + ": noise_sigma < 0");
  if (!(speech_coupling >= 0.0)) {
    throw ValidationError("subject " + subject_id + ": speech_coupling < 0");
  }
  if (!(morphology.systolic_width_s > 0.0) || !(morphology.dicrotic_width_s > 0.0)) {
    throw ValidationError("subject " + subject_id + ": pulse widths must be positive");
  }
}

SessionTemplate default_template(SessionKind kind) {
  SessionTemplate t;
  t.kind = kind;
  t.duration_s = 30.0;
  switch (kind) {
    case SessionKind::kCreditCard:
      // Two 16-digit numbers at a regular pace, longer pause in between.
      t.layout = {{1.0, 3.0}, {5.6, 7.2}, {2.5, 4.0}, 2, 16};
      break;
    case SessionKind::kSilence:
      break;
    case SessionKind::kPin:
      // Four 6-digit PINs.
      t.layout = {{1.0, 3.0}, {2.1, 2.7}, {1.5, 3.0}, 4, 6};
      break;
    case SessionKind::kSentences:
      t.layout = {{1.0, 3.0}, {3.0, 5.0}, {2.5, 4.5}, 0, 0};
      break;
    case SessionKind::kFreeSpeech:
      t.duration_s = 60.0;
      t.layout = {{0.5, 2.0}, {2.0, 5.0}, {2.5, 4.5}, 0, 0};
      break;
  }
  return t;
}

std::vector<double> jitter_timestamps(double nominal_period_s, std::int64_t n, double mu_s,
                                      double sigma_s, std::uint64_t seed) {
  if (!(nominal_period_s > 0.0)) throw ValidationError("jitter: nominal period must be > 0");
  if (n < 1) throw ValidationError("jitter: n must be >= 1");
  if (!(sigma_s >= 0.0)) throw ValidationError("jitter: sigma must be >= 0");
  if (sigma_s == 0.0 && nominal_period_s + mu_s <= 0.0) {
    throw ValidationError("jitter: mean deviation cancels the sampling period");
  }
  Rng rng = make_rng(seed);
  std::vector<double> times(static_cast<std::size_t>(n));
  times[0] = 0.0;
  for (std::int64_t i = 1; i < n; ++i) {
    double step = 0.0;
    do {
      step = nominal_period_s + mu_s + sigma_s * standard_normal(rng);
    } while (!(step > 0.0));
    times[static_cast<std::size_t>(i)] = times[static_cast<std::size_t>(i - 1)] + step;
  }
  return times;
}

SubjectProfile synth_subject(Gender gender, std::uint64_t seed, std::string subject_id) {
  Rng rng = make_rng(seed);
  SubjectProfile p;
  p.subject_id = std::move(subject_id);
  p.gender = gender;

  Range hr{0.95, 1.65};
  Range ratio{0.2, 0.6};
  Range width{0.05, 0.09};
  if (gender == Gender::kMale) {
    hr = {0.95, 1.45};
    ratio = {0.3, 0.6};
    width = {0.06, 0.09};
  } else if (gender == Gender::kFemale) {
    hr = {1.15, 1.65};
    ratio = {0.2, 0.45};
    width = {0.05, 0.075};
  }
  p.heart_rate_hz = draw(rng, hr);
  p.morphology.systolic_width_s = draw(rng, width);
  p.morphology.dicrotic_ratio = draw(rng, ratio);
  p.morphology.dicrotic_delay_s = draw(rng, {0.20, 0.32});
  p.morphology.dicrotic_width_s = draw(rng, {0.06, 0.11});
  p.morphology.amplitude = draw(rng, {0.8, 1.2});
  p.drift.amplitude = draw(rng, {0.05, 0.25});
  p.drift.frequency_hz = draw(rng, {0.05, 0.3});
  p.noise_sigma = draw(rng, {0.03, 0.08});
  p.speech_coupling = 0.0;
  return p;
}

AlignmentTrack synth_layout(const SessionTemplate& tmpl, double sample_rate_hz,
                            std::uint64_t seed) {
  if (!(tmpl.duration_s >= 1.0)) throw ValidationError("session duration must be >= 1.0 s");
  if (!(sample_rate_hz > 0.0)) throw ValidationError("sample rate must be > 0");

  const auto n = static_cast<std::int64_t>(std::llround(tmpl.duration_s * sample_rate_hz));
  AlignmentTrack track;
  track.record_duration_s = static_cast<double>(n) / sample_rate_hz;
  if (tmpl.kind == SessionKind::kSilence) return track;

  const SegmentLayout& lay = tmpl.layout;
  Rng rng = make_rng(seed);
  double t = draw(rng, lay.lead_in_s);
  int placed = 0;
  while (lay.utterances == 0 || placed < lay.utterances) {
    const double len = draw(rng, lay.utterance_s);
    const double start = snap(t, sample_rate_hz);
    const double end = snap(t + len, sample_rate_hz);
    if (end > track.record_duration_s || !(start < end)) break;
    Segment seg{start, end, std::nullopt};
    if (lay.digits_per_utterance > 0) {
      std::string digits;
      for (int d = 0; d < lay.digits_per_utterance; ++d) {
        digits.push_back(static_cast<char>('0' + uniform_index(rng, 10)));
      }
      seg.text = std::move(digits);
    } else if (tmpl.kind == SessionKind::kSentences) {
      seg.text = "sentence " + std::to_string(placed + 1);
    }
    track.segments.push_back(std::move(seg));
    ++placed;
    t = end + draw(rng, lay.pause_s);
  }
  return track;
}

std::pair<PpgRecord, AlignmentTrack> synth_session(const SubjectProfile& profile,
                                                   const SessionTemplate& tmpl,
                                                   std::uint64_t seed, double sample_rate_hz,
                                                   const JitterParams& jitter) {
  profile.validate();
  AlignmentTrack track = synth_layout(tmpl, sample_rate_hz, derive_seed(seed, kLayoutStream));

  const double period = 1.0 / sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(tmpl.duration_s * sample_rate_hz));
  const double duration = static_cast<double>(n) * period;

  // Beat onsets with mild beat-to-beat variability.
  Rng beat_rng = make_rng(derive_seed(seed, kBeatStream));
  const double mean_ibi = 1.0 / profile.heart_rate_hz;
  std::vector<double> beats;
  for (double tb = -uniform(beat_rng, 0.0, mean_ibi) - 1.0; tb < duration + 2.0;) {
    beats.push_back(tb);
    const double ibi = mean_ibi * (1.0 + 0.03 * standard_normal(beat_rng));
    tb += std::max(ibi, 0.3 * mean_ibi);
  }

  Rng drift_rng = make_rng(derive_seed(seed, kDriftStream));
  const double drift_phase = uniform(drift_rng, 0.0, kTwoPi);

  // Band-limited 4-12 Hz component with unit RMS.
  constexpr int kSpeechTones = 6;
  Rng speech_rng = make_rng(derive_seed(seed, kSpeechStream));
  double tone_hz[kSpeechTones];
  double tone_phase[kSpeechTones];
  for (int k = 0; k < kSpeechTones; ++k) {
    tone_hz[k] = uniform(speech_rng, 4.0, 12.0);
    tone_phase[k] = uniform(speech_rng, 0.0, kTwoPi);
  }
  const double tone_norm = 1.0 / std::sqrt(kSpeechTones / 2.0);

  const PulseMorphology& m = profile.morphology;
  const double inv2s = 1.0 / (2.0 * m.systolic_width_s * m.systolic_width_s);
  const double inv2d = 1.0 / (2.0 * m.dicrotic_width_s * m.dicrotic_width_s);

  std::size_t first_beat = 0;
  std::size_t seg_idx = 0;
  auto analog = [&](double t) {
    while (first_beat < beats.size() && beats[first_beat] < t - 1.5) ++first_beat;
    double v = 0.0;
    for (std::size_t b = first_beat; b < beats.size() && beats[b] < t + 0.6; ++b) {
      const double ds = t - beats[b];
      const double dd = ds - m.dicrotic_delay_s;
      v += std::exp(-ds * ds * inv2s) + m.dicrotic_ratio * std::exp(-dd * dd * inv2d);
    }
    v *= m.amplitude;
    v += profile.drift.amplitude * std::sin(kTwoPi * profile.drift.frequency_hz * t + drift_phase);
    if (profile.speech_coupling > 0.0) {
      while (seg_idx < track.segments.size() && track.segments[seg_idx].end_s <= t) ++seg_idx;
      if (seg_idx < track.segments.size() && track.segments[seg_idx].start_s <= t) {
        double s = 0.0;
        for (int k = 0; k < kSpeechTones; ++k) s += std::sin(kTwoPi * tone_hz[k] * t + tone_phase[k]);
        v += profile.speech_coupling * tone_norm * s;
      }
    }
    return v;
  };

  // Irregular acquisition instants, then linear interpolation back onto the
  // uniform grid.
  const auto n_raw = static_cast<std::int64_t>(n + n / 20 + 16);
  std::vector<double> raw_t =
      jitter_timestamps(period, n_raw, jitter.mean_s, jitter.sigma_s, derive_seed(seed, kJitterStream));
  Rng noise_rng = make_rng(derive_seed(seed, kNoiseStream));
  std::vector<double> raw_v(raw_t.size());
  for (std::size_t i = 0; i < raw_t.size(); ++i) {
    raw_v[i] = analog(raw_t[i]) + profile.noise_sigma * standard_normal(noise_rng);
  }

  PpgRecord rec;
  rec.subject_id = profile.subject_id;
  rec.session_id = std::string(to_string(tmpl.kind));
  rec.gender = profile.gender;
  rec.sample_rate_hz = sample_rate_hz;
  rec.samples.resize(n);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * period;
    while (j + 2 < raw_t.size() && raw_t[j + 1] <= t) ++j;
    const double t0 = raw_t[j];
    const double t1 = raw_t[j + 1];
    const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
    rec.samples[k] = raw_v[j] + w * (raw_v[j + 1] - raw_v[j]);
  }
  return {std::move(rec), std::move(track)};
}

void CohortConfig::validate() const {
  if (n_male < 0 || n_female < 0) throw ValidationError("cohort: negative subject count");
  if (n_male + n_female == 0) throw ValidationError("cohort: zero subjects");
  if (sessions.empty()) throw ValidationError("cohort: no session templates");
  if (!(speech_coupling >= 0.0)) throw ValidationError("cohort: speech_coupling must be >= 0");
  if (!(sample_rate_hz > 0.0)) throw ValidationError("cohort: sample_rate_hz must be > 0");
  if (session_duration_s != 0.0 && !(session_duration_s >= 1.0)) {
    throw ValidationError("cohort: session_duration_s must be >= 1.0 when set");
  }
  if (!(jitter.sigma_s >= 0.0)) throw ValidationError("cohort: jitter sigma must be >= 0");
}

std::vector<SubjectProfile> synth_cohort(const CohortConfig& cfg) {
  cfg.validate();
  std::vector<SubjectProfile> out;
  const int total = cfg.n_male + cfg.n_female;
  out.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "s%03d", i + 1);
    const Gender g = i < cfg.n_male ? Gender::kMale : Gender::kFemale;
    SubjectProfile p = synth_subject(g, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)), id);
    p.speech_coupling = cfg.speech_coupling;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SessionData> synth_dataset(const CohortConfig& cfg) {
  const auto cohort = synth_cohort(cfg);
  std::vector<SessionData> out;
  const std::uint64_t session_master = derive_seed(cfg.seed, 0x5e55);
  std::uint64_t idx = 0;
  for (const auto& subject : cohort) {
    for (SessionKind kind : cfg.sessions) {
      SessionTemplate tmpl = default_template(kind);
      if (cfg.session_duration_s > 0.0) tmpl.duration_s = cfg.session_duration_s;
      auto [rec, track] =
          synth_session(subject, tmpl, derive_seed(session_master, idx++), cfg.sample_rate_hz, cfg.jitter);
      out.push_back({std::move(rec), std::move(track)});
    }
  }
  return out;
}

PpgRecord ppg_record_from_json(std::string_view text) {
  constexpr std::string_view what = "record";
  const json doc = parse_json(text, what);
  PpgRecord rec;
  rec.subject_id = string_field(doc, "subject_id", what);
  rec.session_id = string_field(doc, "session_id", what);
  rec.gender = parse_gender(string_field(doc, "gender", what));
  rec.sample_rate_hz = number_field(doc, "sample_rate_hz", what);
  const json& samples = field(doc, "samples", what);
  if (!samples.is_array()) throw ParseError("record: field 'samples' is not an array");
  rec.samples.reserve(samples.size());
  for (const auto& v : samples) {
    if (!v.is_number()) throw ParseError("record: field 'samples' holds a non-number");
    rec.samples.push_back(v.get<double>());
  }
  rec.validate();
  return rec;
}

std::string ppg_record_to_json(const PpgRecord& rec) {
  json doc;
  doc["subject_id"] = rec.subject_id;
  doc["session_id"] = rec.session_id;
  doc["gender"] = to_string(rec.gender);
  doc["sample_rate_hz"] = rec.sample_rate_hz;
  doc["samples"] = rec.samples;
  return doc.dump();
}

AlignmentTrack alignment_from_json(std::string_view text) {
  constexpr std::string_view what = "alignment";
  const json doc = parse_json(text, what);
  AlignmentTrack track;
  track.record_duration_s = number_field(doc, "record_duration_s", what);
  const json& segs = field(doc, "segments", what);
  if (!segs.is_array()) throw ParseError("alignment: field 'segments' is not an array");
  for (const auto& s : segs) {
    Segment seg;
    seg.start_s = number_field(s, "start_s", "alignment segment");
    seg.end_s = number_field(s, "end_s", "alignment segment");
    if (auto it = s.find("text"); it != s.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError("alignment segment: field 'text' is not a string");
      seg.text = it->get<std::string>();
    }
    track.segments.push_back(std::move(seg));
  }
  std::stable_sort(track.segments.begin(), track.segments.end(),
                   [](const Segment& a, const Segment& b) { return a.start_s < b.start_s; });
  track.validate();
  return track;
}

std::string alignment_to_json(const AlignmentTrack& track) {
  json doc;
  doc["record_duration_s"] = track.record_duration_s;
  json segs = json::array();
  for (const auto& s : track.segments) {
    json js{{"start_s", s.start_s}, {"end_s", s.end_s}};
    if (s.text) js["text"] = *s.text;
    segs.push_back(std::move(js));
  }
  doc["segments"] = std::move(segs);
  return doc.dump();
}

PpgRecord load_ppg_record(const std::filesystem::path& path) {
  try {
    return ppg_record_from_json(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_ppg_record(const PpgRecord& rec, const std::filesystem::path& path) {
  rec.validate();
  write_file(path, ppg_record_to_json(rec));
}

AlignmentTrack load_alignment(const std::filesystem::path& path) {
  try {
    return alignment_from_json(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_alignment(const AlignmentTrack& track, const std::filesystem::path& path) {
  track.validate();
  write_file(path, alignment_to_json(track));
}

std::string record_file_name(const PpgRecord& rec) {
  return rec.subject_id + "_" + rec.session_id + ".record.json";
}

std::string alignment_file_name(const PpgRecord& rec) {
  return rec.subject_id + "_" + rec.session_id + ".align.json";
}

std::vector<SessionData> load_dataset_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ValidationError("data directory not found: " + dir.string());
  std::vector<fs::path> records;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.ends_with(".record.json")) records.push_back(entry.path());
  }
  if (records.empty()) throw ValidationError("no *.record.json files in " + dir.string());
  std::sort(records.begin(), records.end());

  std::vector<SessionData> out;
  out.reserve(records.size());
  for (const auto& path : records) {
    SessionData s;
    s.record = load_ppg_record(path);
    const fs::path align = dir / alignment_file_name(s.record);
    if (!fs::exists(align)) throw ValidationError("missing alignment file " + align.string());
    s.track = load_alignment(align);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ppgbench
