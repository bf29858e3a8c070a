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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ppgbench {

inline constexpr double kNominalSampleRateHz = 200.0;

// Sampling-clock deviation of the capture rig, per sample step.
inline constexpr double kJitterMeanS = 13.32e-6;
inline constexpr double kJitterSigmaS = 202.58e-6;

enum class Gender { kMale, kFemale, kUnknown };

std::string_view to_string(Gender g);
Gender parse_gender(std::string_view s);

struct PpgRecord {
  std::string subject_id;
  std::string session_id;
  double sample_rate_hz = kNominalSampleRateHz;
  std::vector<double> samples;
  Gender gender = Gender::kUnknown;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }

  // Throws ValidationError when the rate is not positive or samples are empty.
  void validate() const;
};

struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;
  std::optional<std::string> text;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Speech intervals from forced alignment, sorted and non-overlapping.
struct AlignmentTrack {
  std::vector<Segment> segments;
  double record_duration_s = 0.0;

  double total_speech_s() const;
  void validate() const;
};

struct PulseMorphology {
  double systolic_width_s = 0.07;  // Gaussian sigma of the systolic bump
  double dicrotic_ratio = 0.4;     // dicrotic bump height relative to systolic
  double dicrotic_delay_s = 0.25;  // dicrotic peak lag after the systolic peak
  double dicrotic_width_s = 0.09;
  double amplitude = 1.0;
};

struct BaselineDrift {
  double amplitude = 0.1;
  double frequency_hz = 0.15;
};

struct SubjectProfile {
  std::string subject_id;
  Gender gender = Gender::kUnknown;
  double heart_rate_hz = 1.2;
  PulseMorphology morphology;
  BaselineDrift drift;
  double noise_sigma = 0.05;
  double speech_coupling = 0.0;

  void validate() const;
};

enum class SessionKind { kCreditCard, kSilence, kPin, kSentences, kFreeSpeech };

std::string_view to_string(SessionKind k);
SessionKind parse_session_kind(std::string_view s);
inline constexpr SessionKind kAllSessionKinds[] = {
    SessionKind::kCreditCard, SessionKind::kSilence, SessionKind::kPin,
    SessionKind::kSentences, SessionKind::kFreeSpeech};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Alternating speech/pause layout. A session starts with a lead-in pause,
// then utterances separated by pauses until either `utterances` have been
// placed (0 = unlimited) or the duration runs out.
struct SegmentLayout {
  Range lead_in_s;
  Range utterance_s;
  Range pause_s;
  int utterances = 0;
  int digits_per_utterance = 0;  // > 0 means the utterance text is a digit string
};

struct SessionTemplate {
  SessionKind kind = SessionKind::kSilence;
  double duration_s = 30.0;
  SegmentLayout layout;
};

// Protocol defaults: 30 s sessions, 60 s free speech.
SessionTemplate default_template(SessionKind kind);

struct JitterParams {
  double mean_s = kJitterMeanS;
  double sigma_s = kJitterSigmaS;
};

// Synthetic sampling instants: t_0 = 0 and t_i = t_{i-1} + period + d_i with
// d_i ~ N(mean, sigma). A step that would not advance time is redrawn.
std::vector<double> jitter_timestamps(double nominal_period_s, std::int64_t n, double mu_s,
                                      double sigma_s, std::uint64_t seed);

SubjectProfile synth_subject(Gender gender, std::uint64_t seed, std::string subject_id = {});

// Speech segments only; boundaries are snapped to the sample grid.
AlignmentTrack synth_layout(const SessionTemplate& tmpl, double sample_rate_hz,
                            std::uint64_t seed);

std::pair<PpgRecord, AlignmentTrack> synth_session(const SubjectProfile& profile,
                                                   const SessionTemplate& tmpl,
                                                   std::uint64_t seed,
                                                   double sample_rate_hz = kNominalSampleRateHz,
                                                   const JitterParams& jitter = {});

struct CohortConfig {
  int n_male = 25;
  int n_female = 6;
  std::vector<SessionKind> sessions{std::begin(kAllSessionKinds), std::end(kAllSessionKinds)};
  double speech_coupling = 0.0;
  double sample_rate_hz = kNominalSampleRateHz;
  // Overrides the per-template duration when > 0 (shrinks test fixtures).
  double session_duration_s = 0.0;
  JitterParams jitter;
  std::uint64_t seed = 0;

  void validate() const;
};

// Subjects are named s001, s002, ... with all males first.
std::vector<SubjectProfile> synth_cohort(const CohortConfig& cfg);

struct SessionData {
  PpgRecord record;
  AlignmentTrack track;
};

std::vector<SessionData> synth_dataset(const CohortConfig& cfg);

// JSON file formats.
PpgRecord load_ppg_record(const std::filesystem::path& path);
void save_ppg_record(const PpgRecord& rec, const std::filesystem::path& path);
AlignmentTrack load_alignment(const std::filesystem::path& path);
void save_alignment(const AlignmentTrack& track, const std::filesystem::path& path);

PpgRecord ppg_record_from_json(std::string_view text);
std::string ppg_record_to_json(const PpgRecord& rec);
AlignmentTrack alignment_from_json(std::string_view text);
std::string alignment_to_json(const AlignmentTrack& track);

// Dataset directories hold <subject>_<session>.record.json and matching
// <subject>_<session>.align.json files.
std::string record_file_name(const PpgRecord& rec);
std::string alignment_file_name(const PpgRecord& rec);
std::vector<SessionData> load_dataset_dir(const std::filesystem::path& dir);

}  // namespace ppgbench
