#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mdm {

/// Relation catalog. Id 0 is reserved for padding.
inline constexpr int kDefaultRelationCount = 7;

enum class Relation : int {
  kPadding = 0,
  kGiveGift = 1,
  kAddFriend = 2,
  kViewProfile = 3,
  kMessage = 4,
  kPetGame = 5,
  kMeetMeGame = 6,
  kReportAbuse = 7,
};

std::string_view relation_name(int relation);

using UserId = std::int64_t;

struct Event {
  std::int64_t timestamp = 0;
  UserId src = 0;
  UserId dst = 0;
  int relation = 0;

  bool self_interaction() const { return src == dst; }
  friend bool operator==(const Event&, const Event&) = default;
};

enum class Label : int { kNormal = 0, kSpammer = 1, kUnknown = -1 };

struct UserSequence {
  UserId user = 0;
  std::vector<int> items;
  Label label = Label::kUnknown;
};

struct CorpusStats {
  std::size_t users = 0;
  std::size_t spammers = 0;
  std::size_t normals = 0;
  std::size_t interactions = 0;
  double mean_length = 0.0;
};

struct Corpus {
  std::vector<UserSequence> sequences;  // ordered by user id
  int relation_count = kDefaultRelationCount;
  CorpusStats stats;
};

struct LineReject {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct ParseResult {
  std::vector<Event> events;
  std::vector<LineReject> rejects;
  std::size_t self_interactions = 0;
};

struct ParseOptions {
  char delimiter = ',';
  int relation_count = kDefaultRelationCount;
};

ParseResult parse_events(std::istream& in, const ParseOptions& opts = {});
/// Throws std::runtime_error if the file cannot be opened.
ParseResult parse_events(const std::filesystem::path& path, const ParseOptions& opts = {});

void write_events(std::ostream& out, const std::vector<Event>& events, char delimiter = ',');
void write_events(const std::filesystem::path& path, const std::vector<Event>& events,
                  char delimiter = ',');

using LabelMap = std::map<UserId, Label>;

/// `user_id,label` with label 0 (normal) or 1 (spammer). Bad lines throw.
LabelMap parse_labels(std::istream& in, char delimiter = ',');
LabelMap parse_labels(const std::filesystem::path& path, char delimiter = ',');
void write_labels(std::ostream& out, const LabelMap& labels, char delimiter = ',');
void write_labels(const std::filesystem::path& path, const LabelMap& labels, char delimiter = ',');

/// One sequence per distinct source user, items in (timestamp, input order).
Corpus build_sequences(const std::vector<Event>& events, const LabelMap& labels,
                       int relation_count = kDefaultRelationCount);

CorpusStats compute_stats(const std::vector<UserSequence>& sequences);

LabelMap labels_of(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SynthConfig {
  std::size_t n_users = 1000;
  double spam_fraction = 0.0445;
  double mean_length = 21.0;
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  std::vector<Event> events;
  LabelMap labels;
  Corpus corpus;
};

/// Labeled synthetic interaction log. Pure function of `cfg`.
SynthCorpus synth_generate(const SynthConfig& cfg);

}  // namespace mdm
