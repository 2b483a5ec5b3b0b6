#include "mdm/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace mdm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string_view relation_name(int relation) {
  switch (static_cast<Relation>(relation)) {
    case Relation::kPadding: return "padding";
    case Relation::kGiveGift: return "give_gift";
    case Relation::kAddFriend: return "add_friend";
    case Relation::kViewProfile: return "view_profile";
    case Relation::kMessage: return "message";
    case Relation::kPetGame: return "pet_game";
    case Relation::kMeetMeGame: return "meet_me_game";
    case Relation::kReportAbuse: return "report_abuse";
  }
  return "unknown";
}

ParseResult parse_events(std::istream& in, const ParseOptions& opts) {
  ParseResult result;
  std::string raw;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line, opts.delimiter);

    Event ev;
    const bool numeric = fields.size() == 4 && parse_int(fields[0], ev.timestamp) &&
                         parse_int(fields[1], ev.src) && parse_int(fields[2], ev.dst) &&
                         parse_int(fields[3], ev.relation);
    if (!numeric) {
      // A non-numeric first line is a header.
      if (!seen_content) {
        seen_content = true;
        std::int64_t probe;
        if (!fields.empty() && !parse_int(fields[0], probe)) continue;
      }
      result.rejects.push_back({line_no, "malformed line"});
      continue;
    }
    seen_content = true;
    if (ev.relation < 1 || ev.relation > opts.relation_count) {
      result.rejects.push_back({line_no, "relation " + std::to_string(ev.relation) +
                                             " outside 1.." +
                                             std::to_string(opts.relation_count)});
      continue;
    }
    if (ev.src < 0 || ev.dst < 0) {
      result.rejects.push_back({line_no, "negative user id"});
      continue;
    }
    if (ev.self_interaction()) ++result.self_interactions;
    result.events.push_back(ev);
  }
  return result;
}

ParseResult parse_events(const std::filesystem::path& path, const ParseOptions& opts) {
  auto in = open_input(path);
  return parse_events(in, opts);
}

void write_events(std::ostream& out, const std::vector<Event>& events, char delimiter) {
  for (const auto& e : events)
    out << e.timestamp << delimiter << e.src << delimiter << e.dst << delimiter << e.relation
        << '\n';
}

void write_events(const std::filesystem::path& path, const std::vector<Event>& events,
                  char delimiter) {
  auto out = open_output(path);
  write_events(out, events, delimiter);
}

LabelMap parse_labels(std::istream& in, char delimiter) {
  LabelMap labels;
  std::string raw;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line, delimiter);
    UserId user;
    int label;
    if (fields.size() != 2 || !parse_int(fields[0], user) || !parse_int(fields[1], label)) {
      if (first) {
        first = false;
        continue;
      }
      throw std::runtime_error("labels: malformed line " + std::to_string(line_no));
    }
    first = false;
    if (label != 0 && label != 1)
      throw std::runtime_error("labels: label must be 0 or 1 on line " + std::to_string(line_no));
    labels[user] = label == 1 ? Label::kSpammer : Label::kNormal;
  }
  return labels;
}

LabelMap parse_labels(const std::filesystem::path& path, char delimiter) {
  auto in = open_input(path);
  return parse_labels(in, delimiter);
}

void write_labels(std::ostream& out, const LabelMap& labels, char delimiter) {
  for (const auto& [user, label] : labels) {
    if (label == Label::kUnknown) continue;
    out << user << delimiter << (label == Label::kSpammer ? 1 : 0) << '\n';
  }
}

void write_labels(const std::filesystem::path& path, const LabelMap& labels, char delimiter) {
  auto out = open_output(path);
  write_labels(out, labels, delimiter);
}

CorpusStats compute_stats(const std::vector<UserSequence>& sequences) {
  CorpusStats s;
  s.users = sequences.size();
  for (const auto& seq : sequences) {
    s.interactions += seq.items.size();
    if (seq.label == Label::kSpammer) ++s.spammers;
    if (seq.label == Label::kNormal) ++s.normals;
  }
  s.mean_length = s.users == 0 ? 0.0 : double(s.interactions) / double(s.users);
  return s;
}

Corpus build_sequences(const std::vector<Event>& events, const LabelMap& labels,
                       int relation_count) {
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (events[a].src != events[b].src) return events[a].src < events[b].src;
    return events[a].timestamp < events[b].timestamp;
  });

  Corpus corpus;
  corpus.relation_count = relation_count;
  for (std::size_t idx : order) {
    const Event& e = events[idx];
    if (corpus.sequences.empty() || corpus.sequences.back().user != e.src) {
      UserSequence seq;
      seq.user = e.src;
      if (auto it = labels.find(e.src); it != labels.end()) seq.label = it->second;
      corpus.sequences.push_back(std::move(seq));
    }
    corpus.sequences.back().items.push_back(e.relation);
  }
  corpus.stats = compute_stats(corpus.sequences);
  return corpus;
}

LabelMap labels_of(const Corpus& corpus) {
  LabelMap labels;
  for (const auto& s : corpus.sequences)
    if (s.label != Label::kUnknown) labels[s.user] = s.label;
  return labels;
}

}  // namespace mdm
