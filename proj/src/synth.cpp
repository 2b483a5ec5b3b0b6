#include "mdm/ingest.hpp"
#include "mdm/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace mdm {

namespace {

// Behaviour tables, version 3. Changing any value here changes every
// synthetic corpus, so bump the version alongside.
constexpr int kTablesVersion = 3;

constexpr std::int64_t kDayStart = 1398297600;
constexpr std::int64_t kDaySeconds = 86400;

using Row = std::array<double, 7>;  // probabilities of relations 1..7

// Normal users: view profile -> add friend -> message / gift chains, with
// short game sessions in between. Row 0 is the initial distribution.
constexpr std::array<Row, 8> kNormalTransitions = {{
    {0.03, 0.10, 0.35, 0.15, 0.17, 0.18, 0.02},  // start
    {0.05, 0.05, 0.25, 0.40, 0.10, 0.13, 0.02},  // after give gift
    {0.15, 0.10, 0.20, 0.40, 0.05, 0.08, 0.02},  // after add friend
    {0.05, 0.35, 0.25, 0.15, 0.07, 0.12, 0.01},  // after view profile
    {0.125, 0.105, 0.397, 0.08, 0.126, 0.146, 0.021},  // after message
    {0.058, 0.118, 0.352, 0.176, 0.12, 0.153, 0.023},  // after pet game
    {0.059, 0.235, 0.352, 0.141, 0.07, 0.12, 0.023},  // after meet-me game
    {0.02, 0.05, 0.40, 0.20, 0.13, 0.18, 0.02},  // after report abuse
}};

// Spammers repeat one relation and occasionally step aside for one or two
// camouflage relations (pet-game farming followed by a message, message
// bursts broken by a profile view, add-friend/gift/message unions).
struct SpamStyle {
  int dominant;
  double weight;
  Row camouflage;
};

constexpr std::array<SpamStyle, 3> kSpamStyles = {{
    {5, 0.5, {0.00, 0.15, 0.20, 0.50, 0.00, 0.15, 0.00}},
    {4, 0.3, {0.10, 0.10, 0.45, 0.00, 0.35, 0.00, 0.00}},
    {2, 0.2, {0.45, 0.00, 0.10, 0.45, 0.00, 0.00, 0.00}},
}};

constexpr double kSpamRepeat = 0.85;
constexpr double kSecondCamouflageStep = 0.4;
constexpr double kImitationPrefixChance = 0.2;
constexpr double kImitationStepChance = 0.04;
constexpr double kNormalCircleChance = 0.85;
constexpr std::size_t kMaxLength = 200;
constexpr std::size_t kMinBurst = 6;

int draw_relation(const Row& row, std::mt19937_64& rng) {
  double u = uniform01(rng);
  for (std::size_t r = 0; r < row.size(); ++r) {
    u -= row[r];
    if (u < 0) return static_cast<int>(r) + 1;
  }
  // Rounding slack: fall back to the last relation with mass.
  for (std::size_t r = row.size(); r-- > 0;)
    if (row[r] > 0) return static_cast<int>(r) + 1;
  return 1;
}

std::size_t draw_length(double mean_length, std::mt19937_64& rng) {
  const double scale = mean_length - 1.5;
  const double u = 1.0 - uniform01(rng);  // (0, 1]
  const auto extra = static_cast<std::size_t>(std::floor(-std::log(u) * scale));
  return std::min<std::size_t>(2 + extra, kMaxLength);
}

void normal_steps(std::vector<int>& items, std::size_t count, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    const int prev = items.empty() ? 0 : items.back();
    items.push_back(draw_relation(kNormalTransitions[static_cast<std::size_t>(prev)], rng));
  }
}

const SpamStyle& draw_style(std::mt19937_64& rng) {
  double u = uniform01(rng);
  for (const auto& s : kSpamStyles) {
    u -= s.weight;
    if (u < 0) return s;
  }
  return kSpamStyles.back();
}

void spam_steps(std::vector<int>& items, std::size_t length, std::mt19937_64& rng) {
  const SpamStyle& style = draw_style(rng);
  // Shallow imitation: one or two normal steps, up front or mixed into the bursts.
  const auto imitate = [&] { normal_steps(items, 1 + uniform_index(rng, 2), rng); };
  if (uniform01(rng) < kImitationPrefixChance) imitate();
  items.push_back(style.dominant);
  while (items.size() < length) {
    if (uniform01(rng) < kImitationStepChance) {
      imitate();
      continue;
    }
    if (uniform01(rng) < kSpamRepeat) {
      items.push_back(style.dominant);
      continue;
    }
    items.push_back(draw_relation(style.camouflage, rng));
    if (items.size() < length && uniform01(rng) < kSecondCamouflageStep)
      items.push_back(draw_relation(style.camouflage, rng));
    if (items.size() < length) items.push_back(style.dominant);
  }
  items.resize(length);
}

}  // namespace

SynthCorpus synth_generate(const SynthConfig& cfg) {
  static_assert(kTablesVersion == 3);
  if (cfg.n_users == 0) throw std::invalid_argument("synth: n_users must be positive");
  if (!(cfg.spam_fraction > 0.0 && cfg.spam_fraction < 1.0))
    throw std::invalid_argument("synth: spam_fraction must lie in (0, 1)");
  if (!(cfg.mean_length >= 2.0)) throw std::invalid_argument("synth: mean_length must be >= 2");

  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = cfg.n_users;

  struct Pending {
    Event event;
    std::size_t ordinal;
  };
  std::vector<Pending> pending;
  SynthCorpus out;

  for (std::size_t u = 0; u < n; ++u) {
    const auto user = static_cast<UserId>(u);
    const bool spammer = uniform01(rng) < cfg.spam_fraction;
    out.labels[user] = spammer ? Label::kSpammer : Label::kNormal;

    const std::size_t drawn = draw_length(cfg.mean_length, rng);
    const std::size_t length = spammer ? std::max(drawn, kMinBurst) : drawn;
    std::vector<int> items;
    items.reserve(length);
    if (spammer)
      spam_steps(items, length, rng);
    else
      normal_steps(items, length, rng);

    // Normal users mostly interact within a small circle; spammers spray.
    std::vector<UserId> circle;
    if (!spammer && n > 1) {
      const std::size_t size = 3 + uniform_index(rng, 8);
      for (std::size_t i = 0; i < size; ++i) circle.push_back(static_cast<UserId>(uniform_index(rng, n)));
    }

    std::vector<std::int64_t> times(length);
    for (auto& t : times) t = kDayStart + static_cast<std::int64_t>(uniform_index(rng, kDaySeconds));
    std::sort(times.begin(), times.end());

    for (std::size_t i = 0; i < length; ++i) {
      UserId dst;
      if (n == 1) {
        dst = user;
      } else if (!circle.empty() && uniform01(rng) < kNormalCircleChance) {
        dst = circle[uniform_index(rng, circle.size())];
      } else {
        dst = static_cast<UserId>(uniform_index(rng, n));
      }
      if (dst == user && n > 1) dst = static_cast<UserId>((u + 1) % n);
      pending.push_back({{times[i], user, dst, items[i]}, i});
    }
  }

  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    if (a.event.timestamp != b.event.timestamp) return a.event.timestamp < b.event.timestamp;
    if (a.event.src != b.event.src) return a.event.src < b.event.src;
    return a.ordinal < b.ordinal;
  });
  out.events.reserve(pending.size());
  for (const auto& p : pending) out.events.push_back(p.event);
  out.corpus = build_sequences(out.events, out.labels);
  return out;
}

}  // namespace mdm
