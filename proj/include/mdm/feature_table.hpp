#pragma once

#include "mdm/ingest.hpp"
#include "mdm/mdm.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mdm {

/// Named feature columns, one row per user in ascending id order.
struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<UserId> users;
  MatrixXd values;  // users x columns
};

/// CSV with header `user,<columns>`; values printed round-trip exact.
void write_feature_table(std::ostream& out, const FeatureTable& table);
void write_feature_table(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_feature_table(std::istream& in);
FeatureTable read_feature_table(const std::filesystem::path& path);

/// Bigram counts for each labeled user.
FeatureTable kgram_table(const Corpus& corpus);
/// Graph metrics over all events, reported for each labeled user.
FeatureTable graph_table(const std::vector<Event>& events, const Corpus& corpus);
FeatureTable mdm_table(const Corpus& corpus, const MdmParams<double>& params,
                       FeatureMode mode = FeatureMode::kSum);

/// Column-wise concatenation of tables over the same users.
FeatureTable hconcat(const std::vector<FeatureTable>& tables);

struct Dataset {
  MatrixXd X;
  std::vector<int> y;
  std::vector<UserId> users;
};

/// Rows of `table` whose user carries a known label. Throws when a labeled
/// user has no feature row.
Dataset align_labels(const FeatureTable& table, const LabelMap& labels);

}  // namespace mdm
