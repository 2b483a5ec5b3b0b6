#include "mdm/feature_table.hpp"

#include "mdm/baselines.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mdm {

namespace {

std::vector<const UserSequence*> labeled(const Corpus& corpus) {
  std::vector<const UserSequence*> out;
  for (const auto& s : corpus.sequences)
    if (s.label != Label::kUnknown) out.push_back(&s);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void write_feature_table(std::ostream& out, const FeatureTable& table) {
  out << "user";
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < table.users.size(); ++i) {
    out << table.users[i];
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", table.values(static_cast<Eigen::Index>(i), j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_feature_table(const std::filesystem::path& path, const FeatureTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_feature_table(out, table);
}

FeatureTable read_feature_table(std::istream& in) {
  FeatureTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("feature table: empty input");
  auto header = split_line(line);
  if (header.empty() || header[0] != "user") throw std::runtime_error("feature table: header must start with user");
  t.columns.assign(header.begin() + 1, header.end());

  std::vector<double> flat;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("feature table: line " + std::to_string(lineno) + " has wrong field count");
    UserId u = 0;
    auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), u);
    if (ec != std::errc() || p != fields[0].data() + fields[0].size())
      throw std::runtime_error("feature table: bad user id on line " + std::to_string(lineno));
    t.users.push_back(u);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(fields[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != fields[j].size())
        throw std::runtime_error("feature table: bad value on line " + std::to_string(lineno));
      flat.push_back(v);
    }
  }
  t.values.resize(static_cast<Eigen::Index>(t.users.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (Eigen::Index i = 0; i < t.values.rows(); ++i)
    for (Eigen::Index j = 0; j < t.values.cols(); ++j)
      t.values(i, j) = flat[static_cast<std::size_t>(i * t.values.cols() + j)];
  return t;
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_feature_table(in);
}

FeatureTable kgram_table(const Corpus& corpus) {
  const auto rows = labeled(corpus);
  const int M = corpus.relation_count;
  FeatureTable t{kgram_column_names(M), {}, MatrixXd(static_cast<Eigen::Index>(rows.size()), M * M)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.users.push_back(rows[i]->user);
    const auto counts = kgram_features(rows[i]->items, M);
    for (std::size_t j = 0; j < counts.size(); ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = counts[j];
  }
  return t;
}

FeatureTable graph_table(const std::vector<Event>& events, const Corpus& corpus) {
  const int M = corpus.relation_count;
  const auto graph_rows = compute_graph_features(build_relation_graphs(events, M));
  const auto rows = labeled(corpus);
  const Eigen::Index width = M * kGraphFeatureCount;
  FeatureTable t{graph_column_names(M), {}, MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), width)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.users.push_back(rows[i]->user);
    if (auto it = graph_rows.find(rows[i]->user); it != graph_rows.end())
      t.values.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const VectorXd>(it->second.data(), width).transpose();
  }
  return t;
}

FeatureTable mdm_table(const Corpus& corpus, const MdmParams<double>& params, FeatureMode mode) {
  const auto rows = labeled(corpus);
  const Eigen::Index width = feature_dim(params.hyper, mode);
  FeatureTable t;
  for (Eigen::Index j = 0; j < width; ++j) t.columns.push_back("mdm_f_" + std::to_string(j));
  t.values.resize(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.users.push_back(rows[i]->user);
    t.values.row(static_cast<Eigen::Index>(i)) = extract_features<double>(rows[i]->items, params, mode).transpose();
  }
  return t;
}

FeatureTable hconcat(const std::vector<FeatureTable>& tables) {
  if (tables.empty()) return {};
  FeatureTable out;
  out.users = tables.front().users;
  Eigen::Index width = 0;
  for (const auto& t : tables) {
    if (t.users != out.users) throw std::invalid_argument("hconcat: tables cover different users");
    out.columns.insert(out.columns.end(), t.columns.begin(), t.columns.end());
    width += t.values.cols();
  }
  out.values.resize(static_cast<Eigen::Index>(out.users.size()), width);
  Eigen::Index off = 0;
  for (const auto& t : tables) {
    out.values.middleCols(off, t.values.cols()) = t.values;
    off += t.values.cols();
  }
  return out;
}

Dataset align_labels(const FeatureTable& table, const LabelMap& labels) {
  std::map<UserId, Eigen::Index> row_of;
  for (std::size_t i = 0; i < table.users.size(); ++i) row_of.emplace(table.users[i], static_cast<Eigen::Index>(i));
  Dataset ds;
  std::vector<Eigen::Index> rows;
  for (const auto& [user, label] : labels) {
    if (label == Label::kUnknown) continue;
    auto it = row_of.find(user);
    if (it == row_of.end()) throw std::invalid_argument("labeled user " + std::to_string(user) + " has no feature row");
    rows.push_back(it->second);
    ds.users.push_back(user);
    ds.y.push_back(label == Label::kSpammer ? 1 : 0);
  }
  ds.X.resize(static_cast<Eigen::Index>(rows.size()), table.values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) ds.X.row(static_cast<Eigen::Index>(i)) = table.values.row(rows[i]);
  return ds;
}

}  // namespace mdm
