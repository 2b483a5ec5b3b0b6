#pragma once

// Binary checkpoint container. All integers are little-endian uint64, all
// reals little-endian IEEE-754 binary64, matrices row-major.
//
//   "MDM1"  M  d  relations[M x d]
//           encoder.table[(M+1) x d] encoder.wx[3d x d] encoder.wh[3d x d] encoder.b[3d]
//   optional model block:
//           d n k L window_mode relation_sum components  tensor_count
//           per tensor: uint32 name_len, name bytes, rows, cols, data

#include "mdm/params.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace mdm {

struct Checkpoint {
  RelationEmbeddings<double> relations;
  EncoderParams<double> encoder;
  std::optional<MdmParams<double>> model;  // present when the model block is
};

void save_embeddings(std::ostream& out, const RelationEmbeddings<double>& rel,
                     const EncoderParams<double>& enc);
void save_checkpoint(std::ostream& out, const MdmParams<double>& params);
void save_checkpoint(const std::filesystem::path& path, const MdmParams<double>& params);
void save_embeddings(const std::filesystem::path& path, const RelationEmbeddings<double>& rel,
                     const EncoderParams<double>& enc);

/// Throws std::runtime_error on a bad magic, truncated data, or tensors that
/// do not match the declared hyperparameters.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mdm
