#pragma once

#include "simpgcn/train.hpp"

#include <filesystem>
#include <string>

namespace simpgcn {

/// Trained parameters plus everything needed to rebuild the run.
struct Checkpoint {
  std::string dataset;
  SplitPolicy split = SplitPolicy::planetoid;
  TrainConfig config;
  ModelParams params;
};

/// Text container: a versioned header, the dataset name, the split policy, the config as one
/// JSON line, gamma and lambda, then every tensor by name with its shape and
/// values in hexadecimal floating point. Round-trips bit-exactly.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws std::runtime_error if unreadable, FormatError (with line number) if malformed.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace simpgcn
