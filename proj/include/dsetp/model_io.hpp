#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dsetp/model.hpp"

namespace dsetp {

// Layout: the line "DSETP1", a one-line JSON header (format version,
// config, inventories, parameter names and shapes), then every parameter
// as little-endian float32 in column-major order, current weights first and
// averaged weights second.
inline constexpr std::string_view kModelMagic = "DSETP1";
inline constexpr int kModelFormatVersion = 1;

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_model(const Model<float>& model, std::ostream& out);
void save_model(const Model<float>& model, const std::filesystem::path& path);

// Throws ModelFormatError on a bad magic string, unsupported version,
// malformed header, shape mismatch, truncation or trailing bytes.
Model<float> load_model(std::istream& in);
Model<float> load_model(const std::filesystem::path& path);

}  // namespace dsetp
