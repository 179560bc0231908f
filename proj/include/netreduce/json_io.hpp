#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace netreduce {

class Network;

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json model_to_json(const Network& net);
Network model_from_json(const Json& doc);

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Reads a whole file; throws std::runtime_error naming the path on failure.
std::string read_text_file(const std::string& path);
/// Writes a file, creating missing parent directories.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace netreduce
