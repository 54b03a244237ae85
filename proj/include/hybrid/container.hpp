/// @file container.hpp
/// @brief Binary tensor container shared by datasets and model weights.
///
/// Layout (all integers little-endian):
///   "HIM1" | u32 version | u64 header length | UTF-8 JSON header | payload
/// The JSON header lists tensors as {name, dtype:"f64", shape, byte_offset}
/// (offset relative to the payload start) plus a free-form "meta" object.
/// The payload is raw little-endian float64, row-major.

#pragma once

#include "hybrid/linalg.hpp"

#include <json.hpp>

#include <array>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybrid {

inline constexpr char kContainerMagic[4] = {'H', 'I', 'M', '1'};
inline constexpr std::uint32_t kContainerVersion = 1;

class ContainerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t numel() const;
};

struct Container {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<Tensor> tensors;

  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  void add(std::string name, std::vector<std::size_t> shape, std::vector<double> data);
};

std::vector<std::uint8_t> serialize_container(const Container& c);
Container parse_container(const std::vector<std::uint8_t>& bytes);

/// Row-major matrix tensor helpers. get_matrix checks the rank and, when
/// rows/cols are given, the exact shape.
void add_matrix(Container& c, const std::string& name, const Matrix& m);
Matrix get_matrix(const Container& c, const std::string& name, std::optional<std::size_t> rows = {},
                  std::optional<std::size_t> cols = {});
/// Point lists are stored as (count x 2) tensors.
void add_points(Container& c, const std::string& name, const std::vector<std::array<double, 2>>& pts);
std::vector<std::array<double, 2>> get_points(const Container& c, const std::string& name);

void write_container(const Container& c, const std::string& path);
Container read_container(const std::string& path);

}  // namespace hybrid
