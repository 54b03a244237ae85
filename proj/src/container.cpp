/// @file container.cpp
/// @brief Container encoding: JSON header, then raw little-endian tensor bytes.

#include "hybrid/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace hybrid {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t pos) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in[pos + i]) << (8 * i);
  return v;
}

}  // namespace

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

bool Container::has(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

const Tensor& Container::get(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw ContainerError("container: missing tensor '" + name + "'");
}

void Container::add(std::string name, std::vector<std::size_t> shape, std::vector<double> data) {
  Tensor t{std::move(name), std::move(shape), std::move(data)};
  if (t.numel() != t.data.size())
    throw ContainerError("container: tensor '" + t.name + "' shape does not match its data");
  tensors.push_back(std::move(t));
}

std::vector<std::uint8_t> serialize_container(const Container& c) {
  nlohmann::json header;
  header["meta"] = c.meta;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& t : c.tensors) {
    if (t.numel() != t.data.size())
      throw ContainerError("container: tensor '" + t.name + "' shape does not match its data");
    header["tensors"].push_back(
        {{"name", t.name}, {"dtype", "f64"}, {"shape", t.shape}, {"byte_offset", offset}});
    offset += 8 * t.data.size();
  }
  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(16 + text.size() + offset);
  out.insert(out.end(), std::begin(kContainerMagic), std::end(kContainerMagic));
  put_le<std::uint32_t>(out, kContainerVersion);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& t : c.tensors)
    for (double v : t.data) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Container parse_container(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16) throw ContainerError("container: truncated preamble");
  if (std::memcmp(bytes.data(), kContainerMagic, 4) != 0)
    throw ContainerError("container: bad magic bytes");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kContainerVersion)
    throw ContainerError("container: unsupported format version " + std::to_string(version));
  const auto header_len = get_le<std::uint64_t>(bytes, 8);
  if (header_len > bytes.size() - 16) throw ContainerError("container: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16,
                                   bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(std::string("container: malformed header: ") + e.what());
  }
  const std::size_t payload = 16 + header_len;
  const std::size_t payload_size = bytes.size() - payload;
  Container c;
  c.meta = header.value("meta", nlohmann::json::object());
  if (!header.contains("tensors") || !header["tensors"].is_array())
    throw ContainerError("container: header has no tensor list");
  for (const auto& entry : header["tensors"]) {
    Tensor t;
    std::uint64_t off = 0;
    try {
      t.name = entry.at("name").get<std::string>();
      if (entry.at("dtype").get<std::string>() != "f64")
        throw ContainerError("container: tensor '" + t.name + "' has unsupported dtype");
      t.shape = entry.at("shape").get<std::vector<std::size_t>>();
      off = entry.at("byte_offset").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw ContainerError(std::string("container: malformed tensor entry: ") + e.what());
    }
    const std::size_t n = t.numel();
    if (off % 8 != 0 || off > payload_size || 8 * n > payload_size - off)
      throw ContainerError("container: tensor '" + t.name +
                           "' declared shape exceeds the payload (file truncated or corrupt)");
    t.data.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      t.data[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, payload + off + 8 * i));
    c.tensors.push_back(std::move(t));
  }
  return c;
}

void add_matrix(Container& c, const std::string& name, const Matrix& m) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
  c.add(name, {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, std::move(v));
}

Matrix get_matrix(const Container& c, const std::string& name, std::optional<std::size_t> rows,
                  std::optional<std::size_t> cols) {
  const Tensor& t = c.get(name);
  if (t.shape.size() != 2 || (rows && t.shape[0] != *rows) || (cols && t.shape[1] != *cols))
    throw ContainerError("container: tensor '" + name + "' has an unexpected shape");
  const std::size_t nr = t.shape[0];
  const std::size_t nc = t.shape[1];
  Matrix m(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.data[i * nc + j];
  return m;
}

void add_points(Container& c, const std::string& name, const std::vector<std::array<double, 2>>& pts) {
  std::vector<double> v;
  v.reserve(2 * pts.size());
  for (const auto& p : pts) {
    v.push_back(p[0]);
    v.push_back(p[1]);
  }
  c.add(name, {pts.size(), 2}, std::move(v));
}

std::vector<std::array<double, 2>> get_points(const Container& c, const std::string& name) {
  const Tensor& t = c.get(name);
  if (t.shape.size() != 2 || t.shape[1] != 2)
    throw ContainerError("container: tensor '" + name + "' must have shape [count, 2]");
  std::vector<std::array<double, 2>> pts(t.shape[0]);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {t.data[2 * i], t.data[2 * i + 1]};
  return pts;
}

void write_container(const Container& c, const std::string& path) {
  const auto bytes = serialize_container(c);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ContainerError("container: cannot open '" + path + "' for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw ContainerError("container: write to '" + path + "' failed");
}

Container read_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContainerError("container: cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return parse_container(bytes);
}

}  // namespace hybrid
