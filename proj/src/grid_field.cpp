#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"

#include "flowsolve/fields.hpp"

namespace flowsolve {

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'L', 'O', 'W', 'G', 'R', 'I', 'D'};
constexpr std::size_t kHeaderStart = kMagic.size() + 4;

struct AxisPos {
  std::size_t index;  // lower node
  double frac;        // weight of the upper node
};

AxisPos locate(double q, double lo, double hi, std::size_t points, const char* axis) {
  if (!(q >= lo && q <= hi)) {
    throw InvalidArgument(std::string("grid field: ") + axis + "=" + std::to_string(q) +
                          " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  double pos = (q - lo) / (hi - lo) * static_cast<double>(points - 1);
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9) pos = nearest;
  std::size_t idx = static_cast<std::size_t>(std::floor(pos));
  if (idx >= points - 1) idx = points - 2;
  return {idx, pos - static_cast<double>(idx)};
}

void validate_spec(const GridSpec& s) {
  if (s.dim != 1 && s.dim != 2) throw InvalidArgument("grid dim must be 1 or 2");
  const auto d = static_cast<std::size_t>(s.dim);
  if (s.x_min.size() != d || s.x_max.size() != d || s.x_points.size() != d) {
    throw InvalidArgument("grid x ranges must have one entry per dimension");
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (!(s.x_max[i] > s.x_min[i]) || !std::isfinite(s.x_min[i]) ||
        !std::isfinite(s.x_max[i])) {
      throw InvalidArgument("grid x range " + std::to_string(i) + " is empty or not finite");
    }
    if (s.x_points[i] < 2) throw InvalidArgument("grid axes need at least two points");
  }
  if (!(s.t_max > s.t_min) || !std::isfinite(s.t_min) || !std::isfinite(s.t_max)) {
    throw InvalidArgument("grid t range is empty or not finite");
  }
  if (s.t_points < 2) throw InvalidArgument("grid t axis needs at least two points");
}

std::vector<double> number_or_list(const nlohmann::json& j, const char* key, int dim) {
  const auto& v = j.at(key);
  if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(dim), v.get<double>());
  auto out = v.get<std::vector<double>>();
  return out;
}

}  // namespace

std::size_t GridSpec::value_count() const {
  std::size_t n = t_points * static_cast<std::size_t>(dim);
  for (std::size_t p : x_points) n *= p;
  return n;
}

GridField::GridField(GridSpec spec, std::vector<float> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
  validate_spec(spec_);
  if (values_.size() != spec_.value_count()) {
    throw InvalidArgument("grid field: expected " + std::to_string(spec_.value_count()) +
                          " values, got " + std::to_string(values_.size()));
  }
}

Vector GridField::evaluate(const Vector& x, double t) const {
  const auto d = static_cast<std::size_t>(spec_.dim);
  if (static_cast<std::size_t>(x.size()) != d) {
    throw InvalidArgument("grid field: state dimension mismatch");
  }
  const AxisPos tp = locate(t, spec_.t_min, spec_.t_max, spec_.t_points, "t");
  std::array<AxisPos, 2> xp{};
  for (std::size_t i = 0; i < d; ++i) {
    xp[i] = locate(x(static_cast<Eigen::Index>(i)), spec_.x_min[i], spec_.x_max[i],
                   spec_.x_points[i], i == 0 ? "x0" : "x1");
  }
  const std::size_t nx0 = spec_.x_points[0];
  const std::size_t nx1 = d == 2 ? spec_.x_points[1] : 1;

  Vector out = Vector::Zero(static_cast<Eigen::Index>(d));
  const std::size_t corners = std::size_t{1} << (d + 1);
  for (std::size_t corner = 0; corner < corners; ++corner) {
    const std::size_t dt = corner & 1u;
    double w = dt ? tp.frac : 1.0 - tp.frac;
    std::size_t it = tp.index + dt;
    std::size_t i0 = xp[0].index;
    std::size_t i1 = 0;
    const std::size_t d0 = (corner >> 1) & 1u;
    w *= d0 ? xp[0].frac : 1.0 - xp[0].frac;
    i0 += d0;
    if (d == 2) {
      const std::size_t d1 = (corner >> 2) & 1u;
      w *= d1 ? xp[1].frac : 1.0 - xp[1].frac;
      i1 = xp[1].index + d1;
    }
    if (w == 0.0) continue;
    const std::size_t base = ((it * nx0 + i0) * nx1 + i1) * d;
    for (std::size_t c = 0; c < d; ++c) {
      out(static_cast<Eigen::Index>(c)) += w * static_cast<double>(values_[base + c]);
    }
  }
  return out;
}

GridField load_grid_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open grid file " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());

  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("missing FLOWGRID magic", 0);
  }
  if (bytes.size() < kHeaderStart) throw FormatError("truncated header length", kMagic.size());
  std::uint32_t header_len = 0;
  for (int i = 3; i >= 0; --i) {
    header_len = (header_len << 8) |
                 static_cast<unsigned char>(bytes[kMagic.size() + static_cast<std::size_t>(i)]);
  }
  if (bytes.size() < kHeaderStart + header_len) {
    throw FormatError("header length " + std::to_string(header_len) + " exceeds file size",
                      kMagic.size());
  }

  GridSpec spec;
  try {
    const auto j = nlohmann::json::parse(bytes.begin() + kHeaderStart,
                                         bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderStart + header_len));
    if (!j.is_object()) throw FormatError("header is not a JSON object", kHeaderStart);
    spec.dim = j.at("dim").get<int>();
    if (spec.dim != 1 && spec.dim != 2) throw FormatError("dim must be 1 or 2", kHeaderStart);
    spec.x_min = number_or_list(j, "x_min", spec.dim);
    spec.x_max = number_or_list(j, "x_max", spec.dim);
    const auto& xp = j.at("x_points");
    if (xp.is_number()) {
      spec.x_points.assign(static_cast<std::size_t>(spec.dim), xp.get<std::size_t>());
    } else {
      spec.x_points = xp.get<std::vector<std::size_t>>();
    }
    spec.t_min = j.at("t_min").get<double>();
    spec.t_max = j.at("t_max").get<double>();
    spec.t_points = j.at("t_points").get<std::size_t>();
    validate_spec(spec);
  } catch (const FormatError&) {
    throw;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed header: ") + e.what(), kHeaderStart + e.byte - 1);
  } catch (const std::exception& e) {
    throw FormatError(std::string("invalid header: ") + e.what(), kHeaderStart);
  }

  const std::size_t payload_start = kHeaderStart + header_len;
  const std::size_t payload_bytes = bytes.size() - payload_start;
  const std::size_t expected = spec.value_count();
  if (payload_bytes != expected * sizeof(float)) {
    throw FormatError("payload has " + std::to_string(payload_bytes) + " bytes, expected " +
                          std::to_string(expected * sizeof(float)),
                      payload_start);
  }
  std::vector<float> values(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    const std::size_t off = payload_start + i * 4;
    std::uint32_t bits = 0;
    for (int b = 3; b >= 0; --b) {
      bits = (bits << 8) | static_cast<unsigned char>(bytes[off + static_cast<std::size_t>(b)]);
    }
    float f;
    std::memcpy(&f, &bits, sizeof f);
    if (!std::isfinite(f)) throw FormatError("non-finite payload value", off);
    values[i] = f;
  }
  return GridField(std::move(spec), std::move(values));
}

void save_grid_field(const std::filesystem::path& path, const GridSpec& spec,
                     const std::vector<float>& values) {
  validate_spec(spec);
  if (values.size() != spec.value_count()) {
    throw InvalidArgument("save_grid_field: value count does not match spec");
  }
  nlohmann::json header = {{"dim", spec.dim},         {"x_min", spec.x_min},
                           {"x_max", spec.x_max},     {"x_points", spec.x_points},
                           {"t_min", spec.t_min},     {"t_max", spec.t_max},
                           {"t_points", spec.t_points}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write grid file " + path.string());
  out.write(kMagic.data(), kMagic.size());
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int b = 0; b < 4; ++b) out.put(static_cast<char>((len >> (8 * b)) & 0xffu));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    for (int b = 0; b < 4; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xffu));
  }
  if (!out) throw InvalidArgument("failed writing grid file " + path.string());
}

}  // namespace flowsolve
