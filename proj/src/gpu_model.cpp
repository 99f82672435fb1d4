#include "tilesync/gpu_model.hpp"

#include <numeric>
#include <sstream>

namespace tilesync {

Rational::Rational(Count num, Count den) {
  if (den == 0) throw DomainError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const Count g = std::gcd(num, den);
  num_ = g ? num / g : 0;
  den_ = g ? den / g : 1;
}

Count Rational::ceil() const {
  if (num_ >= 0) return (num_ + den_ - 1) / den_;
  return -((-num_) / den_);
}

std::string Rational::to_string(int decimals) const {
  Count scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const bool negative = num_ < 0;
  const Count mag = negative ? -num_ : num_;
  // round half-up on the magnitude
  const Count scaled = (mag * scale * 2 + den_) / (den_ * 2);
  std::ostringstream os;
  if (negative && scaled != 0) os << '-';
  os << scaled / scale;
  if (decimals > 0) {
    std::string frac = std::to_string(scaled % scale);
    os << '.' << std::string(decimals - frac.size(), '0') << frac;
  }
  return os.str();
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.num_, a.den_ * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw DomainError("rational division by zero");
  return Rational(a.num_ * b.den_, a.den_ * b.num_);
}

bool operator<(const Rational& a, const Rational& b) {
  return a.num_ * b.den_ < b.num_ * a.den_;
}

void validate(const Dim3& grid) {
  if (grid.x < 1 || grid.y < 1 || grid.z < 1)
    throw ConfigError("grid dimensions must be >= 1, got " + to_string(grid));
}

void validate(const GpuConfig& gpu) {
  if (gpu.num_sms < 1) throw ConfigError("num_sms must be >= 1");
}

bool contains(const Dim3& grid, const TileCoord& c) {
  return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < grid.x && c.y < grid.y && c.z < grid.z;
}

Count linearize(const Dim3& grid, const TileCoord& c) {
  if (!contains(grid, c))
    throw DomainError("tile " + to_string(c) + " outside grid " + to_string(grid));
  return c.x + grid.x * (c.y + grid.y * c.z);
}

TileCoord delinearize(const Dim3& grid, Count index) {
  if (index < 0 || index >= grid.total())
    throw DomainError("index " + std::to_string(index) + " outside grid " + to_string(grid));
  return {index % grid.x, (index / grid.x) % grid.y, index / (grid.x * grid.y)};
}

Count tbs_per_wave(const GpuConfig& gpu, Count occupancy) {
  return occupancy * gpu.num_sms;
}

WaveCount waves(Count tbs, const GpuConfig& gpu, Count occupancy) {
  const Rational frac(tbs, tbs_per_wave(gpu, occupancy));
  return {frac, frac.ceil()};
}

Rational utilization(Count tbs, const GpuConfig& gpu, Count occupancy) {
  const auto w = waves(tbs, gpu, occupancy);
  return Rational(tbs * 100, w.ceil * tbs_per_wave(gpu, occupancy));
}

std::string to_string(const Dim3& d) {
  return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" + std::to_string(d.z);
}

std::string to_string(const TileCoord& c) {
  return "{" + std::to_string(c.x) + "," + std::to_string(c.y) + "," + std::to_string(c.z) + "}";
}

}  // namespace tilesync
