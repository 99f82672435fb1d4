#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tilesync {

// Errors raised by the library. ConfigError covers invalid scenario or
// policy parameters; DomainError covers out-of-range arguments.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

using Count = std::int64_t;

// Exact non-negative rational, always stored in lowest terms with den > 0.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(Count num, Count den = 1);

  Count num() const { return num_; }
  Count den() const { return den_; }

  Count ceil() const;
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  // Decimal rendering rounded half-up to `decimals` places.
  std::string to_string(int decimals = 2) const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational& operator+=(const Rational& o) { return *this = *this + o; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }

 private:
  Count num_ = 0;
  Count den_ = 1;
};

struct Dim3 {
  Count x = 1;
  Count y = 1;
  Count z = 1;

  Count total() const { return x * y * z; }
  friend bool operator==(const Dim3&, const Dim3&) = default;
};

// x: row, y: column, z: split-k slice.
struct TileCoord {
  Count x = 0;
  Count y = 0;
  Count z = 0;

  friend bool operator==(const TileCoord&, const TileCoord&) = default;
  friend auto operator<=>(const TileCoord&, const TileCoord&) = default;
};

struct GpuConfig {
  Count num_sms = 1;
};

struct WaveCount {
  Rational fractional;
  Count ceil = 0;
};

void validate(const Dim3& grid);
void validate(const GpuConfig& gpu);
bool contains(const Dim3& grid, const TileCoord& c);

// Row-major thread block index: x fastest, then y, then z.
Count linearize(const Dim3& grid, const TileCoord& c);
TileCoord delinearize(const Dim3& grid, Count index);

Count tbs_per_wave(const GpuConfig& gpu, Count occupancy);
WaveCount waves(Count tbs, const GpuConfig& gpu, Count occupancy);

// Share of the slots used across all waves the grid occupies, in percent:
// tbs / (ceil_waves * tbs_per_wave) * 100.
Rational utilization(Count tbs, const GpuConfig& gpu, Count occupancy);

std::string to_string(const Dim3& d);
std::string to_string(const TileCoord& c);

}  // namespace tilesync
