#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace clsid {

/// Channel order used throughout: sagittal velocity, lateral velocity,
/// walking height, yaw rate.
enum class Channel { Vx = 0, Vy = 1, Z = 2, Wyaw = 3 };

inline constexpr int kNumChannels = 4;
inline constexpr std::array<Channel, 4> kAllChannels{Channel::Vx, Channel::Vy, Channel::Z,
                                                     Channel::Wyaw};

const char* channel_name(Channel c);  // "vx", "vy", "z", "wyaw"
Channel channel_from_string(const std::string& name);
inline int index(Channel c) { return static_cast<int>(c); }

/// Uniformly sampled input/output record. Row k of u and y is sample k at
/// time k*dt.
struct IoRecord {
  double dt = 0.0005;
  Eigen::MatrixXd u;  // N x m commands
  Eigen::MatrixXd y;  // N x p measurements
  std::vector<std::string> input_labels;
  std::vector<std::string> output_labels;

  Eigen::Index samples() const { return u.rows(); }
  void validate() const;

  std::vector<double> input(int channel) const;
  std::vector<double> output(int channel) const;

  /// Samples [first, first + count).
  IoRecord slice(Eigen::Index first, Eigen::Index count) const;

  /// Four-channel record with labels u_vx.. and y_vx..
  static IoRecord four_channel(double dt, Eigen::MatrixXd u, Eigen::MatrixXd y);
};

/// CSV with header `t,<input labels>,<output labels>`; t printed with six
/// decimals. The four-channel header is
/// `t,u_vx,u_vy,u_z,u_wyaw,y_vx,y_vy,y_z,y_wyaw`.
void write_csv(std::ostream& os, const IoRecord& rec);
std::string to_csv(const IoRecord& rec);
/// Columns prefixed u_ are inputs, y_ outputs; dt is inferred from t.
IoRecord read_csv(std::istream& is);

}  // namespace clsid
