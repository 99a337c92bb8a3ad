#include "clsid/signals/io_record.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "clsid/error.hpp"

namespace clsid {

namespace {

constexpr std::array<const char*, 4> kNames{"vx", "vy", "z", "wyaw"};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

}  // namespace

const char* channel_name(Channel c) { return kNames[index(c)]; }

Channel channel_from_string(const std::string& name) {
  for (int i = 0; i < kNumChannels; ++i) {
    if (name == kNames[i]) return static_cast<Channel>(i);
  }
  throw ValidationError("channel: unknown channel '" + name + "' (vx|vy|z|wyaw)");
}

void IoRecord::validate() const {
  require(dt > 0.0 && std::isfinite(dt), "dt", "must be > 0");
  require(u.rows() == y.rows(), "y", "u and y must have equal sample counts");
  require(static_cast<Eigen::Index>(input_labels.size()) == u.cols(), "input_labels",
          "one label per input column");
  require(static_cast<Eigen::Index>(output_labels.size()) == y.cols(), "output_labels",
          "one label per output column");
  std::set<std::string> seen;
  for (const auto& l : input_labels) require(seen.insert(l).second, "labels", "duplicate " + l);
  for (const auto& l : output_labels) require(seen.insert(l).second, "labels", "duplicate " + l);
}

std::vector<double> IoRecord::input(int channel) const {
  require(channel >= 0 && channel < u.cols(), "channel", "input channel out of range");
  std::vector<double> out(u.rows());
  Eigen::Map<Eigen::VectorXd>(out.data(), u.rows()) = u.col(channel);
  return out;
}

std::vector<double> IoRecord::output(int channel) const {
  require(channel >= 0 && channel < y.cols(), "channel", "output channel out of range");
  std::vector<double> out(y.rows());
  Eigen::Map<Eigen::VectorXd>(out.data(), y.rows()) = y.col(channel);
  return out;
}

IoRecord IoRecord::slice(Eigen::Index first, Eigen::Index count) const {
  require(first >= 0 && count >= 0 && first + count <= samples(), "slice", "out of range");
  IoRecord out = *this;
  out.u = u.middleRows(first, count);
  out.y = y.middleRows(first, count);
  return out;
}

IoRecord IoRecord::four_channel(double dt, Eigen::MatrixXd u, Eigen::MatrixXd y) {
  IoRecord rec;
  rec.dt = dt;
  rec.u = std::move(u);
  rec.y = std::move(y);
  for (const char* n : kNames) {
    rec.input_labels.push_back(std::string("u_") + n);
    rec.output_labels.push_back(std::string("y_") + n);
  }
  rec.validate();
  return rec;
}

void write_csv(std::ostream& os, const IoRecord& rec) {
  rec.validate();
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "t");
  for (const auto& l : rec.input_labels) fmt::format_to(std::back_inserter(buf), ",{}", l);
  for (const auto& l : rec.output_labels) fmt::format_to(std::back_inserter(buf), ",{}", l);
  buf.push_back('\n');
  for (Eigen::Index k = 0; k < rec.samples(); ++k) {
    fmt::format_to(std::back_inserter(buf), "{:.6f}", static_cast<double>(k) * rec.dt);
    for (Eigen::Index j = 0; j < rec.u.cols(); ++j) {
      fmt::format_to(std::back_inserter(buf), ",{:.10g}", rec.u(k, j));
    }
    for (Eigen::Index j = 0; j < rec.y.cols(); ++j) {
      fmt::format_to(std::back_inserter(buf), ",{:.10g}", rec.y(k, j));
    }
    buf.push_back('\n');
    if (buf.size() > (1 << 20)) {
      os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::string to_csv(const IoRecord& rec) {
  std::ostringstream os;
  write_csv(os, rec);
  return os.str();
}

IoRecord read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("csv: empty input");
  const auto header = split(line);
  require(!header.empty() && header[0] == "t", "csv", "first column must be 't'");
  std::vector<int> in_cols, out_cols;
  IoRecord rec;
  for (int i = 1; i < static_cast<int>(header.size()); ++i) {
    const auto& h = header[i];
    if (h.rfind("u_", 0) == 0) {
      in_cols.push_back(i);
      rec.input_labels.push_back(h);
    } else if (h.rfind("y_", 0) == 0) {
      out_cols.push_back(i);
      rec.output_labels.push_back(h);
    } else {
      throw ValidationError("csv: column '" + h + "' is neither u_* nor y_*");
    }
  }
  std::vector<double> t;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    require(cells.size() == header.size(), "csv",
            "line " + std::to_string(lineno) + " has wrong column count");
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      row[i] = std::strtod(cells[i].c_str(), &end);
      require(end != cells[i].c_str(), "csv",
              "line " + std::to_string(lineno) + " has a non-numeric cell");
    }
    t.push_back(row[0]);
    rows.push_back(std::move(row));
  }
  require(rows.size() >= 2, "csv", "needs at least two samples");
  rec.dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  const auto N = static_cast<Eigen::Index>(rows.size());
  rec.u.resize(N, static_cast<Eigen::Index>(in_cols.size()));
  rec.y.resize(N, static_cast<Eigen::Index>(out_cols.size()));
  for (Eigen::Index k = 0; k < N; ++k) {
    for (std::size_t j = 0; j < in_cols.size(); ++j) rec.u(k, j) = rows[k][in_cols[j]];
    for (std::size_t j = 0; j < out_cols.size(); ++j) rec.y(k, j) = rows[k][out_cols[j]];
  }
  rec.validate();
  return rec;
}

}  // namespace clsid
