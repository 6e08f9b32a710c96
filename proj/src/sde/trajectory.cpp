#include "nlc/sde/trajectory.hpp"

#include <algorithm>
#include <ostream>

#include "nlc/errors.hpp"
#include "nlc/io/csv.hpp"

namespace nlc {

std::vector<double> Trajectory::column(std::size_t c) const {
  if (c >= channels()) throw ConfigError("Trajectory: channel index out of range");
  std::vector<double> out(rows());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(k, c);
  return out;
}

std::vector<double> Trajectory::column(const std::string& label) const {
  const auto it = std::find(channel_labels.begin(), channel_labels.end(), label);
  if (it == channel_labels.end()) throw ConfigError("Trajectory: no channel '" + label + "'");
  return column(static_cast<std::size_t>(it - channel_labels.begin()));
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  std::vector<std::string> header{"t"};
  header.insert(header.end(), traj.channel_labels.begin(), traj.channel_labels.end());
  io::CsvWriter out(os, header);
  std::vector<double> row(traj.channels() + 1);
  for (std::size_t k = 0; k < traj.rows(); ++k) {
    row[0] = static_cast<double>(k) * traj.dt;
    const auto r = traj.row(k);
    std::copy(r.begin(), r.end(), row.begin() + 1);
    out.row(row);
  }
}

}  // namespace nlc
