#include "umfloc/grid.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "umfloc/csv.hpp"
#include "umfloc/error.hpp"

namespace umfloc {

std::size_t ObservationGrid::observed() const {
  return static_cast<std::size_t>((W.array() > 0.5).count());
}

Eigen::VectorXd cell_centers(int size, double width) {
  Eigen::VectorXd c(size);
  const double h = width / size;
  for (int i = 0; i < size; ++i) c(i) = -width / 2.0 + (i + 0.5) * h;
  return c;
}

ObservationGrid build_grid(const MeasurementSet& ms, int size, double width, double theta) {
  require(size >= 2, ErrorKind::Config, "grid: N must be at least 2");
  require(width > 0.0, ErrorKind::Config, "grid: width must be positive");
  require(ms.locations.size() == ms.energies.size(), ErrorKind::Dimension,
          "grid: measurement locations and energies differ in length");

  ObservationGrid g;
  g.size = size;
  g.width = width;
  g.theta = theta;
  g.cX = cell_centers(size, width);
  g.cY = g.cX;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(size, size);
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(size, size);

  const double reduced = std::fmod(theta, 2.0 * kPi);
  const double h = width / size;
  const double half = width / 2.0;
  for (std::size_t m = 0; m < ms.size(); ++m) {
    const Vec2 local = rotate(ms.locations[m], -reduced);
    if (std::abs(local.x()) > half || std::abs(local.y()) > half) {
      ++g.dropped;
      continue;
    }
    const int j = std::min(size - 1, static_cast<int>(std::floor((local.x() + half) / h)));
    const int i = std::min(size - 1, static_cast<int>(std::floor((local.y() + half) / h)));
    sum(i, j) += ms.energies[m];
    count(i, j) += 1.0;
  }

  g.W = (count.array() > 0.0).cast<double>();
  g.H = Eigen::MatrixXd::Zero(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      if (count(i, j) > 0.0) g.H(i, j) = h * sum(i, j) / count(i, j);
  return g;
}

ObservationGrid full_grid(const Eigen::MatrixXd& H, double width, double theta) {
  require(H.rows() == H.cols() && H.rows() >= 2, ErrorKind::Dimension, "grid: matrix must be square, N >= 2");
  ObservationGrid g;
  g.size = static_cast<int>(H.rows());
  g.width = width;
  g.theta = theta;
  g.H = H;
  g.W = Eigen::MatrixXd::Ones(H.rows(), H.cols());
  g.cX = cell_centers(g.size, width);
  g.cY = g.cX;
  return g;
}

const char* to_string(GridPolicy policy) noexcept {
  switch (policy) {
    case GridPolicy::Conservative: return "conservative";
    case GridPolicy::Aggressive: return "aggressive";
    case GridPolicy::HalfFill: return "half-fill";
  }
  return "unknown";
}

int choose_grid_size(std::size_t count, GridPolicy policy, LogBase base) {
  require(count >= 4, ErrorKind::Config, "grid: need M >= 4 to size the grid");
  const auto m = static_cast<double>(count);
  switch (policy) {
    case GridPolicy::Conservative: {
      auto n = static_cast<int>(std::sqrt(m));
      while (static_cast<std::size_t>(n + 1) * (n + 1) <= count) ++n;
      while (static_cast<std::size_t>(n) * n > count) --n;
      return n;
    }
    case GridPolicy::Aggressive: {
      auto cost = [&](int n) {
        const double l = base == LogBase::Natural ? std::log(n) : std::log10(n);
        return 1.5 * n * l * l;
      };
      int n = 2;
      while (cost(n + 1) <= m) ++n;
      return n;
    }
    case GridPolicy::HalfFill: {
      int n = 2;
      while (static_cast<double>(n + 1) * (n + 1) / 2.0 <= m) ++n;
      return n;
    }
  }
  return 2;
}

SignatureMatrixExact exact_signature_matrix(const SourceConfig& sources, const FieldModel& model, int size,
                                            double width, double theta) {
  require(size >= 2, ErrorKind::Config, "grid: N must be at least 2");
  const Eigen::VectorXd c = cell_centers(size, width);
  const double h = width / size;
  SignatureMatrixExact out;
  out.aggregate = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t k = 0; k < sources.count(); ++k) {
    Eigen::MatrixXd Hk(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) {
        const Vec2 world = rotate(Vec2(c(j), c(i)), theta);
        Hk(i, j) = h * sources.powers[k] * model.energy_at(world - sources.positions[k]);
      }
    out.aggregate += Hk;
    out.per_source.push_back(std::move(Hk));
  }
  return out;
}

void write_grid(const ObservationGrid& grid, const std::string& path, std::uint64_t seed) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "grid: cannot open " + path);
  out << std::setprecision(17);
  for (int i = 0; i < grid.size; ++i) {
    for (int j = 0; j < grid.size; ++j) {
      if (j) out << ',';
      out << (grid.W(i, j) > 0.5 ? grid.H(i, j) : -1.0);
    }
    out << '\n';
  }
  nlohmann::json meta{{"N", grid.size}, {"L", grid.width}, {"theta", grid.theta},
                      {"seed", seed}, {"dropped", grid.dropped}};
  std::ofstream side(path + ".meta.json");
  require(side.good(), ErrorKind::Io, "grid: cannot open " + path + ".meta.json");
  side << meta.dump(2) << '\n';
}

ObservationGrid read_grid(const std::string& path, std::uint64_t* seed) {
  std::ifstream side(path + ".meta.json");
  require(side.good(), ErrorKind::Io, "grid: missing sidecar " + path + ".meta.json");
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const std::exception& e) {
    fail(ErrorKind::Io, std::string("grid: bad sidecar: ") + e.what());
  }
  const int n = meta.at("N").get<int>();
  const auto rows = read_numeric_csv(path, false);
  require(static_cast<int>(rows.size()) == n, ErrorKind::Io, "grid: row count does not match N");
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n), W = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    require(static_cast<int>(rows[i].size()) == n, ErrorKind::Io, "grid: column count does not match N");
    for (int j = 0; j < n; ++j)
      if (rows[i][j] >= 0.0) {
        H(i, j) = rows[i][j];
        W(i, j) = 1.0;
      }
  }
  ObservationGrid g = full_grid(H, meta.at("L").get<double>(), meta.at("theta").get<double>());
  g.W = W;
  g.dropped = meta.value("dropped", std::size_t{0});
  if (seed) *seed = meta.value("seed", std::uint64_t{0});
  return g;
}

}  // namespace umfloc
