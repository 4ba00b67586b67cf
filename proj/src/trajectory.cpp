#include "fegut/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fegut/errors.hpp"

namespace fegut::traj {
namespace {

// Planar curve value and first two parametric derivatives, local frame
// centered on the curve center.
struct CurvePoint {
  Eigen::Vector2d c, dc, ddc;
};

// Bernoulli lemniscate x = A cos(th)/(1+sin^2 th), y = A sin(th)cos(th)/(1+sin^2 th).
// The numerators of the derivative quotients collapse to short closed forms.
CurvePoint lemniscate_point(double th, double half_span) {
  const double s = std::sin(th), c = std::cos(th);
  const double s2 = std::sin(2.0 * th), c2 = std::cos(2.0 * th);
  const double d = 1.0 + s * s;
  const double dp = s2;

  const double u = -s * d - c * s2;
  const double up = -3.0 * c * c * c;
  const double w = c2 * d - 0.5 * s2 * s2;
  const double wp = -3.0 * s2;

  CurvePoint p;
  p.c = {half_span * c / d, half_span * s * c / d};
  p.dc = {half_span * u / (d * d), half_span * w / (d * d)};
  p.ddc = {half_span * (up * d - 2.0 * u * dp) / (d * d * d),
           half_span * (wp * d - 2.0 * w * dp) / (d * d * d)};
  return p;
}

CurvePoint circle_point(double th, double radius) {
  const double s = std::sin(th), c = std::cos(th);
  return {{radius * c, radius * s}, {-radius * s, radius * c}, {-radius * c, -radius * s}};
}

CurvePoint curve_point(const TrajectorySpec& spec, double th) {
  return spec.shape == Shape::Lemniscate
             ? lemniscate_point(th, 0.5 * spec.horizontal_extent_m)
             : circle_point(th, spec.circle_radius_m);
}

void validate(const TrajectorySpec& spec) {
  if (spec.duration_s <= 0.0) throw ConfigError("trajectory duration must be positive");
  if (spec.average_speed_mps <= 0.0) throw ConfigError("average speed must be positive");
  if (spec.table_rate_hz < 100.0) throw ConfigError("truth table rate must be at least 100 Hz");
  if (spec.horizontal_extent_m <= 0.0 || spec.circle_radius_m <= 0.0)
    throw ConfigError("trajectory extent must be positive");
  if (std::abs(spec.origin.lat_deg) > 90.0 || std::abs(spec.origin.lon_deg) > 180.0)
    throw ConfigError("trajectory origin is not a valid geodetic coordinate");
}

double curve_circumference(const TrajectorySpec& spec) {
  // Simpson over one parametric period.
  const int n = 200000;  // even
  const double h = 2.0 * M_PI / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += wgt * curve_point(spec, i * h).dc.norm();
  }
  return sum * h / 3.0;
}

}  // namespace

TruthTable::TruthTable(double t0, double dt, std::vector<Eigen::Vector3d> r,
                       std::vector<Eigen::Vector3d> v, std::vector<Eigen::Vector3d> a)
    : t0_(t0), dt_(dt), r_(std::move(r)), v_(std::move(v)), a_(std::move(a)) {
  if (r_.size() < 2 || r_.size() != v_.size() || r_.size() != a_.size())
    throw std::invalid_argument("TruthTable: inconsistent column sizes");
  if (dt_ <= 0.0) throw std::invalid_argument("TruthTable: nonpositive step");
}

MotionSample TruthTable::sample(double t) const {
  const double eps = 1e-9 * dt_;
  if (t < t0_ - eps || t > t_end() + eps)
    throw std::out_of_range("TruthTable::sample: t outside table span");

  double fi = (t - t0_) / dt_;
  auto i = static_cast<std::size_t>(std::max(0.0, std::floor(fi)));
  if (i >= size() - 1) i = size() - 2;
  const double s = (t - (t0_ + dt_ * static_cast<double>(i))) / dt_;

  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double g00 = (6 * s2 - 6 * s) / dt_, g10 = 3 * s2 - 4 * s + 1;
  const double g01 = (-6 * s2 + 6 * s) / dt_, g11 = 3 * s2 - 2 * s;

  MotionSample out;
  out.t = t;
  out.r = h00 * r_[i] + h10 * dt_ * v_[i] + h01 * r_[i + 1] + h11 * dt_ * v_[i + 1];
  out.v = h00 * v_[i] + h10 * dt_ * a_[i] + h01 * v_[i + 1] + h11 * dt_ * a_[i + 1];
  out.a = g00 * v_[i] + g10 * a_[i] + g01 * v_[i + 1] + g11 * a_[i + 1];
  return out;
}

void TruthTable::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fputs("t,rx,ry,rz,vx,vy,vz,ax,ay,az\n", f);
  for (std::size_t i = 0; i < size(); ++i) {
    const MotionSample m = at(i);
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.t, m.r.x(),
                 m.r.y(), m.r.z(), m.v.x(), m.v.y(), m.v.z(), m.a.x(), m.a.y(), m.a.z());
  }
  std::fclose(f);
}

TruthTable TruthTable::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  int lineno = 0;
  std::vector<double> t;
  std::vector<Eigen::Vector3d> r, v, a;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) continue;  // header
    if (line.empty()) continue;
    double c[10];
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &c[0], &c[1], &c[2],
                    &c[3], &c[4], &c[5], &c[6], &c[7], &c[8], &c[9]) != 10)
      throw ParseError("truth csv: expected 10 columns", lineno);
    t.push_back(c[0]);
    r.emplace_back(c[1], c[2], c[3]);
    v.emplace_back(c[4], c[5], c[6]);
    a.emplace_back(c[7], c[8], c[9]);
  }
  if (t.size() < 2) throw ParseError("truth csv: too few rows", lineno);
  return {t.front(), t[1] - t[0], std::move(r), std::move(v), std::move(a)};
}

Eigen::Vector3d trajectory_center_enu(const TrajectorySpec& spec) {
  const double offset = spec.shape == Shape::Lemniscate ? 0.5 * spec.horizontal_extent_m
                                                        : spec.circle_radius_m;
  return {offset, 0.0, 0.0};
}

TruthTable build_truth_table(const TrajectorySpec& spec) {
  validate(spec);

  const double dt = 1.0 / spec.table_rate_hz;
  const auto n_pad = static_cast<long>(std::lround(spec.pad_before_s * spec.table_rate_hz));
  const auto n_fwd = static_cast<long>(std::lround(spec.duration_s * spec.table_rate_hz));
  const long n_total = n_pad + n_fwd + 1;

  // Constant-speed traversal: integrate dth/dt = speed / |c'(th)| with RK4,
  // anchored so that th(t=0) is the western point (th = pi) exactly.
  const auto rate = [&](double th) { return spec.average_speed_mps / curve_point(spec, th).dc.norm(); };
  const auto rk4_step = [&](double th, double h) {
    const double k1 = rate(th);
    const double k2 = rate(th + 0.5 * h * k1);
    const double k3 = rate(th + 0.5 * h * k2);
    const double k4 = rate(th + h * k3);
    return th + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  std::vector<double> theta(static_cast<std::size_t>(n_total));
  theta[static_cast<std::size_t>(n_pad)] = M_PI;
  for (long i = n_pad + 1; i < n_total; ++i)
    theta[static_cast<std::size_t>(i)] = rk4_step(theta[static_cast<std::size_t>(i - 1)], dt);
  for (long i = n_pad - 1; i >= 0; --i)
    theta[static_cast<std::size_t>(i)] = rk4_step(theta[static_cast<std::size_t>(i + 1)], -dt);

  const geo::EnuFrame frame(spec.origin);
  const Eigen::Vector3d center = trajectory_center_enu(spec);
  const double speed = spec.average_speed_mps;

  std::vector<Eigen::Vector3d> r(theta.size()), v(theta.size()), a(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const CurvePoint p = curve_point(spec, theta[i]);
    const double norm_dc = p.dc.norm();
    const Eigen::Vector2d tangent = p.dc / norm_dc;
    // a = (speed^2/|c'|^2) * (c'' - T (T.c''))  -- purely centripetal at constant speed
    const Eigen::Vector2d acc =
        (speed * speed / (norm_dc * norm_dc)) * (p.ddc - tangent * tangent.dot(p.ddc));

    const Eigen::Vector3d r_enu = center + Eigen::Vector3d(p.c.x(), p.c.y(), 0.0);
    const Eigen::Vector3d v_enu(speed * tangent.x(), speed * tangent.y(), 0.0);
    const Eigen::Vector3d a_enu(acc.x(), acc.y(), 0.0);

    r[i] = frame.from_enu(r_enu);
    v[i] = frame.rotate_from_enu(v_enu);
    a[i] = frame.rotate_from_enu(a_enu);
  }

  TruthTable table(-static_cast<double>(n_pad) * dt, dt, std::move(r), std::move(v), std::move(a));
  table.lap_duration_s = curve_circumference(spec) / speed;
  return table;
}

}  // namespace fegut::traj
