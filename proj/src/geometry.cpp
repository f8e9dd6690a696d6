#include "rotcert/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "rotcert/error.hpp"

namespace rotcert {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Generating rotations of one scene are kept at least this far apart.
constexpr double kMinSeparationDeg = 30.0;

Vec3 gaussian3(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> nd(0.0, sigma);
  return Vec3(nd(rng), nd(rng), nd(rng));
}

UnitQuaternion separated_rotation(std::mt19937_64& rng,
                                  const std::vector<UnitQuaternion>& taken) {
  for (;;) {
    UnitQuaternion q = random_quaternion(rng);
    bool ok = true;
    for (const auto& t : taken)
      if (geodesic_error_deg(q, t) < kMinSeparationDeg) ok = false;
    if (ok) return q;
  }
}

}  // namespace

UnitQuaternion::UnitQuaternion(const Vec4& q) : q_(q) {
  if (!q.allFinite() || std::abs(q.squaredNorm() - 1.0) > 1e-10)
    throw Error(ErrorCode::Validation, "quaternion is not unit norm");
}

UnitQuaternion UnitQuaternion::normalized(const Vec4& v) {
  double nrm = v.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm))
    throw Error(ErrorCode::Validation, "cannot normalize a zero quaternion");
  return UnitQuaternion(v / nrm, Unchecked{});
}

UnitQuaternion UnitQuaternion::negated() const {
  return UnitQuaternion(-q_, Unchecked{});
}

UnitQuaternion UnitQuaternion::canonical() const {
  if (q_[3] > 0.0) return *this;
  if (q_[3] < 0.0) return negated();
  for (int i = 0; i < 3; ++i) {
    if (q_[i] > 0.0) break;
    if (q_[i] < 0.0) {
      Vec4 v = -q_;
      v[3] = 0.0;  // avoid a signed zero in the scalar slot
      return UnitQuaternion(v, Unchecked{});
    }
  }
  return *this;
}

std::vector<int> RotationSearchInstance::truth_inliers() const {
  std::vector<int> out;
  for (int i = 0; i < n(); ++i) {
    const auto& m = measurements[i];
    if (m.is_inlier_truth.value_or(false)) out.push_back(i);
  }
  return out;
}

Eigen::Matrix<double, 9, 9> TripletMeasurement::stacked_transpose() const {
  Eigen::Matrix<double, 9, 9> A;
  Measurement m;
  m.a = a1;
  A.block<3, 9>(0, 0) = wahba_matrix(m);
  m.a = a2;
  A.block<3, 9>(3, 0) = wahba_matrix(m);
  m.a = a3;
  A.block<3, 9>(6, 0) = wahba_matrix(m);
  return A;
}

OutlierMode OutlierMode::consistent() {
  OutlierMode m;
  m.kind = Kind::Consistent;
  return m;
}

OutlierMode OutlierMode::multi(int k) {
  if (k < 1) throw Error(ErrorCode::Config, "multi mode needs at least one rotation");
  OutlierMode m;
  m.kind = Kind::Multi;
  m.rotations.assign(k, std::nullopt);
  m.fractions.assign(k, 1.0 / k);
  return m;
}

Rotation3 quat_to_rotation(const UnitQuaternion& uq) {
  const Vec4& q = uq.coeffs();
  const double q1 = q[0], q2 = q[1], q3 = q[2], q4 = q[3];
  Rotation3 r;
  r.R << 2 * (q1 * q1 + q4 * q4) - 1, 2 * (q1 * q2 - q3 * q4), 2 * (q1 * q3 + q2 * q4),
      2 * (q1 * q2 + q3 * q4), 2 * (q2 * q2 + q4 * q4) - 1, 2 * (q2 * q3 - q1 * q4),
      2 * (q1 * q3 - q2 * q4), 2 * (q2 * q3 + q1 * q4), 2 * (q3 * q3 + q4 * q4) - 1;
  return r;
}

UnitQuaternion rotation_to_quat(const Mat3& R) {
  // The rotation is linear in q q^T, so recover q q^T by least squares
  // through P and take its leading eigenvector.
  const Mat9x16& P = p_matrix();
  Eigen::Matrix<double, 9, 1> v = vec_rotation(R);
  // Symmetric 4x4 Q with tr(Q)=1 and P vec(Q) = vec(R); P P^T = 4 I.
  Eigen::Matrix<double, 16, 1> w = P.transpose() * v / 4.0;
  Mat4 Q = Eigen::Map<Mat4>(w.data());
  Q = 0.5 * (Q + Q.transpose()).eval();
  Q.diagonal().array() += (1.0 - Q.trace()) / 4.0;
  Eigen::SelfAdjointEigenSolver<Mat4> es(Q);
  return UnitQuaternion::normalized(es.eigenvectors().col(3)).canonical();
}

const Mat9x16& p_matrix() {
  static const Mat9x16 P = [] {
    Mat9x16 m;
    m << 1, 0, 0, 0, 0, -1, 0, 0, 0, 0, -1, 0, 0, 0, 0, 1,
        0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0,
        0, 0, 1, 0, 0, 0, 0, -1, 1, 0, 0, 0, 0, -1, 0, 0,
        0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, -1, 0,
        -1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1, 0, 0, 0, 0, 1,
        0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0,
        0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0,
        0, 0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0,
        -1, 0, 0, 0, 0, -1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
    return m;
  }();
  return P;
}

Eigen::Matrix<double, 16, 1> vec_outer(const Vec4& q) {
  Mat4 Q = q * q.transpose();
  return Eigen::Map<const Eigen::Matrix<double, 16, 1>>(Q.data());
}

Eigen::Matrix<double, 9, 1> vec_rotation(const Mat3& R) {
  return Eigen::Map<const Eigen::Matrix<double, 9, 1>>(R.data());
}

Mat4 cost_matrix(const Measurement& m) {
  Eigen::Matrix<double, 9, 1> ab;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) ab[3 * i + j] = m.a[i] * m.b[j];
  Eigen::Matrix<double, 16, 1> v = p_matrix().transpose() * ab;
  return Eigen::Map<Mat4>(v.data());
}

Mat39 wahba_matrix(const Measurement& m) {
  Mat39 A = Mat39::Zero();
  for (int k = 0; k < 3; ++k) A.block<3, 3>(0, 3 * k) = m.a[k] * Mat3::Identity();
  return A;
}

UnitQuaternion closed_form_wahba(const std::vector<Measurement>& ms,
                                 const std::vector<double>& weights) {
  if (weights.size() != ms.size())
    throw Error(ErrorCode::Dimension, "weights and measurements differ in length");
  Mat4 B = Mat4::Zero();
  Mat3 scatter = Mat3::Zero();
  int support = 0;
  for (size_t i = 0; i < ms.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    ++support;
    Mat4 M = cost_matrix(ms[i]);
    B += weights[i] * 0.5 * (M + M.transpose());
    scatter += weights[i] * ms[i].a * ms[i].a.transpose();
  }
  if (support < 2)
    throw Error(ErrorCode::DegenerateSet, "fewer than two weighted measurements");
  Eigen::SelfAdjointEigenSolver<Mat3> sc(scatter);
  if (sc.eigenvalues()[1] <= 1e-10 * std::max(1.0, sc.eigenvalues()[2]))
    throw Error(ErrorCode::DegenerateSet, "measurement directions are collinear");
  Eigen::SelfAdjointEigenSolver<Mat4> es(B);
  return UnitQuaternion::normalized(es.eigenvectors().col(3)).canonical();
}

UnitQuaternion closed_form_wahba(const std::vector<Measurement>& ms) {
  return closed_form_wahba(ms, std::vector<double>(ms.size(), 1.0));
}

double geodesic_error_deg(const UnitQuaternion& q1, const UnitQuaternion& q2) {
  const Vec4& a = q1.coeffs();
  Vec4 b = q2.coeffs();
  if (a.dot(b) < 0) b = -b;
  // Stable half-angle form; equals the angle of R1^T R2.
  double theta = 4.0 * std::atan2((a - b).norm(), (a + b).norm());
  return std::clamp(theta * 180.0 / kPi, 0.0, 180.0);
}

double vec_rotation_error(const UnitQuaternion& q1, const UnitQuaternion& q2) {
  return (quat_to_rotation(q1).R - quat_to_rotation(q2).R).norm();
}

double squared_residual(const Measurement& m, const UnitQuaternion& q) {
  return (m.b - quat_to_rotation(q).R * m.a).squaredNorm();
}

UnitQuaternion random_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  for (;;) {
    Vec4 v(nd(rng), nd(rng), nd(rng), nd(rng));
    if (v.norm() > 1e-6) return UnitQuaternion::normalized(v).canonical();
  }
}

Vec3 random_unit_vector(std::mt19937_64& rng) {
  for (;;) {
    Vec3 v = gaussian3(rng, 1.0);
    if (v.norm() > 1e-6) return v.normalized();
  }
}

std::vector<int> apportion(int n, const std::vector<double>& fractions) {
  std::vector<int> counts(fractions.size(), 0);
  std::vector<std::pair<double, int>> rem;
  int used = 0;
  for (size_t k = 0; k < fractions.size(); ++k) {
    double exact = fractions[k] * n;
    counts[k] = static_cast<int>(std::floor(exact + 1e-12));
    used += counts[k];
    rem.emplace_back(exact - counts[k], static_cast<int>(k));
  }
  // Larger remainder first; earlier entry wins a tie.
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (size_t k = 0; used < n && k < rem.size(); ++k, ++used) ++counts[rem[k].second];
  return counts;
}

RotationSearchInstance generate_instance(int n, double beta, const OutlierMode& mode,
                                         std::uint64_t seed, double noise_sigma_sq,
                                         double c_bar_sq) {
  if (n < 3) throw Error(ErrorCode::Validation, "n must be at least 3");
  if (!(beta >= 0.0 && beta < 1.0))
    throw Error(ErrorCode::Validation, "beta must lie in [0, 1)");
  if (!(c_bar_sq > 0.0)) throw Error(ErrorCode::Validation, "c_bar_sq must be positive");
  if (noise_sigma_sq < 0.0)
    throw Error(ErrorCode::Validation, "noise variance must be nonnegative");

  std::mt19937_64 rng(seed);
  const double sigma = std::sqrt(noise_sigma_sq);

  // Class sizes: entry 0 is the ground truth, then one per extra rotation,
  // with a trailing entry for random outliers in random mode.
  std::vector<int> counts;
  int extra_rotations = 0;
  std::vector<std::optional<UnitQuaternion>> fixed;
  const int n_out = static_cast<int>(std::floor(beta * n + 1e-9));
  switch (mode.kind) {
    case OutlierMode::Kind::Random:
      counts = {n - n_out};
      break;
    case OutlierMode::Kind::Consistent:
      counts = {n - n_out, n_out};
      extra_rotations = 1;
      fixed = {std::nullopt, mode.r_prime};
      break;
    case OutlierMode::Kind::Multi: {
      if (mode.fractions.empty() || mode.rotations.size() != mode.fractions.size())
        throw Error(ErrorCode::Config, "multi mode needs one fraction per rotation");
      double total = 0.0;
      for (double f : mode.fractions) {
        if (f < 0.0) throw Error(ErrorCode::Config, "multi mode fractions must be nonnegative");
        total += f;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw Error(ErrorCode::Config, "multi mode fractions must sum to 1");
      if (std::abs((1.0 - mode.fractions[0]) - beta) > 1e-9)
        throw Error(ErrorCode::Config,
                    "beta must equal one minus the first multi-mode fraction");
      counts = apportion(n, mode.fractions);
      extra_rotations = static_cast<int>(counts.size()) - 1;
      fixed = mode.rotations;
      break;
    }
  }

  RotationSearchInstance inst;
  inst.c_bar_sq = c_bar_sq;
  std::vector<UnitQuaternion> rots;
  rots.push_back(fixed.empty() || !fixed[0] ? random_quaternion(rng) : fixed[0]->canonical());
  for (int k = 1; k <= extra_rotations; ++k) {
    if (fixed.size() > static_cast<size_t>(k) && fixed[k])
      rots.push_back(fixed[k]->canonical());
    else
      rots.push_back(separated_rotation(rng, rots));
  }
  inst.ground_truth = rots[0];
  inst.secondary_truths.assign(rots.begin() + 1, rots.end());

  std::vector<int> labels;
  for (size_t k = 0; k < counts.size(); ++k) labels.insert(labels.end(), counts[k], static_cast<int>(k));
  labels.resize(n, -1);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<Mat3> Rs;
  for (const auto& q : rots) Rs.push_back(quat_to_rotation(q).R);
  inst.measurements.resize(n);
  inst.labels = labels;
  for (int i = 0; i < n; ++i) {
    Measurement& m = inst.measurements[i];
    m.a = random_unit_vector(rng);
    if (labels[i] >= 0) {
      Vec3 b = Rs[labels[i]] * m.a + gaussian3(rng, sigma);
      m.b = b.normalized();
    } else {
      m.b = random_unit_vector(rng);
    }
    m.is_inlier_truth = labels[i] == 0;
  }
  return inst;
}

std::vector<TripletMeasurement> generate_triplet_set(int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::Validation, "n must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<TripletMeasurement> out(n);
  for (auto& t : out) {
    t.a1 = random_unit_vector(rng);
    for (;;) {
      Vec3 g = gaussian3(rng, 1.0);
      Vec3 p = g - t.a1.dot(g) * t.a1;
      if (p.norm() > 1e-6) {
        t.a2 = p.normalized();
        break;
      }
    }
    t.a3 = t.a1.cross(t.a2);
  }
  return out;
}

RotationSearchInstance parse_pairs_csv(const std::string& text) {
  RotationSearchInstance inst;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (inst.measurements.empty() && line.compare(first, 2, "ax") == 0) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string field;
    bool bad = false;
    while (std::getline(ss, field, ',')) {
      try {
        size_t used = 0;
        double v = std::stod(field, &used);
        if (field.find_first_not_of(" \t", used) != std::string::npos) bad = true;
        vals.push_back(v);
      } catch (const std::exception&) {
        bad = true;
      }
    }
    if (bad || vals.size() != 6)
      throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) +
                                        ": expected 6 numeric fields ax,ay,az,bx,by,bz");
    Measurement m;
    m.a = Vec3(vals[0], vals[1], vals[2]);
    m.b = Vec3(vals[3], vals[4], vals[5]);
    if (!(m.a.norm() > 0.0) || !(m.b.norm() > 0.0) || !m.a.allFinite() || !m.b.allFinite())
      throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": zero-length vector");
    m.a.normalize();
    m.b.normalize();
    inst.measurements.push_back(m);
  }
  if (inst.n() < 3)
    throw Error(ErrorCode::DegenerateSet, "need at least 3 measurement pairs");
  return inst;
}

RotationSearchInstance load_pairs_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_pairs_csv(ss.str());
}

namespace {
nlohmann::json quat_json(const UnitQuaternion& q) {
  return {q[0], q[1], q[2], q[3]};
}
UnitQuaternion quat_from_json(const nlohmann::json& j) {
  return UnitQuaternion::normalized(Vec4(j.at(0), j.at(1), j.at(2), j.at(3)));
}
}  // namespace

std::string instance_to_json(const RotationSearchInstance& inst) {
  nlohmann::json j;
  j["n"] = inst.n();
  j["c_bar_sq"] = inst.c_bar_sq;
  auto& ms = j["measurements"] = nlohmann::json::array();
  for (const auto& m : inst.measurements) {
    nlohmann::json e = {{"a", {m.a[0], m.a[1], m.a[2]}}, {"b", {m.b[0], m.b[1], m.b[2]}}};
    if (m.is_inlier_truth) e["inlier"] = *m.is_inlier_truth;
    ms.push_back(e);
  }
  j["truth"] = inst.ground_truth ? quat_json(*inst.ground_truth) : nlohmann::json(nullptr);
  auto& sec = j["secondary_truths"] = nlohmann::json::array();
  for (const auto& q : inst.secondary_truths) sec.push_back(quat_json(q));
  j["labels"] = inst.labels;
  return j.dump(1);
}

RotationSearchInstance instance_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Parse, std::string("instance json: ") + e.what());
  }
  try {
    RotationSearchInstance inst;
    inst.c_bar_sq = j.value("c_bar_sq", 0.0021);
    for (const auto& e : j.at("measurements")) {
      Measurement m;
      m.a = Vec3(e.at("a").at(0), e.at("a").at(1), e.at("a").at(2)).normalized();
      m.b = Vec3(e.at("b").at(0), e.at("b").at(1), e.at("b").at(2)).normalized();
      if (e.contains("inlier")) m.is_inlier_truth = e.at("inlier").get<bool>();
      inst.measurements.push_back(m);
    }
    if (j.contains("truth") && !j.at("truth").is_null())
      inst.ground_truth = quat_from_json(j.at("truth"));
    if (j.contains("secondary_truths"))
      for (const auto& q : j.at("secondary_truths")) inst.secondary_truths.push_back(quat_from_json(q));
    if (j.contains("labels")) inst.labels = j.at("labels").get<std::vector<int>>();
    if (inst.n() < 3) throw Error(ErrorCode::DegenerateSet, "need at least 3 measurements");
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("instance json: ") + e.what());
  }
}

}  // namespace rotcert
