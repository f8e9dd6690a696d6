#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace rotcert {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat39 = Eigen::Matrix<double, 3, 9>;
using Mat9x16 = Eigen::Matrix<double, 9, 16>;

// Unit quaternion, scalar part last: q = (q1, q2, q3, q4).
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(0, 0, 0, 1) {}
  // Throws Validation unless |q|^2 = 1 within 1e-10.
  explicit UnitQuaternion(const Vec4& q);
  static UnitQuaternion identity() { return UnitQuaternion(); }
  // Normalizes an arbitrary nonzero 4-vector.
  static UnitQuaternion normalized(const Vec4& v);

  const Vec4& coeffs() const { return q_; }
  double operator[](int i) const { return q_[i]; }
  UnitQuaternion negated() const;
  // q4 >= 0; when q4 == 0 the first nonzero entry is made positive.
  UnitQuaternion canonical() const;

 private:
  struct Unchecked {};
  UnitQuaternion(const Vec4& q, Unchecked) : q_(q) {}
  Vec4 q_;
};

struct Rotation3 {
  Mat3 R = Mat3::Identity();
};

struct Measurement {
  Vec3 a = Vec3::UnitX();
  Vec3 b = Vec3::UnitX();
  std::optional<bool> is_inlier_truth;
};

// labels[i] == 0: inlier of the ground truth; k >= 1: generated by
// secondary_truths[k-1]; -1: random outlier. Empty when unknown.
struct RotationSearchInstance {
  std::vector<Measurement> measurements;
  double c_bar_sq = 0.0021;
  std::optional<UnitQuaternion> ground_truth;
  std::vector<UnitQuaternion> secondary_truths;
  std::vector<int> labels;

  int n() const { return static_cast<int>(measurements.size()); }
  std::vector<int> truth_inliers() const;
};

struct TripletMeasurement {
  Vec3 a1, a2, a3;
  // Rows stack a_k^T kron I3, so the 9x9 result maps vec(R) to (R a1, R a2, R a3).
  Eigen::Matrix<double, 9, 9> stacked_transpose() const;
};

struct OutlierMode {
  enum class Kind { Random, Consistent, Multi };
  Kind kind = Kind::Random;
  // Consistent: optional fixed R'. Drawn at random when absent.
  std::optional<UnitQuaternion> r_prime;
  // Multi: one entry per generating rotation, the first being the ground
  // truth. Fractions partition all n measurements and must sum to 1.
  std::vector<std::optional<UnitQuaternion>> rotations;
  std::vector<double> fractions;

  static OutlierMode random() { return {}; }
  static OutlierMode consistent();
  // K rotations with equal shares.
  static OutlierMode multi(int k);
};

Rotation3 quat_to_rotation(const UnitQuaternion& q);
UnitQuaternion rotation_to_quat(const Mat3& R);
const Mat9x16& p_matrix();
// Column-major vec of q q^T.
Eigen::Matrix<double, 16, 1> vec_outer(const Vec4& q);
Mat4 cost_matrix(const Measurement& m);
// Returns A_i^T = a^T kron I3 (3x9), so A_i^T vec(R) = R a.
Mat39 wahba_matrix(const Measurement& m);
Eigen::Matrix<double, 9, 1> vec_rotation(const Mat3& R);

UnitQuaternion closed_form_wahba(const std::vector<Measurement>& ms,
                                 const std::vector<double>& weights);
UnitQuaternion closed_form_wahba(const std::vector<Measurement>& ms);

double geodesic_error_deg(const UnitQuaternion& q1, const UnitQuaternion& q2);
// Frobenius distance between the two rotation matrices, i.e. |vec(R1)-vec(R2)|.
double vec_rotation_error(const UnitQuaternion& q1, const UnitQuaternion& q2);
double squared_residual(const Measurement& m, const UnitQuaternion& q);

// Uniform on SO(3).
UnitQuaternion random_quaternion(std::mt19937_64& rng);
Vec3 random_unit_vector(std::mt19937_64& rng);

RotationSearchInstance generate_instance(int n, double beta,
                                         const OutlierMode& mode,
                                         std::uint64_t seed,
                                         double noise_sigma_sq = 1e-4,
                                         double c_bar_sq = 0.0021);

std::vector<TripletMeasurement> generate_triplet_set(int n, std::uint64_t seed);

RotationSearchInstance load_pairs_csv(const std::string& path);
RotationSearchInstance parse_pairs_csv(const std::string& text);

std::string instance_to_json(const RotationSearchInstance& inst);
RotationSearchInstance instance_from_json(const std::string& text);

// Largest-remainder apportionment of n items among the given fractions.
std::vector<int> apportion(int n, const std::vector<double>& fractions);

}  // namespace rotcert
