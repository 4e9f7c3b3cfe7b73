#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sft {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec2i = Eigen::Vector2i;
using Vec3i = Eigen::Vector3i;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using MatX2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define SFT_DEFINE_ERROR(Name)                                    \
  struct Name : Error {                                           \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

SFT_DEFINE_ERROR(DegenerateFace);
SFT_DEFINE_ERROR(IndexOutOfRange);
SFT_DEFINE_ERROR(BehindCamera);
SFT_DEFINE_ERROR(NonPositiveDensity);
SFT_DEFINE_ERROR(ShapeMismatch);
SFT_DEFINE_ERROR(SolverDiverged);
SFT_DEFINE_ERROR(NaNDetected);
SFT_DEFINE_ERROR(TapeMismatch);
SFT_DEFINE_ERROR(EmptyCloud);
SFT_DEFINE_ERROR(DegenerateConfiguration);
SFT_DEFINE_ERROR(MissingFile);
SFT_DEFINE_ERROR(CountMismatch);
SFT_DEFINE_ERROR(ParseError);
SFT_DEFINE_ERROR(NonFiniteEnergy);

#undef SFT_DEFINE_ERROR

// Process-wide worker count for pixel/face loops. 1 = serial.
void set_thread_count(int n);
int thread_count();

// Splits [0, n) into contiguous chunks, one per worker. Each index is
// visited exactly once; chunks write disjoint outputs so the result does
// not depend on the schedule.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& chunk_fn);

inline bool all_finite(const Eigen::Ref<const MatX>& m) { return m.allFinite(); }

std::string version_string();

}  // namespace sft
