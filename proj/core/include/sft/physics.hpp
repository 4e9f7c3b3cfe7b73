#pragma once

#include "sft/elastic.hpp"
#include "sft/geometry.hpp"

#include <Eigen/Sparse>
#include <optional>
#include <vector>

namespace sft {

// The full physical parametrization of a sequence: material constants
// shared over time plus per-frame corrective velocity increments.
struct PhysicsParams {
  double density = 0.15;     // kg/m^2
  VecX stretch_stiffness;    // 24 entries, N/m
  VecX bend_stiffness;       // 15 entries, N*m
  Vec3 wind = Vec3::Zero();  // wind velocity, m/step
  double air_density = 1.0;  // kg/m^3, fixed (never optimized)
  // correctives[t-1] applies when stepping frame t -> t+1 (t is 1-based);
  // empty means all-zero.
  std::vector<MatX3> correctives;

  static PhysicsParams defaults();
  // Componentwise projection S >= 0, B >= 0.
  void clamp_stiffness();
  void validate(int vertex_count, int frame_count) const;
};

struct SimConfig {
  double step = 1.0;              // h, one frame
  Vec3 gravity = Vec3::Zero();    // m/step^2
  std::vector<int> pinned;        // vertices held fixed
  double solver_tol = 1e-9;       // relative residual of the linear solve
  int solver_max_iter = 0;        // 0 -> 10 * (3 |V|)
  bool ground_enabled = false;
  double ground_height = 0.0;     // plane z = height, normal +z
};

// Obstacle geometry per frame; topology fixed, delta is the collision margin.
struct CollisionObstacle {
  Eigen::MatrixX3i faces;
  std::vector<MatX3> positions;
  std::vector<MatX3> velocities;
  double thickness = 1e-3;

  void validate() const;
};

// One frame of obstacle state, as consumed by step().
struct ObstacleView {
  const Eigen::MatrixX3i* faces = nullptr;
  const MatX3* positions = nullptr;
  const MatX3* velocities = nullptr;
  double thickness = 0;
};

// Forces and their Jacobians at one state. Elastic Hessians are stored as
// per-element blocks (face stencils for stretching, 4-vertex hinge
// stencils for bending); f = -grad(energy), df/dx = -hess(energy).
struct ForceAssembly {
  int nv = 0;
  VecX force;      // 3|V|
  VecX mass_diag;  // 3|V|, strictly positive

  std::vector<Eigen::Matrix<double, 9, 9>> face_hessians;
  std::vector<Eigen::Matrix<double, 12, 12>> hinge_hessians;
  std::vector<int> hinge_edges;  // edge index per hinge

  // Per-face wind drag f = rho * area * ((w - v_mean) . n) n / 3 per vertex.
  struct WindFace {
    Vec3 rel;          // w - v_mean
    Vec3 area_normal;  // n * area (unnormalized cross / 2)
    Vec3 d1, d2;       // edge vectors, for the position Jacobian
    double area = 0;
  };
  std::vector<WindFace> wind;
  double air_density = 0;

  // Exact force Jacobians (wind included in x; drag in v).
  Eigen::SparseMatrix<double> jacobian_x(const TemplateMesh& mesh) const;
  Eigen::SparseMatrix<double> jacobian_v(const TemplateMesh& mesh) const;
  // Implicit-solve operator M - h df/dv - h^2 (df/dx)_elastic; wind's
  // position coupling stays explicit so the system remains symmetric.
  Eigen::SparseMatrix<double> system_matrix(const TemplateMesh& mesh, double h) const;
  // (df/dx)_elastic * y without forming the matrix.
  VecX apply_elastic_jx(const TemplateMesh& mesh, const VecX& y) const;
};

// Per-vertex lumped rest area, one third of each incident face.
VecX lumped_vertex_areas(const TemplateMesh& mesh);

// Diagonal mass matrix entries (3 per vertex) for density d.
VecX mass_matrix(const TemplateMesh& mesh, double density);

// Individual force terms; each fills its section of the assembly.
void stretching_forces(const SurfaceState& state, const TemplateMesh& mesh,
                       const VecX& stretch_stiffness, ForceAssembly& out);
void bending_forces(const SurfaceState& state, const TemplateMesh& mesh,
                    const VecX& bend_stiffness, ForceAssembly& out);
void external_forces(const SurfaceState& state, const TemplateMesh& mesh, const Vec3& wind,
                     double air_density, const Vec3& gravity, ForceAssembly& out);

ForceAssembly assemble_forces(const SurfaceState& state, const TemplateMesh& mesh,
                              const PhysicsParams& params, const SimConfig& config);

// Everything backward_step needs to reconstruct the linearized system and
// the frozen contact set of one forward step.
struct StepTape {
  MatX3 x0, v0;
  int in_time_index = 0;
  double density = 0;
  VecX stretch_stiffness, bend_stiffness;
  Vec3 wind = Vec3::Zero();
  double air_density = 1;
  MatX3 corrective;  // slice applied this step (may be empty)
  SimConfig config;
  VecX delta_v;  // linear-solve solution

  struct Contact {
    int vertex = -1;
    Vec3 normal = Vec3::UnitZ();
    double pos_target = 0;  // n . x = pos_target after projection
    double vel_target = 0;  // n . v = vel_target after projection
  };
  std::vector<Contact> contacts;
};

// One implicit backward-Euler step with force linearization, corrective
// velocity increments and joint impact-zone projection. If tape is given,
// records what the adjoint needs.
SurfaceState step(const SurfaceState& state, const TemplateMesh& mesh,
                  const PhysicsParams& params, const SimConfig& config,
                  const ObstacleView* obstacle = nullptr, StepTape* tape = nullptr);

// Re-runs a recorded step with its frozen contact set; bitwise equal to
// the original output.
SurfaceState replay_step(const StepTape& tape, const TemplateMesh& mesh);

// Rollout over frames 1..frame_count. states[0] is the initial state.
std::vector<SurfaceState> simulate(const TemplateMesh& mesh, const PhysicsParams& params,
                                   const SimConfig& config, int frame_count,
                                   const CollisionObstacle* obstacle = nullptr,
                                   std::vector<StepTape>* tapes = nullptr);

// Joint projection of the active contact constraints; exposed for tests.
void project_contacts(const std::vector<StepTape::Contact>& contacts, MatX3& positions,
                      MatX3& velocities);

// Contact detection against ground plane and obstacle at given positions.
std::vector<StepTape::Contact> detect_contacts(const MatX3& positions, const SimConfig& config,
                                               const ObstacleView* obstacle);

}  // namespace sft
