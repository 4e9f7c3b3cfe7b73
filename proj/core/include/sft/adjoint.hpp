#pragma once

#include "sft/physics.hpp"

namespace sft {

// Gradients of a scalar objective with respect to every component of the
// physical parametrization.
struct ParamGradients {
  double density = 0;
  VecX stretch;  // 24
  VecX bend;     // 15
  Vec3 wind = Vec3::Zero();
  std::vector<MatX3> correctives;  // one slice per simulated step

  static ParamGradients zero(int vertex_count, int step_count);
  void accumulate_shared(const struct StepGradients& sg);
  bool all_finite() const;
};

// Output of one reverse step: gradients w.r.t. the incoming state plus
// this step's parameter slice.
struct StepGradients {
  MatX3 x_prev, v_prev;
  double density = 0;
  VecX stretch, bend;
  Vec3 wind = Vec3::Zero();
  MatX3 corrective;
};

// Implicit differentiation of one forward step. The adjoint system reuses
// the (symmetric) forward operator; contact projection is differentiated
// with the active set frozen from the tape.
StepGradients backward_step(const StepTape& tape, const TemplateMesh& mesh,
                            const MatX3& grad_x_out, const MatX3& grad_v_out);

// Reverse-chronological sweep over a recorded rollout. per_frame_grad_x
// holds dE/d(positions) per frame, indexed by time (entry t-1 for frame
// t); empty entries mean zero. Frame 1 is the given template.
ParamGradients backward_rollout(const std::vector<StepTape>& tapes, const TemplateMesh& mesh,
                                const std::vector<MatX3>& per_frame_grad_x);

}  // namespace sft
