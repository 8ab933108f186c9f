#ifndef QFLOCK_IBM_HPP
#define QFLOCK_IBM_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qflock/config_error.hpp"
#include "qflock/nematic.hpp"
#include "qflock/quat.hpp"
#include "qflock/rng.hpp"

namespace qflock::ibm {

enum class KernelType { Indicator, Smooth };
enum class Representation { Quaternion, Matrix };

/// Interaction kernel, normalized so its integral over R^3 is one.
struct Kernel {
  KernelType type = KernelType::Indicator;
  double radius = 0.25;

  double normalization() const;
  /// K(dist); zero beyond the radius.
  double operator()(double dist) const;
};

struct SimConfig {
  std::size_t n_particles = 0;
  double v0 = 1.0;             // speed
  double nu = 1.0;             // alignment rate
  double D = 1.0;              // diffusion
  Kernel kernel;
  double dt = 0.0;
  double t_end = 0.0;
  std::array<double, 3> domain = {1.0, 1.0, 1.0};  // periodic box lengths
  std::uint64_t seed = 0;
  Representation representation = Representation::Quaternion;
  bool all_pairs = false;      // skip the cell list, every pair interacts
  std::size_t output_stride = 10;

  double noise_ratio() const { return D / nu; }
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct ParticleEnsemble {
  std::vector<Vec3> positions;
  std::vector<UnitQuat> attitudes;   // representation == Quaternion
  std::vector<Mat3> rotations;       // representation == Matrix
  double time = 0.0;
  Representation representation = Representation::Quaternion;

  std::size_t size() const { return positions.size(); }
};

/// Initial condition: positions uniform in the box, attitudes uniform on the
/// sphere (matrix runs get the images of the same quaternions).
ParticleEnsemble random_ensemble(const SimConfig& cfg);

struct Observables {
  double time = 0.0;
  double nematic_order = 0.0;        // top eigenvalue of the global Q-tensor
  Vec3 mean_direction;               // average of e1(q_k)
  double polar_speed = 0.0;          // |mean_direction|, in [0, 1]
  double energy = 0.0;               // mean alignment objective at qbar
  std::uint64_t diffusion_fallbacks = 0;  // cumulative over the run
};

Observables measure(const ParticleEnsemble& state);

/// Per-particle nematic alignment statistic (q_k . qbar)^2 against the
/// ensemble mean attitude; for matrix runs the identical quantity
/// A_k . PD(mean A) / 2 + 1/4.
std::vector<double> order_statistics(const ParticleEnsemble& state);

/// Sparse kernel weights: for particle k the slice [offsets[k], offsets[k+1])
/// of (index, weight) pairs (self included, weight K(0)).
struct NeighborWeights {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> index;
  std::vector<double> weight;
};

/// Cell-list neighbor search under periodic minimum-image distances,
/// O(N) expected. Requires radius <= min(box)/2; larger radii must go through
/// all-pairs (SimConfig::all_pairs).
NeighborWeights neighbor_search(const std::vector<Vec3>& positions, const Kernel& kernel,
                                const std::array<double, 3>& box);

/// Reference all-pairs version (also the oracle for the cell list).
NeighborWeights neighbor_search_all_pairs(const std::vector<Vec3>& positions,
                                          const Kernel& kernel,
                                          const std::array<double, 3>& box);

/// Orthogonal factor of M = A S (S symmetric positive definite), by the
/// Newton iteration A <- (A + A^-t)/2 seeded at M. det(M) must be positive.
Mat3 polar_decompose(const Mat3& m);

/// One explicit tangent-plus-renormalize step of the quaternion model.
/// Noise streams are derived from (cfg.seed, particle, step_index); the same
/// indices always produce the same increments regardless of threading.
/// Returns the number of particles that fell back to pure diffusion
/// (degenerate local average).
std::uint64_t step_quaternion(ParticleEnsemble& state, const SimConfig& cfg,
                              std::uint64_t step_index, int threads = 1);

/// Matrix-model step with matched noise scale (2 sqrt(D) against the
/// quaternion model's sqrt(D/2)); re-orthonormalization by polar projection.
std::uint64_t step_matrix(ParticleEnsemble& state, const SimConfig& cfg,
                          std::uint64_t step_index, int threads = 1);

struct RunResult {
  ParticleEnsemble final_state;
  std::vector<Observables> series;
  std::uint64_t diffusion_fallbacks = 0;
};

/// Integrate to t_end, recording observables every output_stride steps (and
/// at the final step). Deterministic for a fixed seed; bit-reproducibility is
/// guaranteed at threads == 1. Aborts with the step index if the state stops
/// being finite.
RunResult run(const SimConfig& cfg, int threads = 1,
              const std::function<void(std::uint64_t, const ParticleEnsemble&)>& on_snapshot = {});

}  // namespace qflock::ibm

#endif  // QFLOCK_IBM_HPP
