#include "qflock/ibm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qflock/parallel.hpp"

namespace qflock::ibm {

namespace {

double wrap_coord(double x, double box) {
  const double y = x - box * std::floor(x / box);
  return (y >= box) ? y - box : y;
}

Vec3 wrap(const Vec3& x, const std::array<double, 3>& box) {
  return {wrap_coord(x.x, box[0]), wrap_coord(x.y, box[1]), wrap_coord(x.z, box[2])};
}

double min_image(double dx, double box) { return dx - box * std::round(dx / box); }

double min_image_dist(const Vec3& a, const Vec3& b, const std::array<double, 3>& box) {
  const double dx = min_image(a.x - b.x, box[0]);
  const double dy = min_image(a.y - b.y, box[1]);
  const double dz = min_image(a.z - b.z, box[2]);
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Lift of a rotation matrix to a unit quaternion (sign arbitrary).
UnitQuat rotation_to_quat(const Mat3& a) {
  const double t = a(0, 0) + a(1, 1) + a(2, 2);
  Quat q;
  if (t > 0.0) {
    double s = std::sqrt(t + 1.0) * 2.0;
    q = {0.25 * s, (a(2, 1) - a(1, 2)) / s, (a(0, 2) - a(2, 0)) / s, (a(1, 0) - a(0, 1)) / s};
  } else if (a(0, 0) >= a(1, 1) && a(0, 0) >= a(2, 2)) {
    double s = std::sqrt(1.0 + a(0, 0) - a(1, 1) - a(2, 2)) * 2.0;
    q = {(a(2, 1) - a(1, 2)) / s, 0.25 * s, (a(0, 1) + a(1, 0)) / s, (a(0, 2) + a(2, 0)) / s};
  } else if (a(1, 1) >= a(2, 2)) {
    double s = std::sqrt(1.0 + a(1, 1) - a(0, 0) - a(2, 2)) * 2.0;
    q = {(a(0, 2) - a(2, 0)) / s, (a(0, 1) + a(1, 0)) / s, 0.25 * s, (a(1, 2) + a(2, 1)) / s};
  } else {
    double s = std::sqrt(1.0 + a(2, 2) - a(0, 0) - a(1, 1)) * 2.0;
    q = {(a(1, 0) - a(0, 1)) / s, (a(0, 2) + a(2, 0)) / s, (a(1, 2) + a(2, 1)) / s, 0.25 * s};
  }
  return UnitQuat(q);
}

// All weights equal K(0) and every pair interacts: the local averages
// coincide and can be built once per step.
bool kernel_is_global(const SimConfig& cfg) {
  if (!cfg.all_pairs || cfg.kernel.type != KernelType::Indicator) return false;
  const double r2 = cfg.kernel.radius * cfg.kernel.radius;
  double max2 = 0.0;
  for (double l : cfg.domain) max2 += 0.25 * l * l;
  return r2 >= max2;
}

constexpr std::uint64_t kStreamInitPosition = 0xfffffffffffffffeULL;
constexpr std::uint64_t kStreamInitAttitude = 0xffffffffffffffffULL;

}  // namespace

double Kernel::normalization() const {
  if (!(radius > 0.0)) throw ConfigError("kernel.radius", "must be positive");
  const double r3 = radius * radius * radius;
  switch (type) {
    case KernelType::Indicator:
      return 3.0 / (4.0 * M_PI * r3);
    case KernelType::Smooth:
      return 105.0 / (32.0 * M_PI * r3);
  }
  throw ConfigError("kernel.type", "unknown kernel type");
}

double Kernel::operator()(double dist) const {
  if (dist > radius) return 0.0;
  switch (type) {
    case KernelType::Indicator:
      return normalization();
    case KernelType::Smooth: {
      const double u = dist / radius;
      const double t = 1.0 - u * u;
      return normalization() * t * t;
    }
  }
  return 0.0;
}

void SimConfig::validate() const {
  if (n_particles < 1) throw ConfigError("n_particles", "must be >= 1");
  if (!(v0 > 0.0)) throw ConfigError("v0", "must be positive");
  if (!(nu >= 0.0)) throw ConfigError("nu", "must be nonnegative");
  if (!(D >= 0.0)) throw ConfigError("D", "must be nonnegative");
  if (!(dt > 0.0)) throw ConfigError("dt", "must be positive");
  if (dt * nu > 0.1 + 1e-12) throw ConfigError("dt", "stability guard dt*nu <= 0.1 violated");
  if (!(t_end >= 0.0)) throw ConfigError("t_end", "must be nonnegative");
  for (double l : domain) {
    if (!(l > 0.0)) throw ConfigError("domain", "box lengths must be positive");
  }
  if (!(kernel.radius > 0.0)) throw ConfigError("kernel.radius", "must be positive");
  const double min_box = std::min({domain[0], domain[1], domain[2]});
  if (!all_pairs && kernel.radius > 0.5 * min_box) {
    throw ConfigError("kernel.radius",
                      "exceeds half the smallest box length; set all_pairs for dense kernels");
  }
  if (output_stride < 1) throw ConfigError("output_stride", "must be >= 1");
}

ParticleEnsemble random_ensemble(const SimConfig& cfg) {
  cfg.validate();
  ParticleEnsemble s;
  s.representation = cfg.representation;
  s.positions.resize(cfg.n_particles);
  for (std::size_t i = 0; i < cfg.n_particles; ++i) {
    Rng rng = Rng::derive(cfg.seed, i, kStreamInitPosition);
    s.positions[i] = {rng.uniform() * cfg.domain[0], rng.uniform() * cfg.domain[1],
                      rng.uniform() * cfg.domain[2]};
  }
  std::vector<UnitQuat> quats;
  quats.reserve(cfg.n_particles);
  for (std::size_t i = 0; i < cfg.n_particles; ++i) {
    Rng rng = Rng::derive(cfg.seed, i, kStreamInitAttitude);
    quats.push_back(sample_uniform(rng));
  }
  if (cfg.representation == Representation::Quaternion) {
    s.attitudes = std::move(quats);
  } else {
    s.rotations.reserve(cfg.n_particles);
    for (const auto& q : quats) s.rotations.push_back(to_matrix(q));
  }
  return s;
}

NeighborWeights neighbor_search_all_pairs(const std::vector<Vec3>& positions,
                                          const Kernel& kernel,
                                          const std::array<double, 3>& box) {
  const std::size_t n = positions.size();
  NeighborWeights w;
  w.offsets.assign(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double kv = kernel(min_image_dist(positions[i], positions[k], box));
      if (kv > 0.0) {
        w.index.push_back(i);
        w.weight.push_back(kv);
      }
    }
    w.offsets[k + 1] = w.index.size();
  }
  return w;
}

NeighborWeights neighbor_search(const std::vector<Vec3>& positions, const Kernel& kernel,
                                const std::array<double, 3>& box) {
  const double min_box = std::min({box[0], box[1], box[2]});
  if (kernel.radius > 0.5 * min_box) {
    throw std::invalid_argument(
        "neighbor_search: radius exceeds half the box; use the all-pairs path");
  }
  const std::size_t n = positions.size();

  int nc[3];
  for (int a = 0; a < 3; ++a) nc[a] = std::max(1, static_cast<int>(box[a] / kernel.radius));
  const int total_cells = nc[0] * nc[1] * nc[2];

  auto cell_of = [&](const Vec3& p) {
    int c[3];
    const double xyz[3] = {p.x, p.y, p.z};
    for (int a = 0; a < 3; ++a) {
      int idx = static_cast<int>(std::floor(wrap_coord(xyz[a], box[a]) / box[a] * nc[a]));
      c[a] = std::min(idx, nc[a] - 1);
    }
    return (c[0] * nc[1] + c[1]) * nc[2] + c[2];
  };

  std::vector<std::vector<std::size_t>> cells(total_cells);
  for (std::size_t i = 0; i < n; ++i) cells[cell_of(positions[i])].push_back(i);

  // Distinct wrapped neighbor indices per axis (offsets -1, 0, 1 can alias
  // when an axis has fewer than three cells).
  auto axis_neighbors = [&](int c, int a) {
    std::vector<int> out;
    for (int off = -1; off <= 1; ++off) {
      int idx = (c + off + nc[a]) % nc[a];
      if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
    }
    return out;
  };

  NeighborWeights w;
  w.offsets.assign(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const double xyz[3] = {positions[k].x, positions[k].y, positions[k].z};
    int c[3];
    for (int a = 0; a < 3; ++a) {
      int idx = static_cast<int>(std::floor(wrap_coord(xyz[a], box[a]) / box[a] * nc[a]));
      c[a] = std::min(idx, nc[a] - 1);
    }
    const auto cx = axis_neighbors(c[0], 0);
    const auto cy = axis_neighbors(c[1], 1);
    const auto cz = axis_neighbors(c[2], 2);
    for (int ix : cx)
      for (int iy : cy)
        for (int iz : cz) {
          const auto& bucket = cells[(ix * nc[1] + iy) * nc[2] + iz];
          for (std::size_t i : bucket) {
            const double kv = kernel(min_image_dist(positions[i], positions[k], box));
            if (kv > 0.0) {
              w.index.push_back(i);
              w.weight.push_back(kv);
            }
          }
        }
    w.offsets[k + 1] = w.index.size();
  }
  return w;
}

Mat3 polar_decompose(const Mat3& m) {
  if (!(det(m) > 0.0)) {
    throw std::domain_error("polar_decompose: determinant must be positive");
  }
  Mat3 x = m;
  for (int it = 0; it < 30; ++it) {
    const Mat3 next = (x + transpose(inverse(x))) * 0.5;
    const double delta = frobenius_norm(next - x);
    x = next;
    if (delta < 1e-12) return x;
  }
  throw std::runtime_error("polar_decompose: Newton iteration did not converge");
}

namespace {

struct LocalAverages {
  bool global = false;
  QTensor global_q;                  // quaternion runs
  Mat3 global_m;                     // matrix runs
  NeighborWeights weights;           // per-particle kernels otherwise
};

LocalAverages local_averages(const ParticleEnsemble& state, const SimConfig& cfg) {
  LocalAverages la;
  la.global = kernel_is_global(cfg);
  const std::size_t n = state.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  if (la.global) {
    const double k0 = cfg.kernel(0.0);
    if (state.representation == Representation::Quaternion) {
      Mat4 t;
      for (const auto& q : state.attitudes) add_outer(t, q.value(), k0 * inv_n);
      for (int i = 0; i < 4; ++i) t.m[i][i] -= 0.25 * k0;
      la.global_q = t;
    } else {
      Mat3 m;
      for (const auto& a : state.rotations) m += a * (k0 * inv_n);
      la.global_m = m;
    }
    return la;
  }
  la.weights = cfg.all_pairs
                   ? neighbor_search_all_pairs(state.positions, cfg.kernel, cfg.domain)
                   : neighbor_search(state.positions, cfg.kernel, cfg.domain);
  return la;
}

}  // namespace

std::uint64_t step_quaternion(ParticleEnsemble& state, const SimConfig& cfg,
                              std::uint64_t step_index, int threads) {
  if (state.representation != Representation::Quaternion) {
    throw std::invalid_argument("step_quaternion: state is not in quaternion representation");
  }
  const std::size_t n = state.size();
  const LocalAverages la = local_averages(state, cfg);
  const std::vector<UnitQuat> old_q = state.attitudes;
  const std::vector<Vec3> old_x = state.positions;
  const double noise_scale = std::sqrt(0.5 * cfg.D) * std::sqrt(cfg.dt);
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<std::uint8_t> fell_back(n, 0);
  parallel_for(n, threads, [&](std::size_t k) {
    const Quat qk = old_q[k].value();

    QTensor qt;
    if (la.global) {
      qt = la.global_q;
    } else {
      double wsum = 0.0;
      for (std::size_t s = la.weights.offsets[k]; s < la.weights.offsets[k + 1]; ++s) {
        add_outer(qt, old_q[la.weights.index[s]].value(), la.weights.weight[s] * inv_n);
        wsum += la.weights.weight[s];
      }
      const double diag = 0.25 * wsum * inv_n;
      for (int i = 0; i < 4; ++i) qt.m[i][i] -= diag;
    }

    Quat drift{};
    try {
      const NematicMean mean = principal_eigvec(qt, old_q[k]);
      const Quat f = mean.qbar.value() * dot(mean.qbar.value(), qk) - qk * 0.25;
      drift = project_orthogonal(f, qk) * (cfg.nu * cfg.dt);
    } catch (const DegenerateMaximumError&) {
      fell_back[k] = 1;  // pure diffusion this step
    }

    Rng rng = Rng::derive(cfg.seed, k, step_index);
    const Vec3 u = rng.normal3() * noise_scale;
    const Quat noise = mul(Quat::from_vec(u), qk);  // tangent by construction

    state.attitudes[k] = UnitQuat(qk + drift + noise);
    state.positions[k] = wrap(old_x[k] + e1_of(old_q[k]) * (cfg.v0 * cfg.dt), cfg.domain);
  });

  state.time += cfg.dt;
  std::uint64_t fallbacks = 0;
  for (auto b : fell_back) fallbacks += b;
  return fallbacks;
}

std::uint64_t step_matrix(ParticleEnsemble& state, const SimConfig& cfg,
                          std::uint64_t step_index, int threads) {
  if (state.representation != Representation::Matrix) {
    throw std::invalid_argument("step_matrix: state is not in matrix representation");
  }
  const std::size_t n = state.size();
  const LocalAverages la = local_averages(state, cfg);
  const std::vector<Mat3> old_a = state.rotations;
  const std::vector<Vec3> old_x = state.positions;
  // sigma_tilde = sqrt(8) * sqrt(D/2) = 2 sqrt(D): matched noise scales.
  const double noise_scale = 2.0 * std::sqrt(cfg.D) * std::sqrt(cfg.dt);
  const double inv_n = 1.0 / static_cast<double>(n);

  // The dense path shares one polar decomposition per step.
  bool global_ok = false;
  Mat3 global_pd;
  if (la.global && det(la.global_m) > 0.0) {
    global_pd = polar_decompose(la.global_m);
    global_ok = true;
  }

  std::vector<std::uint8_t> fell_back(n, 0);
  parallel_for(n, threads, [&](std::size_t k) {
    const Mat3& ak = old_a[k];

    auto project_tangent = [&](const Mat3& x) {
      const Mat3 s = (matmul(x, transpose(ak)) - matmul(ak, transpose(x))) * 0.5;
      return matmul(s, ak);
    };

    Mat3 drift;  // zero
    if (la.global) {
      if (global_ok) {
        drift = project_tangent(global_pd) * (cfg.nu * cfg.dt);
      } else {
        fell_back[k] = 1;
      }
    } else {
      Mat3 mk;
      for (std::size_t s = la.weights.offsets[k]; s < la.weights.offsets[k + 1]; ++s) {
        mk += old_a[la.weights.index[s]] * (la.weights.weight[s] * inv_n);
      }
      if (det(mk) > 0.0) {
        drift = project_tangent(polar_decompose(mk)) * (cfg.nu * cfg.dt);
      } else {
        fell_back[k] = 1;
      }
    }

    Rng rng = Rng::derive(cfg.seed, k, step_index);
    Mat3 g;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) = rng.normal();
    const Mat3 noise = project_tangent(g) * noise_scale;

    state.rotations[k] = polar_decompose(ak + drift + noise);
    state.positions[k] =
        wrap(old_x[k] + matvec(ak, Vec3{1.0, 0.0, 0.0}) * (cfg.v0 * cfg.dt), cfg.domain);
  });

  state.time += cfg.dt;
  std::uint64_t fallbacks = 0;
  for (auto b : fell_back) fallbacks += b;
  return fallbacks;
}

namespace {

std::vector<UnitQuat> lifted_attitudes(const ParticleEnsemble& state) {
  if (state.representation == Representation::Quaternion) return state.attitudes;
  std::vector<UnitQuat> out;
  out.reserve(state.rotations.size());
  for (const auto& a : state.rotations) out.push_back(rotation_to_quat(a));
  return out;
}

}  // namespace

Observables measure(const ParticleEnsemble& state) {
  const std::vector<UnitQuat> quats = lifted_attitudes(state);
  const QTensor q = build_qtensor(quats);
  const SymEig4 eig = jacobi_eig4(q);

  Observables obs;
  obs.time = state.time;
  obs.nematic_order = eig.values[0];
  obs.energy = eig.values[0];  // alignment objective attains lambda_max at qbar
  Vec3 mean_dir;
  for (const auto& qk : quats) mean_dir += e1_of(qk);
  obs.mean_direction = mean_dir * (1.0 / static_cast<double>(quats.size()));
  obs.polar_speed = norm(obs.mean_direction);
  return obs;
}

std::vector<double> order_statistics(const ParticleEnsemble& state) {
  const std::vector<UnitQuat> quats = lifted_attitudes(state);
  const QTensor q = build_qtensor(quats);
  const SymEig4 eig = jacobi_eig4(q);
  const Quat qbar{eig.vectors.m[0][0], eig.vectors.m[1][0], eig.vectors.m[2][0],
                  eig.vectors.m[3][0]};
  std::vector<double> out;
  out.reserve(quats.size());
  for (const auto& qk : quats) {
    const double r = dot(qk.value(), qbar);
    out.push_back(r * r);
  }
  return out;
}

RunResult run(const SimConfig& cfg, int threads,
              const std::function<void(std::uint64_t, const ParticleEnsemble&)>& on_snapshot) {
  cfg.validate();
  RunResult res;
  res.final_state = random_ensemble(cfg);
  ParticleEnsemble& state = res.final_state;

  const auto n_steps = static_cast<std::uint64_t>(std::llround(cfg.t_end / cfg.dt));
  const bool quat_rep = cfg.representation == Representation::Quaternion;

  auto check_finite = [&](std::uint64_t step) {
    for (const auto& p : state.positions) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
        throw std::runtime_error("run: non-finite position at step " + std::to_string(step));
      }
    }
    if (quat_rep) {
      for (const auto& q : state.attitudes) {
        if (!std::isfinite(norm2(q.value()))) {
          throw std::runtime_error("run: non-finite attitude at step " + std::to_string(step));
        }
      }
    } else {
      for (const auto& a : state.rotations) {
        if (!std::isfinite(frobenius_norm(a))) {
          throw std::runtime_error("run: non-finite attitude at step " + std::to_string(step));
        }
      }
    }
  };

  auto record = [&](std::uint64_t step) {
    Observables obs = measure(state);
    obs.diffusion_fallbacks = res.diffusion_fallbacks;
    res.series.push_back(obs);
    if (on_snapshot) on_snapshot(step, state);
  };

  record(0);
  for (std::uint64_t step = 0; step < n_steps; ++step) {
    res.diffusion_fallbacks +=
        quat_rep ? step_quaternion(state, cfg, step, threads) : step_matrix(state, cfg, step, threads);
    check_finite(step);
    if ((step + 1) % cfg.output_stride == 0 || step + 1 == n_steps) record(step + 1);
  }
  return res;
}

}  // namespace qflock::ibm
