#include <cmath>
#include <cstring>

#include "taskrt/bench/workloads.hpp"

namespace taskrt::bench {

namespace {

constexpr std::uint32_t kArrayParticles = 4, kArrayForces = 5;
constexpr double kTimeStep = 0.01;
constexpr double kSoftening = 1e-3;

bool same(const std::vector<double>& a, const std::vector<double>& b) noexcept {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

void NBodyParams::validate() const {
  if (bs == 0 || particles == 0) throw BadArgs("nbody: particles and bs must be positive");
  if (particles % bs != 0) throw BadArgs("nbody: particles must be a multiple of bs");
  if (timesteps == 0) throw BadArgs("nbody: timesteps must be positive");
}

NBodyProblem::NBodyProblem(const NBodyParams& p) : p_(p) {
  p_.validate();
  const std::size_t n = p_.blocks();
  particles_.resize(n);
  forces_.resize(n);
  std::uint32_t x = 2024u;
  auto next = [&x] {
    x = x * 1103515245u + 12345u;
    return static_cast<double>((x >> 8) & 0xFFFF) / 65536.0;
  };
  for (std::size_t b = 0; b < n; ++b) {
    ParticleBlock& pb = particles_[b];
    for (auto* v : {&pb.x, &pb.y, &pb.z, &pb.vx, &pb.vy, &pb.vz, &pb.mass}) v->resize(p_.bs);
    for (std::size_t i = 0; i < p_.bs; ++i) {
      pb.x[i] = next();
      pb.y[i] = next();
      pb.z[i] = next();
      pb.vx[i] = (next() - 0.5) * 1e-2;
      pb.vy[i] = (next() - 0.5) * 1e-2;
      pb.vz[i] = (next() - 0.5) * 1e-2;
      pb.mass[i] = 0.5 + next();
    }
    ForceBlock& fb = forces_[b];
    fb.fx.assign(p_.bs, 0.0);
    fb.fy.assign(p_.bs, 0.0);
    fb.fz.assign(p_.bs, 0.0);
  }
}

void nbody_force_block(const ParticleBlock& target, const ParticleBlock& source, ForceBlock& f,
                       bool same_block) noexcept {
  const std::size_t nt = target.x.size();
  const std::size_t ns = source.x.size();
  for (std::size_t p = 0; p < nt; ++p) {
    double fx = f.fx[p], fy = f.fy[p], fz = f.fz[p];
    for (std::size_t q = 0; q < ns; ++q) {
      if (same_block && p == q) continue;
      const double dx = source.x[q] - target.x[p];
      const double dy = source.y[q] - target.y[p];
      const double dz = source.z[q] - target.z[p];
      const double d2 = dx * dx + dy * dy + dz * dz + kSoftening;
      const double s = target.mass[p] * source.mass[q] / (d2 * std::sqrt(d2));
      fx += s * dx;
      fy += s * dy;
      fz += s * dz;
    }
    f.fx[p] = fx;
    f.fy[p] = fy;
    f.fz[p] = fz;
  }
}

void nbody_update(std::vector<ParticleBlock>& particles, std::vector<ForceBlock>& forces) noexcept {
  for (std::size_t b = 0; b < particles.size(); ++b) {
    ParticleBlock& pb = particles[b];
    ForceBlock& fb = forces[b];
    for (std::size_t i = 0; i < pb.x.size(); ++i) {
      const double inv_m = 1.0 / pb.mass[i];
      pb.vx[i] += fb.fx[i] * inv_m * kTimeStep;
      pb.vy[i] += fb.fy[i] * inv_m * kTimeStep;
      pb.vz[i] += fb.fz[i] * inv_m * kTimeStep;
      pb.x[i] += pb.vx[i] * kTimeStep;
      pb.y[i] += pb.vy[i] * kTimeStep;
      pb.z[i] += pb.vz[i] * kTimeStep;
      fb.fx[i] = fb.fy[i] = fb.fz[i] = 0.0;
    }
  }
}

void emit_nbody(const NBodyParams& p, TaskSink& sink, NBodyProblem* data) {
  p.validate();
  const std::size_t n = p.blocks();

  // A step task must declare everything its children touch.
  std::vector<DependenceClause> all_blocks;
  all_blocks.reserve(2 * n);
  for (std::size_t b = 0; b < n; ++b) {
    all_blocks.push_back(inout(block_token(kArrayParticles, b)));
    all_blocks.push_back(inout(block_token(kArrayForces, b)));
  }

  for (std::size_t step = 0; step < p.timesteps; ++step) {
    TaskSpec step_task;
    step_task.label = "nbody_step";
    step_task.clauses = all_blocks;
    step_task.nested = true;
    step_task.body = [n, data, &sink, all_blocks] {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          TaskSpec t;
          t.label = "nbody_force";
          t.clauses = {in(block_token(kArrayParticles, i)), in(block_token(kArrayParticles, j)),
                       inout(block_token(kArrayForces, i))};
          if (data) {
            t.body = [data, i, j] {
              nbody_force_block(data->particles()[i], data->particles()[j], data->forces()[i],
                                i == j);
            };
          }
          sink.spawn(std::move(t));
        }
      }
      TaskSpec update;
      update.label = "nbody_update";
      update.clauses = all_blocks;
      if (data) update.body = [data] { nbody_update(data->particles(), data->forces()); };
      sink.spawn(std::move(update));
      sink.taskwait();
    };
    sink.spawn(std::move(step_task));
  }
}

void nbody_reference(NBodyProblem& data) {
  const std::size_t n = data.params().blocks();
  for (std::size_t step = 0; step < data.params().timesteps; ++step) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        nbody_force_block(data.particles()[i], data.particles()[j], data.forces()[i], i == j);
    nbody_update(data.particles(), data.forces());
  }
}

bool same_bits(const NBodyProblem& a, const NBodyProblem& b) noexcept {
  const auto& pa = a.particles();
  const auto& pb = b.particles();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!same(pa[i].x, pb[i].x) || !same(pa[i].y, pb[i].y) || !same(pa[i].z, pb[i].z) ||
        !same(pa[i].vx, pb[i].vx) || !same(pa[i].vy, pb[i].vy) || !same(pa[i].vz, pb[i].vz)) {
      return false;
    }
  }
  return true;
}

}  // namespace taskrt::bench
