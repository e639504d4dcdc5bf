#include "rampopt/de.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "rampopt/errors.hpp"
#include "rampopt/rng.hpp"

namespace rampopt {

DifferentialEvolution::DifferentialEvolution(int dimension, const DeOptions& opts,
                                             std::uint64_t seed)
    : opts_(opts) {
  if (dimension < 1) throw DomainError("population needs at least one dimension");
  if (!(opts.mutation >= 0.0) || !(opts.crossover >= 0.0) || opts.crossover > 1.0) {
    throw DomainError("invalid differential-evolution coefficients");
  }
  const int m = opts.population > 0 ? opts.population : std::max(10, 3 * dimension);
  if (m < 4) throw DomainError("population must hold at least four members");

  members_.resize(dimension, m);
  cost_.assign(static_cast<std::size_t>(m),
               std::numeric_limits<double>::infinity());
  valid_.assign(static_cast<std::size_t>(m), 0);

  // Latin hypercube: one stratum per member and dimension, independently
  // permuted, so the initial spread covers every axis evenly.
  auto rng = engine_for(seed, "lhs-init");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> perm(static_cast<std::size_t>(m));
  for (int k = 0; k < dimension; ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int j = 0; j < m; ++j) {
      members_(k, j) =
          (static_cast<double>(perm[static_cast<std::size_t>(j)]) + u(rng)) /
          static_cast<double>(m);
    }
  }
}

bool DifferentialEvolution::any_valid() const {
  return std::any_of(valid_.begin(), valid_.end(), [](char v) { return v != 0; });
}

DifferentialEvolution::Proposal DifferentialEvolution::propose(
    std::uint64_t call_seed) {
  const int m = population();
  Proposal p;
  if (init_cursor_ < m) {
    p.x = members_.col(init_cursor_);
    p.target = init_cursor_;
    p.from_init = true;
    ++init_cursor_;
    return p;
  }

  p.target = target_cursor_;
  target_cursor_ = (target_cursor_ + 1) % m;
  auto rng = engine_for(call_seed, "de-step");
  std::uniform_real_distribution<double> u(0.0, 1.0);

  if (!any_valid()) {
    // Every member failed so far: resample instead of recombining garbage.
    p.x.resize(dimension());
    for (int k = 0; k < dimension(); ++k) p.x[k] = u(rng);
    return p;
  }

  std::uniform_int_distribution<int> pick(0, m - 1);
  int r[3];
  for (int i = 0; i < 3; ++i) {
    int candidate = pick(rng);
    while (candidate == p.target || (i > 0 && candidate == r[0]) ||
           (i > 1 && candidate == r[1])) {
      candidate = pick(rng);
    }
    r[i] = candidate;
  }

  p.x.resize(dimension());
  for (int k = 0; k < dimension(); ++k) {
    const double mutant = members_(k, r[0]) +
                          opts_.mutation * (members_(k, r[1]) - members_(k, r[2]));
    const double gene = u(rng) < opts_.crossover ? mutant : members_(k, p.target);
    p.x[k] = std::clamp(gene, 0.0, 1.0);
  }
  return p;
}

void DifferentialEvolution::tell(const Proposal& proposal, double cost, bool valid) {
  if (proposal.target < 0 || proposal.target >= population()) {
    throw DomainError("proposal does not belong to this population");
  }
  const std::size_t t = static_cast<std::size_t>(proposal.target);
  if (proposal.from_init) {
    cost_[t] = cost;
    valid_[t] = valid ? 1 : 0;
    return;
  }
  // Failed proposals never displace anything; successful ones displace a
  // failed target unconditionally and a successful one only on improvement.
  const bool replaces = valid && (!valid_[t] || cost < cost_[t]);
  if (replaces) {
    members_.col(proposal.target) = proposal.x;
    cost_[t] = cost;
    valid_[t] = valid ? 1 : 0;
  }
}

}  // namespace rampopt
